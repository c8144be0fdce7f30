// Structure a tick-marked model induces on its horizontal carrier: the
// parity-flip relation that plays the role of a horizontal accessibility, the
// same-interval equivalence, and the interval classes. Plus the two checks
// the construction is used for: agreement of the interval diamond with the
// derived relation, and propagation of a variable across its interval.
#pragma once

#include "bimodal/formula.hpp"
#include "bimodal/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bimodal {

struct DerivedStructure {
  uint32_t columns = 0;                        // horizontal carrier size
  std::vector<std::vector<bool>> reach;        // derived relation (transitive)
  std::vector<std::vector<bool>> same;         // same-interval equivalence
  std::vector<uint32_t> interval;              // column -> index into classes
  std::vector<std::vector<uint32_t>> classes;  // member columns, ascending
};

// Computes the derived relation (x reaches y iff some horizontal successor z
// of x flips the tick parity against x on z's whole domain and y is z or
// below it) and the equivalence "same interval" (comparable but not
// reach-related), then validates the package: the tick alternation formula
//   [1]+[0]+(Tick | <1>Tick -> Tick & [1]Tick)
// must hold at the root, the relation must be transitive, the equivalence
// must be one, both congruence laws between them must hold, and the interval
// diamond must agree with the derived relation on every valuation variable.
// Requires a product or decreasing grid model; throws Error otherwise.
DerivedStructure derive_tick_structure(const Model& m, const std::string& tick_var);

// True iff at every point (x,u), the interval diamond applied to psi holds
// exactly when some column y with reach[x][y] carries u and satisfies psi
// at (y,u).
bool bullet_agrees(const Model& m, const DerivedStructure& d, Formula psi,
                   const std::string& tick_var);

// Descriptions of every point where p holds but fails somewhere else on its
// column's interval (same vertical); empty when p is interval-uniform.
std::vector<std::string> interval_claim_violations(const Model& m,
                                                   const DerivedStructure& d,
                                                   const std::string& p);

}  // namespace bimodal
