// Exact truth evaluation over finite models, frame validity by valuation
// enumeration, and failure localization for the witness verifier.
#pragma once

#include "bimodal/model.hpp"

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

namespace bimodal {

// Labels each world with each subformula once. Bound to one model; the
// memo is keyed by interned node id, so repeated queries against the same
// model (the verifier asks about every conjunct of an encoding) stay cheap.
// The model must outlive the checker and not change under it.
class Checker {
 public:
  explicit Checker(const Model& m);

  // Set of worlds where f holds.
  const Bits& states(Formula f);
  bool holds(uint32_t w, Formula f);

  const Model& model() const { return *m_; }
  const Bits& successors(int i, uint32_t w) const {
    return i == 0 ? succ0_[w] : succ1_[w];
  }

 private:
  const Model* m_;
  std::vector<Bits> succ0_, succ1_;
  std::unordered_map<uint32_t, Bits> memo_;
};

// One-shot convenience wrappers. Throw Error when w is out of range.
bool check(const Model& m, uint32_t w, Formula f);

// Least world (carrier order) satisfying f, if any.
std::optional<uint32_t> satisfiable_in(const Model& m, Formula f);

// True iff f holds at every world under every valuation of vars(f).
// Enumerates all 2^(|worlds| * |vars|) valuations in ascending bit order;
// throws BudgetError when that count exceeds max_assignments.
inline constexpr uint64_t kDefaultValidityBudget = uint64_t(1) << 24;
bool valid_in_frame(const TwoFrame& tf, Formula f,
                    uint64_t max_assignments = kDefaultValidityBudget);

// Worlds blamed for f failing at w, sorted. Conjunctions split into their
// failing conjuncts; a box [i]psi chases every i-successor where psi fails;
// anything else blames w itself. So for the guarded conjuncts the compilers
// emit ([0]+[1]+(guard -> body) and kin), the blame lands on the worlds
// where the innermost implication fails, which is what the verifier's
// boundary test wants. Returns the empty set when f in fact holds at w.
std::vector<uint32_t> failure_points(Checker& c, uint32_t w, Formula f);

}  // namespace bimodal
