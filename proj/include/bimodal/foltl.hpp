// Monadic one-variable first-order temporal formulas over a single flow of
// time, their finite models, and the two correspondences with the bimodal
// side: the star translation on formulas and the dagger glueing on models.
#pragma once

#include "bimodal/model.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bimodal {

// Primitive constructors: P(x), negation, conjunction, the future diamond,
// and "some other element now". Everything else is sugar.
enum class FOp : uint8_t { Pred, Neg, And, DiaF, ExistsNe };

// Hash-consed like bimodal nodes: pointer equality is structural equality.
struct FNode {
  FOp op;
  uint32_t id;
  const FNode* a;
  const FNode* b;      // And right
  std::string name;    // Pred only
};

class FoltlFormula {
 public:
  FoltlFormula() : node_(nullptr) {}
  explicit FoltlFormula(const FNode* n) : node_(n) {}

  const FNode* node() const { return node_; }
  bool valid() const { return node_ != nullptr; }
  FOp op() const { return node_->op; }
  uint32_t id() const { return node_->id; }

  bool operator==(const FoltlFormula& o) const { return node_ == o.node_; }
  bool operator!=(const FoltlFormula& o) const { return node_ != o.node_; }

 private:
  const FNode* node_;
};

FoltlFormula fpred(const std::string& name);
FoltlFormula fneg(FoltlFormula f);
FoltlFormula fand(FoltlFormula a, FoltlFormula b);
FoltlFormula fdia(FoltlFormula f);        // F> f
FoltlFormula fexists_ne(FoltlFormula f);  // E!= x f

// Derived forms, desugared with exactly the same shapes as their bimodal
// counterparts (including the double negation inside the box), so that the
// star translation carries sugar to sugar node-for-node.
FoltlFormula fdisj(FoltlFormula a, FoltlFormula b);
FoltlFormula fimpl(FoltlFormula a, FoltlFormula b);
FoltlFormula fiff(FoltlFormula a, FoltlFormula b);
FoltlFormula fbox(FoltlFormula f);         // [F] f
FoltlFormula fexists(FoltlFormula f);      // E x f   = f | E!= x f
FoltlFormula fexists_ge2(FoltlFormula f);  // E>=2 x f = E x (f & E!= x f)
FoltlFormula fexists_eq1(FoltlFormula f);  // E=1 x f, mirror of <1>=1

// Concrete syntax: the boolean layer of the bimodal grammar plus `F>`,
// `[F]`, `E!= x`, `E x`, `E>=2 x`, `E=1 x`, and atoms written `P(x)`. The
// one object variable is spelled x; E and F> are effectively reserved words.
FoltlFormula parse_foltl(const std::string& text);
std::string print_foltl(FoltlFormula f);

enum class DomainMode : uint8_t { Constant, Decreasing, Expanding, Free };

// A finite model: instants 0 < 1 < ... < T-1 (the timeline frame is kept in
// this canonical presentation), a non-empty domain per instant over shared
// element ids, and per-instant monadic interpretations within the domain.
struct FoltlModel {
  Frame timeline;
  std::vector<std::vector<std::string>> domains;  // sorted, per instant
  std::map<std::string, std::vector<std::vector<std::string>>> interp;
  DomainMode mode = DomainMode::Constant;

  size_t instants() const { return timeline.size(); }
};

bool operator==(const FoltlModel& a, const FoltlModel& b);

// Structural soundness: canonical linear timeline, sorted non-empty
// domains, interpretations inside the domains, and the inclusion pattern
// the mode tag promises. Throws Error.
void validate(const FoltlModel& m);

// The inductive truth relation at instant t, element a. The future diamond
// only steps to instants whose domain still/already contains a. Throws
// Error when a is not in the domain at t.
bool foltl_check(const FoltlModel& m, size_t t, const std::string& a, FoltlFormula f);

// P(x) -> P, F> -> <0>, E!= x -> <1>, booleans commute. Bijective on
// primitive trees; unstar rejects true/false, which have no preimage.
Formula star(FoltlFormula f);
FoltlFormula unstar(Formula f);

// The grid model over timeline x elements whose worlds are the pairs (t,a)
// with a in the domain at t; vertical relation is inequality within an
// instant. Mode must not be Free (no grid construction matches it).
Model dagger(const FoltlModel& m);

// Inverse on grid models carrying coordinates; undagger(dagger(m)) == m.
FoltlModel undagger(const Model& m);

}  // namespace bimodal
