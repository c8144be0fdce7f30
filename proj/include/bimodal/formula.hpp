// Propositional bimodal formulas over two diamonds <0>, <1>.
//
// Formulas are hash-consed: each structurally distinct formula exists once,
// so pointer equality is structural equality and per-node memo tables can be
// indexed by node id. Derived connectives (|, ->, <->, boxes, the +-closures,
// the "exactly one 1-successor" diamond and the grid step operator X) are
// rewritten into the primitive basis {var, true, false, ~, &, <0>, <1>} at
// construction time; the printer re-sugars [i], | and -> where the primitive
// tree matches, which keeps prints readable and still round-trips node-exact.

#ifndef BIMODAL_FORMULA_HPP
#define BIMODAL_FORMULA_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bimodal {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : Error {
  using Error::Error;
};
struct BudgetError : Error {
  using Error::Error;
};

enum class Op : uint8_t { Var, Top, Bot, Neg, And, Dia };

struct Node {
  Op op;
  uint8_t modality;   // 0 or 1, Dia only
  uint32_t id;        // dense, allocation order
  uint32_t depth;     // modal depth
  const Node* a;      // Neg/Dia child, And left
  const Node* b;      // And right
  std::string name;   // Var only
};

class Formula {
public:
  Formula() : node_(nullptr) {}
  explicit Formula(const Node* n) : node_(n) {}

  const Node* node() const { return node_; }
  bool valid() const { return node_ != nullptr; }
  Op op() const { return node_->op; }
  uint32_t id() const { return node_->id; }

  bool operator==(const Formula& o) const { return node_ == o.node_; }
  bool operator!=(const Formula& o) const { return node_ != o.node_; }

private:
  const Node* node_;
};

// Primitive constructors (interning).
Formula var(const std::string& name);
Formula top();
Formula bot();
Formula neg(Formula f);
Formula conj(Formula a, Formula b);
Formula dia(int i, Formula f);

// Derived connectives, desugared eagerly.
Formula disj(Formula a, Formula b);          // ~(~a & ~b)
Formula impl(Formula a, Formula b);          // ~(a & ~b)
Formula iff(Formula a, Formula b);           // (a -> b) & (b -> a)
Formula box(int i, Formula f);               // ~<i>~f
Formula dia_plus(int i, Formula f);          // f | <i>f
Formula box_plus(int i, Formula f);          // f & [i]f
Formula dia_eq1(Formula f);                  // <1>+(f & [1]~f)
Formula box_upto(int i, int n, Formula f);   // f & [i]f & ... & [i]^n f

// Folds; empty input yields true (for conj_all) / false (for disj_all).
Formula conj_all(const std::vector<Formula>& fs);
Formula disj_all(const std::vector<Formula>& fs);

// Grid step operator: [1](n -> [0](s -> f)).
Formula next_around(Formula f, Formula s, Formula n);

inline Formula operator!(Formula f) { return neg(f); }
inline Formula operator&&(Formula a, Formula b) { return conj(a, b); }
inline Formula operator||(Formula a, Formula b) { return disj(a, b); }

uint32_t modal_depth(Formula f);

// Distinct variable names, sorted.
std::vector<std::string> vars(Formula f);

// Distinct subformula nodes of the primitive tree, children before parents.
std::vector<const Node*> subformulas(Formula f);

// Concrete syntax. Ops by loosening precedence: ~ <0> [0] <1> [1] (and the
// sugared forms <i>+ [i]+ <1>=1 X), then &, |, -> (right assoc), <->.
// Identifiers match [A-Za-z@_][A-Za-z0-9@_']*; "true"/"false"/"X" reserved.
// '#' comments to end of line.
Formula parse(const std::string& text);
std::string print(Formula f);

// Role -> variable-name map threaded through compilation, so tests and
// decoders can find "the S variable" without hardcoding spellings.
class VarDictionary {
public:
  const std::string& define(const std::string& role, const std::string& name);
  const std::string& name_of(const std::string& role) const;
  bool has_role(const std::string& role) const;
  bool has_name(const std::string& name) const;
  Formula var_of(const std::string& role) const;  // var(name_of(role))
  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  std::string serialize() const;  // "role = name" per line
  static VarDictionary deserialize(const std::string& text);

private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace bimodal

#endif
