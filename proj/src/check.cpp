#include "bimodal/check.hpp"

#include <set>
#include <string>

namespace bimodal {

Checker::Checker(const Model& m) : m_(&m) {
  size_t n = m.frame.size();
  succ0_.assign(n, Bits(n));
  succ1_.assign(n, Bits(n));
  for (uint32_t w = 0; w < n; ++w) {
    for (uint32_t u : m.frame.succ0[w]) succ0_[w].set(u);
    for (uint32_t u : m.frame.succ1[w]) succ1_[w].set(u);
  }
}

const Bits& Checker::states(Formula f) {
  if (!f.valid()) throw Error("check: empty formula");
  auto hit = memo_.find(f.id());
  if (hit != memo_.end()) return hit->second;

  size_t n = m_->frame.size();
  for (const Node* nd : subformulas(f)) {
    if (memo_.count(nd->id)) continue;
    Bits out(n);
    switch (nd->op) {
      case Op::Var: {
        auto it = m_->valuation.find(nd->name);
        if (it != m_->valuation.end()) {
          if (it->second.size() != n)
            throw Error("check: valuation of " + nd->name + " sized for a different frame");
          out = it->second;
        }
        break;
      }
      case Op::Top:
        out.flip_all();
        break;
      case Op::Bot:
        break;
      case Op::Neg:
        out = memo_.at(nd->a->id);
        out.flip_all();
        break;
      case Op::And:
        out = memo_.at(nd->a->id);
        out &= memo_.at(nd->b->id);
        break;
      case Op::Dia: {
        const Bits& child = memo_.at(nd->a->id);
        const std::vector<Bits>& rows = nd->modality == 0 ? succ0_ : succ1_;
        for (uint32_t w = 0; w < n; ++w)
          if (rows[w].intersects(child)) out.set(w);
        break;
      }
    }
    memo_.emplace(nd->id, std::move(out));
  }
  return memo_.at(f.id());
}

bool Checker::holds(uint32_t w, Formula f) {
  if (w >= m_->frame.size()) throw Error("check: unknown world index");
  return states(f).get(w);
}

bool check(const Model& m, uint32_t w, Formula f) {
  Checker c(m);
  return c.holds(w, f);
}

std::optional<uint32_t> satisfiable_in(const Model& m, Formula f) {
  Checker c(m);
  int w = c.states(f).first_set();
  if (w < 0) return std::nullopt;
  return uint32_t(w);
}

bool valid_in_frame(const TwoFrame& tf, Formula f, uint64_t max_assignments) {
  if (!f.valid()) throw Error("check: empty formula");
  size_t n = tf.size();
  std::vector<std::string> vs = vars(f);
  size_t bits = n * vs.size();
  if (bits >= 64 || (uint64_t(1) << bits) > max_assignments)
    throw BudgetError("valid_in_frame: 2^(" + std::to_string(n) + " worlds * " +
                      std::to_string(vs.size()) + " vars) valuations exceed budget");
  uint64_t total = uint64_t(1) << bits;

  std::vector<const Node*> order = subformulas(f);
  std::unordered_map<uint32_t, size_t> slot;
  slot.reserve(order.size() * 2);
  for (size_t i = 0; i < order.size(); ++i) slot.emplace(order[i]->id, i);
  std::unordered_map<std::string, size_t> vslot;
  for (size_t i = 0; i < vs.size(); ++i) vslot.emplace(vs[i], i);

  std::vector<Bits> succ[2];
  for (int i : {0, 1}) {
    succ[i].assign(n, Bits(n));
    for (uint32_t w = 0; w < n; ++w)
      for (uint32_t u : (i == 0 ? tf.succ0 : tf.succ1)[w]) succ[i][w].set(u);
  }

  Bits ones(n);
  ones.flip_all();
  std::vector<Bits> val(vs.size(), Bits(n));
  std::vector<Bits> st(order.size(), Bits(n));
  size_t root = slot.at(f.id());

  for (uint64_t a = 0;; ++a) {
    for (size_t k = 0; k < vs.size(); ++k) {
      val[k].clear();
      for (size_t w = 0; w < n; ++w)
        if ((a >> (k * n + w)) & 1) val[k].set(w);
    }
    for (size_t i = 0; i < order.size(); ++i) {
      const Node* nd = order[i];
      Bits& out = st[i];
      switch (nd->op) {
        case Op::Var:
          out = val[vslot.at(nd->name)];
          break;
        case Op::Top:
          out.clear();
          out.flip_all();
          break;
        case Op::Bot:
          out.clear();
          break;
        case Op::Neg:
          out = st[slot.at(nd->a->id)];
          out.flip_all();
          break;
        case Op::And:
          out = st[slot.at(nd->a->id)];
          out &= st[slot.at(nd->b->id)];
          break;
        case Op::Dia: {
          const Bits& child = st[slot.at(nd->a->id)];
          const std::vector<Bits>& rows = succ[nd->modality];
          out.clear();
          for (uint32_t w = 0; w < n; ++w)
            if (rows[w].intersects(child)) out.set(w);
          break;
        }
      }
    }
    if (st[root] != ones) return false;
    if (a + 1 == total) break;
  }
  return true;
}

namespace {

// Invariant: nd fails at w.
void collect_failures(Checker& c, uint32_t w, const Node* nd, std::set<uint32_t>& out) {
  if (nd->op == Op::And) {
    bool split = false;
    for (const Node* ch : {nd->a, nd->b}) {
      if (!c.holds(w, Formula(ch))) {
        split = true;
        collect_failures(c, w, ch, out);
      }
    }
    if (!split) out.insert(w);
    return;
  }
  if (nd->op == Op::Neg && nd->a->op == Op::Dia && nd->a->a->op == Op::Neg) {
    // [i]body in primitive form; chase the successors violating body.
    const Node* body = nd->a->a->a;
    int i = nd->a->modality;
    const Bits& succ = c.successors(i, w);
    bool chased = false;
    for (uint32_t u = 0; u < succ.size(); ++u) {
      if (!succ.get(u)) continue;
      if (!c.holds(u, Formula(body))) {
        chased = true;
        collect_failures(c, u, body, out);
      }
    }
    if (!chased) out.insert(w);
    return;
  }
  out.insert(w);
}

}  // namespace

std::vector<uint32_t> failure_points(Checker& c, uint32_t w, Formula f) {
  if (c.holds(w, f)) return {};
  std::set<uint32_t> out;
  collect_failures(c, w, f.node(), out);
  return std::vector<uint32_t>(out.begin(), out.end());
}

}  // namespace bimodal
