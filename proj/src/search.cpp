// Candidate frame enumeration and the three-valued valuation backtracker
// behind bounded_sat.
#include "bimodal/search.hpp"

#include "bimodal/frames.hpp"

#include <algorithm>
#include <chrono>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace bimodal {

namespace {

using Clock = std::chrono::steady_clock;

struct Budget {
  Clock::time_point start;
  uint64_t max_millis = 0;
  uint64_t candidates = 0;

  uint64_t elapsed() const {
    return uint64_t(std::chrono::duration_cast<std::chrono::milliseconds>(
                        Clock::now() - start)
                        .count());
  }
  void check_clock() const {
    if (max_millis && elapsed() > max_millis)
      throw BudgetError("bounded_sat: wall clock budget exceeded after " +
                        std::to_string(candidates) + " candidates");
  }
};

// One candidate frame of a grid class: column count (or chain depth), the
// shared vertical size, or the per-column domain sizes.
struct GridPlan {
  uint32_t h = 0;
  uint32_t v = 0;
  std::vector<uint32_t> ks;
  uint64_t worlds = 0;
};

void monotone_sequences(uint32_t len, uint32_t max_v, bool ascending,
                        std::vector<uint32_t>& cur,
                        std::vector<GridPlan>& out) {
  if (cur.size() == len) {
    GridPlan p;
    p.h = len;
    p.ks = cur;
    for (uint32_t k : cur) p.worlds += k;
    out.push_back(std::move(p));
    return;
  }
  for (uint32_t k = 1; k <= max_v; ++k) {
    if (!cur.empty()) {
      if (ascending && k < cur.back()) continue;
      if (!ascending && k > cur.back()) continue;
    }
    cur.push_back(k);
    monotone_sequences(len, max_v, ascending, cur, out);
    cur.pop_back();
  }
}

std::vector<GridPlan> grid_plans(const SearchSpec& spec) {
  std::vector<GridPlan> out;
  switch (spec.frame_class) {
    case FrameClass::Product:
      for (uint32_t h = 1; h <= spec.max_h; ++h)
        for (uint32_t v = 1; v <= spec.max_v; ++v)
          out.push_back({h, v, {}, uint64_t(h) * v});
      break;
    case FrameClass::OmegaChain:
      for (uint32_t k = 1; k <= spec.max_h; ++k)
        for (uint32_t v = 1; v <= spec.max_v; ++v)
          out.push_back({k, v, {}, uint64_t(k + 2) * v});
      break;
    case FrameClass::Expanding:
    case FrameClass::ExpandingLinear:
    case FrameClass::Decreasing: {
      bool asc = spec.frame_class != FrameClass::Decreasing;
      std::vector<uint32_t> cur;
      for (uint32_t h = 1; h <= spec.max_h; ++h)
        monotone_sequences(h, spec.max_v, asc, cur, out);
      break;
    }
    case FrameClass::Commuting:
      break;  // enumerated lazily, the mask space does not materialize
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const GridPlan& a, const GridPlan& b) {
                     if (a.worlds != b.worlds) return a.worlds < b.worlds;
                     if (a.h != b.h) return a.h < b.h;
                     if (a.v != b.v) return a.v < b.v;
                     return a.ks < b.ks;
                   });
  return out;
}

GridTwoFrame build_plan(const SearchSpec& spec, const GridPlan& p) {
  switch (spec.frame_class) {
    case FrameClass::Product:
      return product(make_linear(p.h), make_difference(p.v));
    case FrameClass::OmegaChain:
      return product(make_omega_plus_one_reversed(p.h), make_difference(p.v));
    case FrameClass::Expanding:
    case FrameClass::Decreasing: {
      std::vector<Frame> domains;
      for (uint32_t k : p.ks) domains.push_back(make_difference(k));
      GridTag tag = spec.frame_class == FrameClass::Expanding
                        ? GridTag::Expanding
                        : GridTag::Decreasing;
      return assemble(make_linear(p.h), domains, tag);
    }
    case FrameClass::ExpandingLinear: {
      std::vector<Frame> domains;
      for (uint32_t k : p.ks) domains.push_back(make_linear(k));
      return assemble(make_linear(p.h), domains, GridTag::Expanding);
    }
    case FrameClass::Commuting: break;
  }
  throw Error("bounded_sat: not a grid class");
}

TwoFrame frame_from_masks(uint32_t n, uint64_t r0, uint64_t r1) {
  TwoFrame tf;
  for (uint32_t w = 0; w < n; ++w) tf.names.push_back(std::to_string(w));
  tf.succ0.assign(n, {});
  tf.succ1.assign(n, {});
  for (uint32_t a = 0; a < n; ++a)
    for (uint32_t b = 0; b < n; ++b) {
      uint64_t bit = uint64_t(1) << (a * n + b);
      if (r0 & bit) tf.succ0[a].push_back(b);
      if (r1 & bit) tf.succ1[a].push_back(b);
    }
  return tf;
}

// Three-valued evaluation over a fixed frame: each (variable, world) bit is
// false, true, or unassigned; the evaluator reports, per world, the formula
// value and the least unassigned bit the value still depends on.
class TriSolver {
public:
  TriSolver(const TwoFrame& tf, Formula phi, Budget& budget)
      : tf_(tf), budget_(budget), W_(uint32_t(tf.size())) {
    nodes_ = subformulas(phi);
    std::unordered_map<const Node*, int> local;
    for (size_t i = 0; i < nodes_.size(); ++i) local[nodes_[i]] = int(i);
    kid_a_.assign(nodes_.size(), -1);
    kid_b_.assign(nodes_.size(), -1);
    var_of_.assign(nodes_.size(), -1);
    names_ = vars(phi);
    for (size_t i = 0; i < nodes_.size(); ++i) {
      const Node* n = nodes_[i];
      if (n->a) kid_a_[i] = local.at(n->a);
      if (n->b) kid_b_[i] = local.at(n->b);
      if (n->op == Op::Var)
        var_of_[i] = int(std::lower_bound(names_.begin(), names_.end(),
                                          n->name) -
                         names_.begin());
    }
    bits_.assign(names_.size() * size_t(W_), -1);
    val_.assign(nodes_.size() * size_t(W_), 0);
    hint_.assign(nodes_.size() * size_t(W_), -1);
  }

  // Least world where the formula is settled true under some completion of
  // the current bits; the found assignment stays in place.
  std::optional<uint32_t> solve() {
    budget_.check_clock();
    evaluate();
    size_t root = (nodes_.size() - 1) * W_;
    for (uint32_t w = 0; w < W_; ++w)
      if (val_[root + w] == 1) return w;
    int32_t pick = -1;
    for (uint32_t w = 0; w < W_; ++w)
      if (val_[root + w] == 2) {
        int32_t h = hint_[root + w];
        if (pick < 0 || h < pick) pick = h;
      }
    if (pick < 0) return std::nullopt;
    for (int8_t b = 0; b < 2; ++b) {
      bits_[pick] = b;
      if (auto w = solve()) return w;
    }
    bits_[pick] = -1;
    return std::nullopt;
  }

  // Valuation from the current bits, unassigned meaning false.
  void install(Model& m) const {
    for (size_t v = 0; v < names_.size(); ++v) {
      std::vector<uint32_t> worlds;
      for (uint32_t w = 0; w < W_; ++w)
        if (bits_[v * W_ + w] == 1) worlds.push_back(w);
      m.set_val(names_[v], worlds);
    }
  }

private:
  void evaluate() {
    for (size_t i = 0; i < nodes_.size(); ++i) {
      const Node* n = nodes_[i];
      for (uint32_t w = 0; w < W_; ++w) {
        int8_t v = 0;
        int32_t h = -1;
        switch (n->op) {
          case Op::Top: v = 1; break;
          case Op::Bot: v = 0; break;
          case Op::Var: {
            int32_t bit = int32_t(var_of_[i] * int(W_) + int(w));
            int8_t a = bits_[bit];
            if (a < 0) {
              v = 2;
              h = bit;
            } else {
              v = a;
            }
            break;
          }
          case Op::Neg: {
            size_t c = size_t(kid_a_[i]) * W_ + w;
            v = val_[c] == 2 ? 2 : int8_t(1 - val_[c]);
            h = hint_[c];
            break;
          }
          case Op::And: {
            size_t ca = size_t(kid_a_[i]) * W_ + w;
            size_t cb = size_t(kid_b_[i]) * W_ + w;
            if (val_[ca] == 0 || val_[cb] == 0) {
              v = 0;
            } else if (val_[ca] == 1 && val_[cb] == 1) {
              v = 1;
            } else {
              v = 2;
              if (val_[ca] == 2) h = hint_[ca];
              if (val_[cb] == 2 && (h < 0 || hint_[cb] < h)) h = hint_[cb];
            }
            break;
          }
          case Op::Dia: {
            const auto& succ = n->modality ? tf_.succ1[w] : tf_.succ0[w];
            size_t base = size_t(kid_a_[i]) * W_;
            v = 0;
            for (uint32_t s : succ) {
              if (val_[base + s] == 1) {
                v = 1;
                h = -1;
                break;
              }
              if (val_[base + s] == 2) {
                v = 2;
                if (h < 0 || hint_[base + s] < h) h = hint_[base + s];
              }
            }
            break;
          }
        }
        val_[i * W_ + w] = v;
        hint_[i * W_ + w] = h;
      }
    }
  }

  const TwoFrame& tf_;
  Budget& budget_;
  uint32_t W_;
  std::vector<const Node*> nodes_;
  std::vector<int> kid_a_, kid_b_, var_of_;
  std::vector<std::string> names_;
  std::vector<int8_t> bits_;
  std::vector<int8_t> val_;
  std::vector<int32_t> hint_;
};

}  // namespace

const char* frame_class_name(FrameClass c) {
  switch (c) {
    case FrameClass::Product: return "product";
    case FrameClass::Expanding: return "expanding";
    case FrameClass::Decreasing: return "decreasing";
    case FrameClass::ExpandingLinear: return "expanding-linear";
    case FrameClass::OmegaChain: return "omega-chain";
    case FrameClass::Commuting: return "commuting";
  }
  throw Error("frame_class_name: unknown class");
}

FrameClass frame_class_from_name(const std::string& name) {
  for (FrameClass c :
       {FrameClass::Product, FrameClass::Expanding, FrameClass::Decreasing,
        FrameClass::ExpandingLinear, FrameClass::OmegaChain,
        FrameClass::Commuting})
    if (name == frame_class_name(c)) return c;
  throw ParseError("unknown frame class '" + name + "'");
}

SearchResult bounded_sat(const SearchSpec& spec) {
  if (!spec.formula.valid()) throw Error("bounded_sat: empty formula");
  if (spec.max_h < 1 || spec.max_v < 1)
    throw Error("bounded_sat: bounds must be at least 1");
  if (spec.max_candidates < 1)
    throw Error("bounded_sat: candidate budget must be positive");

  Budget budget;
  budget.start = Clock::now();
  budget.max_millis = spec.max_millis;

  SearchResult res;
  auto bounds = [&] {
    std::ostringstream os;
    os << "class=" << frame_class_name(spec.frame_class)
       << " hmax=" << spec.max_h << " vmax=" << spec.max_v;
    return os.str();
  };

  auto attempt = [&](TwoFrame tf, const GridMeta* meta) -> bool {
    if (budget.candidates >= spec.max_candidates)
      throw BudgetError("bounded_sat: candidate budget exhausted after " +
                        std::to_string(budget.candidates) + " candidates (" +
                        bounds() + ")");
    ++budget.candidates;
    TriSolver solver(tf, spec.formula, budget);
    auto w = solver.solve();
    if (!w) return false;
    res.found = true;
    res.world = *w;
    res.model.frame = std::move(tf);
    if (meta) {
      res.model.has_meta = true;
      res.model.meta = *meta;
    }
    solver.install(res.model);
    res.model.root = *w;
    return true;
  };

  if (spec.frame_class == FrameClass::Commuting) {
    bool done = false;
    for (uint32_t n = 1; n <= spec.max_h && !done; ++n) {
      uint32_t cells = n * n;
      if (cells > 62)
        throw Error("bounded_sat: commuting class capped at 7 worlds");
      uint64_t limit = uint64_t(1) << cells;
      for (uint64_t r0 = 0; r0 < limit && !done; ++r0) {
        budget.check_clock();
        for (uint64_t r1 = 0; r1 < limit && !done; ++r1) {
          TwoFrame tf = frame_from_masks(n, r0, r1);
          if (!check_property(tf, FrameProp::Commute) ||
              !check_property(tf, FrameProp::Confluent))
            continue;
          done = attempt(std::move(tf), nullptr);
        }
      }
    }
  } else {
    for (const GridPlan& p : grid_plans(spec)) {
      GridTwoFrame g = build_plan(spec, p);
      if (attempt(std::move(g.tf), &g.meta)) break;
    }
  }

  res.candidates = budget.candidates;
  res.millis = budget.elapsed();
  std::ostringstream os;
  if (res.found)
    os << "model found: " << bounds() << " worlds=" << res.model.frame.size()
       << " witness=" << res.model.frame.names[res.world]
       << " candidates=" << res.candidates;
  else
    os << "no model within bounds: " << bounds()
       << " candidates=" << res.candidates;
  res.report = os.str();
  return res;
}

}  // namespace bimodal
