// Closure saturation and carrier restriction for the finite-vertical shrink.
#include "bimodal/fmp.hpp"

#include "bimodal/check.hpp"
#include "bimodal/frames.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace bimodal {

namespace {

void require_meta(const Model& m, const char* who) {
  if (!m.has_meta)
    throw Error(std::string(who) + ": model carries no grid coordinates");
}

// Verticals present in column n, ascending.
std::vector<uint32_t> column_verticals(const Model& m, uint32_t n) {
  std::vector<uint32_t> out;
  for (uint32_t v = 0; v < m.meta.vnames.size(); ++v)
    if (m.meta.at(n, v) >= 0) out.push_back(v);
  return out;
}

// A witness demand is only meaningful when any two distinct points of the
// column see each other vertically; anything else could leave a demand
// without a satisfiable witness.
void require_difference_column(const Model& m, uint32_t n,
                               const std::vector<uint32_t>& present) {
  for (uint32_t u : present)
    for (uint32_t v : present) {
      uint32_t wu = uint32_t(m.meta.at(n, u));
      uint32_t wv = uint32_t(m.meta.at(n, v));
      bool want = u != v;
      if (m.frame.edge1(wu, wv) != want)
        throw Error("closure_step: the vertical relation on column " +
                    m.meta.horizontal.names[n] +
                    " is not a difference relation");
    }
}

// Keeps, per column, the listed verticals; worlds stay in their original
// order, vertical names survive, and the grid bookkeeping is rebuilt.
Model restrict_grid(const Model& m,
                    const std::vector<std::vector<uint32_t>>& keep) {
  uint32_t H = uint32_t(m.meta.horizontal.names.size());
  uint32_t V = uint32_t(m.meta.vnames.size());
  std::vector<std::vector<char>> kept(H, std::vector<char>(V, 0));
  std::vector<char> v_used(V, 0);
  for (uint32_t h = 0; h < H; ++h)
    for (uint32_t v : keep[h]) {
      kept[h][v] = 1;
      v_used[v] = 1;
    }

  std::vector<int> vmap(V, -1);
  Model out;
  out.has_meta = true;
  out.meta.tag = m.meta.tag;
  out.meta.horizontal = m.meta.horizontal;
  for (uint32_t v = 0; v < V; ++v)
    if (v_used[v]) {
      vmap[v] = int(out.meta.vnames.size());
      out.meta.vnames.push_back(m.meta.vnames[v]);
    }

  std::vector<int> wmap(m.frame.size(), -1);
  for (uint32_t w = 0; w < m.frame.size(); ++w) {
    auto [h, v] = m.meta.coord[w];
    if (!kept[h][v]) continue;
    wmap[w] = int(out.frame.names.size());
    out.frame.names.push_back(m.frame.names[w]);
    out.meta.coord.emplace_back(h, uint32_t(vmap[v]));
  }
  out.meta.columns.assign(H, {});
  for (uint32_t nw = 0; nw < out.frame.names.size(); ++nw)
    out.meta.columns[out.meta.coord[nw].first].push_back(nw);

  out.frame.succ0.assign(out.frame.names.size(), {});
  out.frame.succ1.assign(out.frame.names.size(), {});
  for (uint32_t w = 0; w < m.frame.size(); ++w) {
    if (wmap[w] < 0) continue;
    for (uint32_t y : m.frame.succ0[w])
      if (wmap[y] >= 0) out.frame.succ0[wmap[w]].push_back(uint32_t(wmap[y]));
    for (uint32_t y : m.frame.succ1[w])
      if (wmap[y] >= 0) out.frame.succ1[wmap[w]].push_back(uint32_t(wmap[y]));
  }

  for (const auto& [name, bits] : m.valuation) {
    std::vector<uint32_t> worlds;
    for (uint32_t w = 0; w < m.frame.size(); ++w)
      if (bits.get(w) && wmap[w] >= 0) worlds.push_back(uint32_t(wmap[w]));
    out.set_val(name, worlds);
  }
  if (m.root && wmap[*m.root] >= 0) out.root = uint32_t(wmap[*m.root]);
  return out;
}

}  // namespace

uint32_t ClosureTrace::bound(uint32_t x_size) const {
  return x_size + 2 * uint32_t(subformulas.size());
}

std::string ClosureTrace::dump() const {
  std::ostringstream os;
  os << "subformulas (" << subformulas.size() << "):\n";
  for (Formula f : subformulas) os << "  " << print(f) << "\n";
  for (size_t t = 0; t < sets.size(); ++t) {
    os << "instant " << t << ": " << steps[t].first << " -> "
       << steps[t].second << " verticals (cap " << bound(steps[t].first)
       << "):";
    for (uint32_t v : sets[t]) os << " " << v;
    os << "\n";
  }
  return os.str();
}

std::vector<uint32_t> closure_step(const Model& m, uint32_t n,
                                   const std::vector<uint32_t>& X,
                                   Formula phi) {
  require_meta(m, "closure_step");
  if (!phi.valid()) throw Error("closure_step: empty formula");
  if (n >= m.meta.horizontal.names.size())
    throw Error("closure_step: column index out of range");

  std::vector<uint32_t> present = column_verticals(m, n);
  require_difference_column(m, n, present);

  std::set<uint32_t> Y;
  for (uint32_t x : X) {
    if (m.meta.at(n, x) < 0)
      throw Error("closure_step: vertical " + std::to_string(x) +
                  " is absent from column " + m.meta.horizontal.names[n]);
    Y.insert(x);
  }
  size_t start = Y.size();

  // One demand per subformula sitting under a difference diamond; its
  // satisfying verticals on this column, ascending.
  std::vector<const Node*> subs = subformulas(phi);
  Checker checker(m);
  std::vector<std::vector<uint32_t>> sat;
  for (const Node* s : subs) {
    if (s->op != Op::Dia || s->modality != 1) continue;
    Bits truths = checker.states(Formula(s->a));
    std::vector<uint32_t> where;
    for (uint32_t v : present)
      if (truths.get(uint32_t(m.meta.at(n, v)))) where.push_back(v);
    sat.push_back(std::move(where));
  }

  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<uint32_t> snapshot(Y.begin(), Y.end());
    for (const auto& S : sat) {
      if (S.empty()) continue;
      for (uint32_t x : snapshot) {
        if (S.size() == 1 && S[0] == x) continue;  // no demand at x
        bool satisfied = false;
        for (uint32_t y : S)
          if (y != x && Y.count(y)) {
            satisfied = true;
            break;
          }
        if (satisfied) continue;
        for (uint32_t y : S)
          if (y != x) {
            Y.insert(y);
            changed = true;
            break;
          }
      }
    }
  }

  if (Y.size() > start + 2 * subs.size())
    throw Error("closure_step: growth bound exceeded");
  return std::vector<uint32_t>(Y.begin(), Y.end());
}

Model shrink(const Model& m, Formula phi, uint32_t root, ClosureTrace* trace) {
  require_meta(m, "shrink");
  if (!phi.valid()) throw Error("shrink: empty formula");
  if (root >= m.frame.size()) throw Error("shrink: root out of range");
  if (m.meta.tag == GridTag::Decreasing)
    throw Error("shrink: decreasing carriers are not covered (product or "
                "expanding grids only)");
  const Frame& hor = m.meta.horizontal;
  if (!check_property(hor, FrameProp::LinearOrder))
    throw Error("shrink: the horizontal frame must be a strict linear order");

  // Instants in temporal order: in a strict linear order the out-degrees
  // are all distinct and decrease along the order.
  uint32_t H = uint32_t(hor.names.size());
  std::vector<uint32_t> order(H);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    return hor.succ[a].size() > hor.succ[b].size();
  });

  auto [rh, rv] = m.meta.coord[root];
  (void)rh;
  if (m.meta.tag == GridTag::Expanding && rh != order[0])
    throw Error("shrink: expanding carriers need the root on the first "
                "instant");

  ClosureTrace tr;
  for (const Node* s : subformulas(phi)) tr.subformulas.push_back(Formula(s));

  std::vector<uint32_t> cur = {rv};
  for (uint32_t t = 0; t < H; ++t) {
    uint32_t before = uint32_t(cur.size());
    cur = closure_step(m, order[t], cur, phi);
    if (cur.size() > tr.bound(before))
      throw Error("shrink: per-step growth bound exceeded");
    tr.sets.push_back(cur);
    tr.steps.emplace_back(before, uint32_t(cur.size()));
  }
  if (tr.sets.back().size() > 1 + 2ull * H * tr.subformulas.size())
    throw Error("shrink: final carrier size bound exceeded");

  std::vector<std::vector<uint32_t>> keep(H);
  for (uint32_t t = 0; t < H; ++t)
    keep[order[t]] = m.meta.tag == GridTag::Product ? tr.sets.back() : tr.sets[t];
  Model out = restrict_grid(m, keep);
  int new_root = out.frame.index_of(m.frame.names[root]);
  if (new_root < 0)
    throw Error("shrink: the root did not survive the restriction");
  out.root = uint32_t(new_root);

  // Re-check every subformula at every surviving point against the host.
  Checker before(m);
  Checker after(out);
  std::vector<int> back(out.frame.size(), -1);
  for (uint32_t w = 0; w < m.frame.size(); ++w) {
    int nw = out.frame.index_of(m.frame.names[w]);
    if (nw >= 0) back[nw] = int(w);
  }
  for (Formula f : tr.subformulas) {
    Bits was = before.states(f);
    Bits now = after.states(f);
    for (uint32_t nw = 0; nw < out.frame.size(); ++nw)
      if (back[nw] < 0 || was.get(uint32_t(back[nw])) != now.get(nw))
        throw Error("shrink: truth of " + print(f) +
                    " not preserved at world " + out.frame.names[nw]);
  }

  if (trace) *trace = std::move(tr);
  return out;
}

}  // namespace bimodal
