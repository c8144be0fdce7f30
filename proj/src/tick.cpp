// Derived horizontal structure of tick-marked models and its validity checks.
#include "bimodal/tick.hpp"

#include "bimodal/check.hpp"
#include "bimodal/encode.hpp"
#include "bimodal/frames.hpp"

#include <string>
#include <vector>

namespace bimodal {

namespace {

std::vector<std::vector<bool>> edge_matrix(const Frame& f) {
  size_t n = f.names.size();
  std::vector<std::vector<bool>> e(n, std::vector<bool>(n, false));
  for (size_t x = 0; x < n; ++x)
    for (uint32_t y : f.succ[x]) e[x][y] = true;
  return e;
}

std::string col_name(const Model& m, uint32_t x) {
  return m.meta.horizontal.names[x];
}

}  // namespace

DerivedStructure derive_tick_structure(const Model& m, const std::string& tick_var) {
  if (!m.has_meta)
    throw Error("derive_tick_structure: model carries no grid coordinates");
  if (m.meta.tag == GridTag::Expanding)
    throw Error(
        "derive_tick_structure: domains must not grow along the horizontal "
        "relation (product or decreasing grids only)");
  if (!m.root) throw Error("derive_tick_structure: model has no root");

  Formula t = var(tick_var);
  Formula alternation = box_plus(
      1, box_plus(0, impl(disj(t, dia(1, t)), conj(t, box(1, t)))));
  Checker checker(m);
  if (!checker.holds(*m.root, alternation))
    throw Error("derive_tick_structure: the tick alternation formula fails at "
                "the root");

  uint32_t H = static_cast<uint32_t>(m.meta.horizontal.names.size());
  uint32_t V = static_cast<uint32_t>(m.meta.vnames.size());
  auto edge = edge_matrix(m.meta.horizontal);
  Bits ticks = m.val(tick_var);
  auto tick_at = [&](uint32_t x, uint32_t u) {
    int w = m.meta.at(x, u);
    return w >= 0 && ticks.get(static_cast<uint32_t>(w));
  };

  // flip[x][z]: z's whole domain disagrees with x about the tick parity.
  std::vector<std::vector<bool>> flip(H, std::vector<bool>(H, false));
  for (uint32_t x = 0; x < H; ++x)
    for (uint32_t z = 0; z < H; ++z) {
      if (!edge[x][z]) continue;
      bool all = true;
      for (uint32_t u = 0; u < V && all; ++u) {
        if (m.meta.at(z, u) < 0) continue;
        if (tick_at(x, u) == tick_at(z, u)) all = false;
      }
      flip[x][z] = all;
    }

  DerivedStructure d;
  d.columns = H;
  d.reach.assign(H, std::vector<bool>(H, false));
  for (uint32_t x = 0; x < H; ++x)
    for (uint32_t z = 0; z < H; ++z) {
      if (!flip[x][z]) continue;
      d.reach[x][z] = true;
      for (uint32_t y = 0; y < H; ++y)
        if (edge[z][y]) d.reach[x][y] = true;
    }

  d.same.assign(H, std::vector<bool>(H, false));
  for (uint32_t y = 0; y < H; ++y)
    for (uint32_t z = 0; z < H; ++z)
      d.same[y][z] = y == z || (edge[y][z] && !d.reach[y][z]) ||
                     (edge[z][y] && !d.reach[z][y]);

  for (uint32_t x = 0; x < H; ++x)
    for (uint32_t y = 0; y < H; ++y)
      for (uint32_t z = 0; z < H; ++z) {
        if (d.reach[x][y] && d.reach[y][z] && !d.reach[x][z])
          throw Error("derive_tick_structure: derived relation is not "
                      "transitive at columns " + col_name(m, x) + " -> " +
                      col_name(m, y) + " -> " + col_name(m, z));
        if (d.same[x][y] && d.same[y][z] && !d.same[x][z])
          throw Error("derive_tick_structure: same-interval relation is not "
                      "transitive at columns " + col_name(m, x) + " ~ " +
                      col_name(m, y) + " ~ " + col_name(m, z));
        if (d.same[y][z] && d.reach[x][y] && !d.reach[x][z])
          throw Error("derive_tick_structure: reachability does not respect "
                      "intervals from column " + col_name(m, x) + " into " +
                      col_name(m, y) + " ~ " + col_name(m, z));
        if (d.same[y][z] && d.reach[y][x] && !d.reach[z][x])
          throw Error("derive_tick_structure: reachability does not respect "
                      "intervals out of " + col_name(m, y) + " ~ " +
                      col_name(m, z) + " toward " + col_name(m, x));
        if (d.reach[x][y] && d.reach[x][z] && !d.same[y][z] &&
            !d.reach[y][z] && !d.reach[z][y])
          throw Error("derive_tick_structure: derived successors " +
                      col_name(m, y) + " and " + col_name(m, z) +
                      " of column " + col_name(m, x) +
                      " are neither comparable nor interval-mates");
      }

  d.interval.assign(H, 0);
  std::vector<bool> placed(H, false);
  for (uint32_t x = 0; x < H; ++x) {
    if (placed[x]) continue;
    std::vector<uint32_t> cls;
    for (uint32_t y = x; y < H; ++y)
      if (d.same[x][y]) {
        cls.push_back(y);
        placed[y] = true;
        d.interval[y] = static_cast<uint32_t>(d.classes.size());
      }
    d.classes.push_back(std::move(cls));
  }

  for (const auto& [name, bits] : m.valuation) {
    (void)bits;
    if (!bullet_agrees(m, d, var(name), tick_var))
      throw Error("derive_tick_structure: the interval diamond disagrees with "
                  "the derived relation on variable '" + name + "'");
  }
  return d;
}

bool bullet_agrees(const Model& m, const DerivedStructure& d, Formula psi,
                   const std::string& tick_var) {
  if (!m.has_meta) throw Error("bullet_agrees: model carries no grid coordinates");
  Checker checker(m);
  Bits truths = checker.states(psi);
  Bits diamond = checker.states(dia_bullet(tick_var, psi));
  for (uint32_t w = 0; w < m.frame.size(); ++w) {
    auto [x, u] = m.meta.coord[w];
    bool reached = false;
    for (uint32_t y = 0; y < d.columns && !reached; ++y) {
      if (!d.reach[x][y]) continue;
      int t = m.meta.at(y, u);
      if (t >= 0 && truths.get(static_cast<uint32_t>(t))) reached = true;
    }
    if (diamond.get(w) != reached) return false;
  }
  return true;
}

std::vector<std::string> interval_claim_violations(const Model& m,
                                                   const DerivedStructure& d,
                                                   const std::string& p) {
  if (!m.has_meta)
    throw Error("interval_claim_violations: model carries no grid coordinates");
  std::vector<std::string> out;
  Bits truths = m.val(p);
  for (uint32_t w = 0; w < m.frame.size(); ++w) {
    if (!truths.get(w)) continue;
    auto [x, u] = m.meta.coord[w];
    for (uint32_t z : d.classes[d.interval[x]]) {
      int t = m.meta.at(z, u);
      if (t < 0 || truths.get(static_cast<uint32_t>(t))) continue;
      out.push_back("'" + p + "' holds at (" + col_name(m, x) + "," +
                    std::to_string(u) + ") but not at (" + col_name(m, z) +
                    "," + std::to_string(u) + ")");
    }
  }
  return out;
}

}  // namespace bimodal
