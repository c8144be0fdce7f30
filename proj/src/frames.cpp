// Frame constructions, property decision procedures, and frame text IO.
#include "bimodal/frames.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace bimodal {

bool Bits::any() const {
  for (uint64_t x : w_)
    if (x) return true;
  return false;
}

size_t Bits::count() const {
  size_t c = 0;
  for (uint64_t x : w_) c += size_t(__builtin_popcountll(x));
  return c;
}

int Bits::first_set() const {
  for (size_t i = 0; i < w_.size(); ++i)
    if (w_[i]) return int(i * 64 + size_t(__builtin_ctzll(w_[i])));
  return -1;
}

bool Bits::subset_of(const Bits& o) const {
  for (size_t i = 0; i < w_.size(); ++i)
    if (w_[i] & ~o.w_[i]) return false;
  return true;
}

bool Bits::intersects(const Bits& o) const {
  for (size_t i = 0; i < w_.size(); ++i)
    if (w_[i] & o.w_[i]) return true;
  return false;
}

Bits& Bits::operator&=(const Bits& o) {
  for (size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
  return *this;
}

Bits& Bits::operator|=(const Bits& o) {
  for (size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
  return *this;
}

void Bits::flip_all() {
  for (uint64_t& x : w_) x = ~x;
  if (n_ & 63) w_.back() &= (uint64_t(1) << (n_ & 63)) - 1;
}

namespace {

bool sorted_contains(const std::vector<uint32_t>& v, uint32_t x) {
  return std::binary_search(v.begin(), v.end(), x);
}

int name_index(const std::vector<std::string>& names, const std::string& s) {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == s) return int(i);
  return -1;
}

}  // namespace

bool Frame::edge(uint32_t a, uint32_t b) const { return sorted_contains(succ[a], b); }
int Frame::index_of(const std::string& name) const { return name_index(names, name); }

bool TwoFrame::edge0(uint32_t a, uint32_t b) const { return sorted_contains(succ0[a], b); }
bool TwoFrame::edge1(uint32_t a, uint32_t b) const { return sorted_contains(succ1[a], b); }
int TwoFrame::index_of(const std::string& name) const { return name_index(names, name); }

Frame make_linear(size_t n) {
  if (n == 0) throw Error("make_linear: need at least one world");
  Frame f;
  for (size_t i = 0; i < n; ++i) {
    f.names.push_back(std::to_string(i));
    std::vector<uint32_t> s;
    for (size_t j = i + 1; j < n; ++j) s.push_back(uint32_t(j));
    f.succ.push_back(std::move(s));
  }
  return f;
}

Frame make_difference(size_t n) {
  if (n == 0) throw Error("make_difference: need at least one world");
  Frame f;
  for (size_t i = 0; i < n; ++i) {
    f.names.push_back(std::to_string(i));
    std::vector<uint32_t> s;
    for (size_t j = 0; j < n; ++j)
      if (j != i) s.push_back(uint32_t(j));
    f.succ.push_back(std::move(s));
  }
  return f;
}

Frame make_omega_plus_one_reversed(size_t K) {
  if (K == 0) throw Error("make_omega_plus_one_reversed: need K >= 1");
  Frame f;
  f.names.push_back("top");
  for (size_t j = 0; j <= K; ++j) f.names.push_back(std::to_string(j));
  // top sees every finite point; finite j sees every j' < j.
  std::vector<uint32_t> all;
  for (size_t j = 0; j <= K; ++j) all.push_back(uint32_t(j + 1));
  f.succ.push_back(all);
  for (size_t j = 0; j <= K; ++j) {
    std::vector<uint32_t> s;
    for (size_t j2 = 0; j2 < j; ++j2) s.push_back(uint32_t(j2 + 1));
    f.succ.push_back(std::move(s));
  }
  return f;
}

int GridMeta::at(uint32_t h, uint32_t v) const {
  for (uint32_t w : columns[h])
    if (coord[w].second == v) return int(w);
  return -1;
}

GridTwoFrame product(const Frame& f0, const Frame& f1) {
  std::vector<Frame> domains(f0.size(), f1);
  GridTwoFrame g = assemble(f0, domains, GridTag::Product);
  return g;
}

GridTwoFrame assemble(const Frame& f, const std::vector<Frame>& domains, GridTag mode) {
  if (domains.size() != f.size())
    throw Error("assemble: need one domain frame per horizontal world");

  // Check the nesting condition along every horizontal edge, as carriers
  // and as relations.
  auto carrier_rel_included = [&](const Frame& a, const Frame& b) {
    for (size_t i = 0; i < a.size(); ++i) {
      int j = b.index_of(a.names[i]);
      if (j < 0) return false;
      for (uint32_t t : a.succ[i]) {
        int jt = b.index_of(a.names[t]);
        if (jt < 0 || !b.edge(uint32_t(j), uint32_t(jt))) return false;
      }
    }
    return true;
  };
  for (size_t x = 0; x < f.size(); ++x)
    for (uint32_t y : f.succ[x]) {
      bool ok = true;
      switch (mode) {
        case GridTag::Product:
          ok = carrier_rel_included(domains[x], domains[y]) &&
               carrier_rel_included(domains[y], domains[x]);
          break;
        case GridTag::Expanding:
          ok = carrier_rel_included(domains[x], domains[y]);
          break;
        case GridTag::Decreasing:
          ok = carrier_rel_included(domains[y], domains[x]);
          break;
      }
      if (!ok)
        throw Error("assemble: domain nesting violated between " + f.names[x] + " and " +
                    f.names[y]);
    }

  GridTwoFrame g;
  g.meta.tag = mode;
  g.meta.horizontal = f;

  // Global vertical name table, first appearance wins.
  for (const Frame& d : domains)
    for (const std::string& vn : d.names)
      if (name_index(g.meta.vnames, vn) < 0) g.meta.vnames.push_back(vn);

  g.meta.columns.resize(f.size());
  for (size_t h = 0; h < f.size(); ++h)
    for (size_t dv = 0; dv < domains[h].size(); ++dv) {
      uint32_t w = uint32_t(g.tf.names.size());
      g.tf.names.push_back(f.names[h] + ":" + domains[h].names[dv]);
      g.meta.coord.emplace_back(uint32_t(h), uint32_t(name_index(g.meta.vnames, domains[h].names[dv])));
      g.meta.columns[h].push_back(w);
    }

  g.tf.succ0.resize(g.tf.size());
  g.tf.succ1.resize(g.tf.size());
  for (size_t h = 0; h < f.size(); ++h) {
    for (uint32_t w : g.meta.columns[h]) {
      uint32_t v = g.meta.coord[w].second;
      for (uint32_t h2 : f.succ[h]) {
        int w2 = g.meta.at(h2, v);
        if (w2 >= 0) g.tf.succ0[w].push_back(uint32_t(w2));
      }
      uint32_t dv = uint32_t(domains[h].index_of(g.meta.vnames[v]));
      for (uint32_t dv2 : domains[h].succ[dv]) {
        int w2 = g.meta.at(uint32_t(h), uint32_t(name_index(g.meta.vnames, domains[h].names[dv2])));
        g.tf.succ1[w].push_back(uint32_t(w2));
      }
    }
  }
  for (auto& s : g.tf.succ0) std::sort(s.begin(), s.end());
  for (auto& s : g.tf.succ1) std::sort(s.begin(), s.end());
  return g;
}

FrameProp frame_prop_from_name(const std::string& name) {
  if (name == "commute") return FrameProp::Commute;
  if (name == "confluent") return FrameProp::Confluent;
  if (name == "weak-order") return FrameProp::WeakOrder;
  if (name == "pseudo-equivalence") return FrameProp::PseudoEquivalence;
  if (name == "linear-order") return FrameProp::LinearOrder;
  if (name == "well-order") return FrameProp::WellOrder;
  if (name == "modally-discrete") return FrameProp::ModallyDiscrete;
  if (name == "dense") return FrameProp::Dense;
  if (name == "rooted") return FrameProp::Rooted;
  throw ParseError("unknown frame property: " + name);
}

const char* frame_prop_name(FrameProp p) {
  switch (p) {
    case FrameProp::Commute: return "commute";
    case FrameProp::Confluent: return "confluent";
    case FrameProp::WeakOrder: return "weak-order";
    case FrameProp::PseudoEquivalence: return "pseudo-equivalence";
    case FrameProp::LinearOrder: return "linear-order";
    case FrameProp::WellOrder: return "well-order";
    case FrameProp::ModallyDiscrete: return "modally-discrete";
    case FrameProp::Dense: return "dense";
    case FrameProp::Rooted: return "rooted";
  }
  return "?";
}

namespace {

bool is_transitive(const Frame& f) {
  for (uint32_t x = 0; x < f.size(); ++x)
    for (uint32_t y : f.succ[x])
      for (uint32_t z : f.succ[y])
        if (!f.edge(x, z)) return false;
  return true;
}

bool is_weakly_connected(const Frame& f) {
  for (uint32_t x = 0; x < f.size(); ++x)
    for (uint32_t y : f.succ[x])
      for (uint32_t z : f.succ[x])
        if (y != z && !f.edge(y, z) && !f.edge(z, y)) return false;
  return true;
}

bool is_symmetric(const Frame& f) {
  for (uint32_t x = 0; x < f.size(); ++x)
    for (uint32_t y : f.succ[x])
      if (!f.edge(y, x)) return false;
  return true;
}

bool is_pseudo_transitive(const Frame& f) {
  for (uint32_t x = 0; x < f.size(); ++x)
    for (uint32_t y : f.succ[x])
      for (uint32_t z : f.succ[y])
        if (x != z && !f.edge(x, z)) return false;
  return true;
}

bool is_linear_order(const Frame& f) {
  for (uint32_t x = 0; x < f.size(); ++x)
    if (f.edge(x, x)) return false;
  if (!is_transitive(f)) return false;
  for (uint32_t x = 0; x < f.size(); ++x)
    for (uint32_t y = 0; y < f.size(); ++y)
      if (x != y && !f.edge(x, y) && !f.edge(y, x)) return false;
  return true;
}

// Every non-empty subset has a least element; scanned literally, so the
// carrier is capped (2^n subsets).
bool is_well_order(const Frame& f) {
  if (!is_linear_order(f)) return false;
  size_t n = f.size();
  if (n > 20) throw BudgetError("well-order check capped at 20 worlds");
  std::vector<uint32_t> succmask(n, 0);
  for (uint32_t x = 0; x < n; ++x)
    for (uint32_t y : f.succ[x]) succmask[x] |= uint32_t(1) << y;
  for (uint32_t s = 1; s < (uint32_t(1) << n); ++s) {
    bool least = false;
    for (uint32_t x = 0; x < n && !least; ++x)
      if ((s >> x) & 1) least = (s & ~succmask[x] & ~(uint32_t(1) << x)) == 0;
    if (!least) return false;
  }
  return true;
}

// Finite shadow of modal discreteness: an infinite R-walk with distinct
// consecutive points, confined to A(x) = {y : y R x, not x R y}, exists on a
// finite frame exactly when that set carries a directed cycle through at
// least two points.
bool is_modally_discrete(const Frame& f) {
  size_t n = f.size();
  for (uint32_t x = 0; x < n; ++x) {
    std::vector<bool> in_a(n, false);
    for (uint32_t y = 0; y < n; ++y) in_a[y] = f.edge(y, x) && !f.edge(x, y);
    // 3-colour DFS over the self-loop-stripped restriction.
    std::vector<int8_t> color(n, 0);
    std::function<bool(uint32_t)> has_cycle = [&](uint32_t u) {
      color[u] = 1;
      for (uint32_t v : f.succ[u]) {
        if (!in_a[v] || v == u) continue;
        if (color[v] == 1) return true;
        if (color[v] == 0 && has_cycle(v)) return true;
      }
      color[u] = 2;
      return false;
    };
    for (uint32_t y = 0; y < n; ++y)
      if (in_a[y] && color[y] == 0 && has_cycle(y)) return false;
  }
  return true;
}

bool is_dense(const Frame& f) {
  for (uint32_t x = 0; x < f.size(); ++x)
    for (uint32_t y : f.succ[x]) {
      bool mid = false;
      for (uint32_t z : f.succ[x])
        if (f.edge(z, y)) {
          mid = true;
          break;
        }
      if (!mid) return false;
    }
  return true;
}

template <typename SuccFn>
bool reaches_all(size_t n, uint32_t r, SuccFn succ) {
  std::vector<bool> seen(n, false);
  std::vector<uint32_t> stack{r};
  seen[r] = true;
  size_t cnt = 1;
  while (!stack.empty()) {
    uint32_t u = stack.back();
    stack.pop_back();
    for (uint32_t v : succ(u))
      if (!seen[v]) {
        seen[v] = true;
        ++cnt;
        stack.push_back(v);
      }
  }
  return cnt == n;
}

template <typename SuccFn>
bool is_rooted(size_t n, SuccFn succ) {
  // First world in carrier order is the preferred candidate, then the rest.
  for (uint32_t r = 0; r < n; ++r)
    if (reaches_all(n, r, succ)) return true;
  return false;
}

}  // namespace

bool check_property(const Frame& f, FrameProp p) {
  switch (p) {
    case FrameProp::WeakOrder: return is_transitive(f) && is_weakly_connected(f);
    case FrameProp::PseudoEquivalence: return is_symmetric(f) && is_pseudo_transitive(f);
    case FrameProp::LinearOrder: return is_linear_order(f);
    case FrameProp::WellOrder: return is_well_order(f);
    case FrameProp::ModallyDiscrete: return is_modally_discrete(f);
    case FrameProp::Dense: return is_dense(f);
    case FrameProp::Rooted:
      return is_rooted(f.size(), [&](uint32_t u) -> const std::vector<uint32_t>& { return f.succ[u]; });
    case FrameProp::Commute:
    case FrameProp::Confluent:
      throw Error("property needs a 2-frame");
  }
  return false;
}

bool check_property(const TwoFrame& tf, FrameProp p) {
  size_t n = tf.size();
  switch (p) {
    case FrameProp::Commute: {
      for (uint32_t x = 0; x < n; ++x) {
        Bits b01(n), b10(n);
        for (uint32_t z : tf.succ0[x])
          for (uint32_t u : tf.succ1[z]) b01.set(u);
        for (uint32_t y : tf.succ1[x])
          for (uint32_t u : tf.succ0[y]) b10.set(u);
        if (b01 != b10) return false;
      }
      return true;
    }
    case FrameProp::Confluent: {
      std::vector<Bits> s1(n, Bits(n));
      for (uint32_t z = 0; z < n; ++z)
        for (uint32_t u : tf.succ1[z]) s1[z].set(u);
      for (uint32_t x = 0; x < n; ++x)
        for (uint32_t z : tf.succ0[x])
          for (uint32_t y : tf.succ1[x]) {
            bool u_exists = false;
            for (uint32_t u : tf.succ0[y])
              if (s1[z].get(u)) {
                u_exists = true;
                break;
              }
            if (!u_exists) return false;
          }
      return true;
    }
    case FrameProp::Rooted: {
      std::vector<std::vector<uint32_t>> both(n);
      for (uint32_t u = 0; u < n; ++u) {
        both[u] = tf.succ0[u];
        both[u].insert(both[u].end(), tf.succ1[u].begin(), tf.succ1[u].end());
      }
      return is_rooted(n, [&](uint32_t u) -> const std::vector<uint32_t>& { return both[u]; });
    }
    default:
      throw Error("unimodal property; check the component frame");
  }
}

Rank horizontal_rank(const TwoFrame& tf, uint32_t w) {
  size_t n = tf.size();
  // state: 0 unvisited, 1 on stack, 2 done
  std::vector<int8_t> state(n, 0);
  std::vector<Rank> memo(n);
  std::function<Rank(uint32_t)> go = [&](uint32_t u) -> Rank {
    if (state[u] == 2) return memo[u];
    if (state[u] == 1) return Rank{true, 0};  // cycle
    state[u] = 1;
    Rank best{false, 0};
    for (uint32_t v : tf.succ0[u]) {
      Rank r = go(v);
      if (r.infinite) {
        best = Rank{true, 0};
        break;
      }
      best.value = std::max(best.value, r.value + 1);
    }
    state[u] = 2;
    memo[u] = best;
    return best;
  };
  return go(w);
}

bool operator==(const Rank& a, const Rank& b) {
  return a.infinite == b.infinite && (a.infinite || a.value == b.value);
}

void print_two_frame(std::ostream& os, const TwoFrame& tf, const GridMeta* meta) {
  os << "worlds:";
  for (const auto& nm : tf.names) os << " " << nm;
  os << "\n";
  for (uint32_t a = 0; a < tf.size(); ++a)
    for (uint32_t b : tf.succ0[a]) os << "r0: " << tf.names[a] << " " << tf.names[b] << "\n";
  for (uint32_t a = 0; a < tf.size(); ++a)
    for (uint32_t b : tf.succ1[a]) os << "r1: " << tf.names[a] << " " << tf.names[b] << "\n";
  if (meta)
    for (uint32_t w = 0; w < tf.size(); ++w)
      os << "coord " << tf.names[w] << " = (" << meta->coord[w].first << ", "
         << meta->vnames[meta->coord[w].second] << ")\n";
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

}  // namespace

ParsedFrame parse_two_frame(const std::string& text) {
  ParsedFrame pf;
  TwoFrame& tf = pf.tf;
  std::vector<std::pair<std::string, std::string>> e0, e1;
  std::vector<std::pair<std::string, std::pair<uint32_t, std::string>>> coords;

  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::vector<std::string> tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "worlds:") {
      for (size_t i = 1; i < tok.size(); ++i) tf.names.push_back(tok[i]);
    } else if (tok[0] == "r0:" || tok[0] == "r1:") {
      if (tok.size() != 3) throw ParseError("frame: expected '" + tok[0] + " id id'");
      (tok[0] == "r0:" ? e0 : e1).emplace_back(tok[1], tok[2]);
    } else if (tok[0] == "coord") {
      // coord id = (h, v)
      if (tok.size() < 4 || tok[2] != "=") throw ParseError("frame: malformed coord line");
      std::string rest;
      for (size_t i = 3; i < tok.size(); ++i) rest += tok[i];
      if (rest.size() < 5 || rest.front() != '(' || rest.back() != ')')
        throw ParseError("frame: malformed coord tuple");
      rest = rest.substr(1, rest.size() - 2);
      auto comma = rest.find(',');
      if (comma == std::string::npos) throw ParseError("frame: malformed coord tuple");
      coords.push_back({tok[1], {uint32_t(std::stoul(rest.substr(0, comma))), rest.substr(comma + 1)}});
    } else if (tok[0] == "val" || tok[0] == "root:") {
      continue;  // model layer's lines
    } else {
      throw ParseError("frame: unrecognized line: " + line);
    }
  }
  if (tf.names.empty()) throw ParseError("frame: no worlds");
  tf.succ0.resize(tf.size());
  tf.succ1.resize(tf.size());
  auto idx = [&](const std::string& nm) {
    int i = tf.index_of(nm);
    if (i < 0) throw ParseError("frame: unknown world " + nm);
    return uint32_t(i);
  };
  for (auto& [a, b] : e0) tf.succ0[idx(a)].push_back(idx(b));
  for (auto& [a, b] : e1) tf.succ1[idx(a)].push_back(idx(b));
  for (auto& s : tf.succ0) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  for (auto& s : tf.succ1) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }

  if (!coords.empty()) {
    if (coords.size() != tf.size()) throw ParseError("frame: coord lines must cover every world");
    GridMeta& m = pf.meta;
    uint32_t hmax = 0;
    for (auto& c : coords) hmax = std::max(hmax, c.second.first);
    m.columns.resize(hmax + 1);
    m.coord.resize(tf.size());
    for (auto& [nm, hv] : coords) {
      uint32_t w = idx(nm);
      int vi = name_index(m.vnames, hv.second);
      if (vi < 0) {
        vi = int(m.vnames.size());
        m.vnames.push_back(hv.second);
      }
      m.coord[w] = {hv.first, uint32_t(vi)};
      m.columns[hv.first].push_back(w);
    }
    for (auto& c : m.columns) std::sort(c.begin(), c.end());
    // Horizontal skeleton projected out of rel0; names are the indices.
    for (uint32_t h = 0; h <= hmax; ++h) m.horizontal.names.push_back(std::to_string(h));
    m.horizontal.succ.resize(hmax + 1);
    for (uint32_t a = 0; a < tf.size(); ++a)
      for (uint32_t b : tf.succ0[a]) {
        uint32_t ha = m.coord[a].first, hb = m.coord[b].first;
        if (!sorted_contains(m.horizontal.succ[ha], hb)) {
          m.horizontal.succ[ha].push_back(hb);
          std::sort(m.horizontal.succ[ha].begin(), m.horizontal.succ[ha].end());
        }
      }
    // Tag from the column carriers: equal everywhere is a product; otherwise
    // monotone along projected rel0 edges.
    auto colset = [&](uint32_t h) {
      std::set<uint32_t> s;
      for (uint32_t w : m.columns[h]) s.insert(m.coord[w].second);
      return s;
    };
    bool all_eq = true, exp_ok = true, dec_ok = true;
    for (uint32_t h = 0; h <= hmax; ++h)
      for (uint32_t h2 : m.horizontal.succ[h]) {
        auto a = colset(h), b = colset(h2);
        bool ab = std::includes(b.begin(), b.end(), a.begin(), a.end());
        bool ba = std::includes(a.begin(), a.end(), b.begin(), b.end());
        all_eq = all_eq && ab && ba;
        exp_ok = exp_ok && ab;
        dec_ok = dec_ok && ba;
      }
    for (uint32_t h = 0; h + 1 <= hmax && all_eq; ++h) all_eq = colset(h) == colset(h + 1);
    m.tag = all_eq ? GridTag::Product
                   : exp_ok ? GridTag::Expanding
                            : dec_ok ? GridTag::Decreasing
                                     : throw ParseError("frame: coord domains not nested");
    pf.has_meta = true;
  }
  return pf;
}

}  // namespace bimodal
