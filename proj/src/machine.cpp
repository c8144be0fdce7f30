#include "bimodal/machine.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace bimodal {

int CounterMachine::state_index(const std::string& name) const {
  for (size_t i = 0; i < states.size(); ++i)
    if (states[i] == name) return int(i);
  return -1;
}

std::string instr_name(const Instr& op) {
  const char* k = op.kind == InstrKind::Inc   ? "inc"
                  : op.kind == InstrKind::Dec ? "dec"
                                              : "zero";
  return k + std::to_string(op.counter);
}

Configuration initial_configuration(const CounterMachine& m) {
  Configuration c;
  c.state = 0;
  c.counters.assign(m.counters, 0);
  return c;
}

std::vector<std::pair<Instr, Configuration>> successors(const CounterMachine& m,
                                                        const Configuration& cfg) {
  std::vector<std::pair<Instr, Configuration>> out;
  for (const Instruction& ins : m.instr[cfg.state]) {
    uint32_t i = ins.op.counter;
    Configuration next = cfg;
    next.state = ins.target;
    switch (ins.op.kind) {
      case InstrKind::Inc:
        next.counters[i] += 1;
        break;
      case InstrKind::Dec:
        if (cfg.counters[i] == 0) continue;
        next.counters[i] -= 1;
        break;
      case InstrKind::Zero:
        if (cfg.counters[i] != 0) continue;
        break;
    }
    out.emplace_back(ins.op, std::move(next));
  }
  return out;
}

namespace {

// Closed form for "some cfg1 <= cfg steps under `ins` to some cfg2 >= to".
// Inc: to <= cfg + e_i pointwise. Dec: cfg_i >= 1 and to <= cfg - e_i.
// Zero: to_i = 0 and to_j <= cfg_j elsewhere (no condition on cfg_i: the
// lower approximation may drop counter i to zero first).
bool lossy_matches(const Instruction& ins, const Configuration& cfg,
                   const Configuration& to) {
  if (ins.target != to.state) return false;
  uint32_t i = ins.op.counter;
  for (uint32_t j = 0; j < cfg.counters.size(); ++j) {
    if (j == i) continue;
    if (to.counters[j] > cfg.counters[j]) return false;
  }
  switch (ins.op.kind) {
    case InstrKind::Inc:
      return to.counters[i] <= cfg.counters[i] + 1;
    case InstrKind::Dec:
      return cfg.counters[i] >= 1 && to.counters[i] + 1 <= cfg.counters[i];
    case InstrKind::Zero:
      return to.counters[i] == 0;
  }
  return false;
}

}  // namespace

std::optional<Instr> lossy_step(const CounterMachine& m, const Configuration& cfg,
                                const Configuration& cfg2) {
  if (m.is_halting(cfg.state)) return std::nullopt;
  for (const Instruction& ins : m.instr[cfg.state])
    if (lossy_matches(ins, cfg, cfg2)) return ins.op;
  return std::nullopt;
}

std::vector<std::pair<Instr, Configuration>> lossy_successors(const CounterMachine& m,
                                                              const Configuration& cfg,
                                                              uint64_t cap) {
  std::vector<std::pair<Instr, Configuration>> out;
  uint32_t n = m.counters;
  for (const Instruction& ins : m.instr[cfg.state]) {
    uint32_t i = ins.op.counter;
    if (ins.op.kind == InstrKind::Dec && cfg.counters[i] == 0) continue;
    // Upper end of the successor box, per counter.
    std::vector<uint64_t> hi(n);
    for (uint32_t j = 0; j < n; ++j) {
      uint64_t h = cfg.counters[j];
      if (j == i) {
        if (ins.op.kind == InstrKind::Inc) h += 1;
        if (ins.op.kind == InstrKind::Dec) h -= 1;
        if (ins.op.kind == InstrKind::Zero) h = 0;
      }
      hi[j] = std::min(h, cap);
    }
    Configuration next;
    next.state = ins.target;
    next.counters.assign(n, 0);
    for (;;) {
      out.emplace_back(ins.op, next);
      uint32_t j = n;
      while (j > 0 && next.counters[j - 1] == hi[j - 1]) next.counters[--j] = 0;
      if (j == 0) break;
      next.counters[j - 1] += 1;
    }
  }
  return out;
}

std::optional<std::string> run_violation(const CounterMachine& m, const Run& r) {
  if (r.configs.empty()) return "run has no configurations";
  if (r.steps.size() + 1 != r.configs.size()) return "step/configuration count mismatch";
  for (size_t k = 0; k < r.configs.size(); ++k) {
    const Configuration& c = r.configs[k];
    if (c.state >= m.size()) return "configuration " + std::to_string(k) + ": unknown state";
    if (c.counters.size() != m.counters)
      return "configuration " + std::to_string(k) + ": wrong counter arity";
  }
  for (size_t k = 0; k + 1 < r.configs.size(); ++k) {
    const Configuration& a = r.configs[k];
    const Configuration& b = r.configs[k + 1];
    std::string at = "step " + std::to_string(k) + " (" + instr_name(r.steps[k]) + ")";
    if (r.kind == RunKind::Reliable) {
      bool ok = false;
      for (const auto& [op, next] : successors(m, a))
        if (op == r.steps[k] && next == b) ok = true;
      if (!ok) return at + ": not a reliable step";
    } else {
      Instruction ins{r.steps[k], b.state};
      const auto& declared = m.instr[a.state];
      if (std::find(declared.begin(), declared.end(), ins) == declared.end())
        return at + ": instruction not declared";
      if (!lossy_matches(ins, a, b)) return at + ": not a lossy step";
    }
  }
  return std::nullopt;
}

namespace {

bool walk_runs(const CounterMachine& m, Run& path, size_t max_len, RunKind kind,
               std::optional<uint64_t> cap, const std::function<bool(const Run&)>& visit) {
  if (path.configs.size() == max_len) return visit(path);
  const Configuration& cur = path.configs.back();
  std::vector<std::pair<Instr, Configuration>> next =
      kind == RunKind::Reliable ? successors(m, cur) : lossy_successors(m, cur, *cap);
  if (next.empty()) return visit(path);
  for (auto& [op, cfg] : next) {
    path.steps.push_back(op);
    path.configs.push_back(std::move(cfg));
    bool go_on = walk_runs(m, path, max_len, kind, cap, visit);
    path.configs.pop_back();
    path.steps.pop_back();
    if (!go_on) return false;
  }
  return true;
}

}  // namespace

void for_each_run(const CounterMachine& m, const Configuration& start, size_t max_len,
                  RunKind kind, std::optional<uint64_t> counter_cap,
                  const std::function<bool(const Run&)>& visit) {
  if (max_len < 1) throw Error("run enumeration needs max_len >= 1");
  if (kind == RunKind::Lossy && !counter_cap)
    throw Error("lossy run enumeration needs a counter cap");
  if (start.state >= m.size() || start.counters.size() != m.counters)
    throw Error("malformed start configuration");
  Run path;
  path.kind = kind;
  path.configs.push_back(start);
  walk_runs(m, path, max_len, kind, counter_cap, visit);
}

std::vector<Run> bounded_runs(const CounterMachine& m, const Configuration& start,
                              size_t max_len, RunKind kind,
                              std::optional<uint64_t> counter_cap) {
  std::vector<Run> out;
  for_each_run(m, start, max_len, kind, counter_cap, [&](const Run& r) {
    out.push_back(r);
    return true;
  });
  return out;
}

namespace {

struct SearchKey {
  Configuration cfg;
  uint64_t aux = 0;

  bool operator<(const SearchKey& o) const {
    if (cfg.state != o.cfg.state) return cfg.state < o.cfg.state;
    if (cfg.counters != o.cfg.counters) return cfg.counters < o.cfg.counters;
    return aux < o.aux;
  }
};

}  // namespace

OracleResult bounded_oracle(const CounterMachine& m, const Problem& p,
                            const OracleParams& params) {
  using Kind = Problem::Kind;
  bool lossy = p.kind == Kind::LossyReachability || p.kind == Kind::LossyOmegaReachability;
  bool counting = p.kind == Kind::Recurrence || p.kind == Kind::LossyOmegaReachability;
  if (lossy && !params.counter_cap) throw Error("lossy oracle needs a counter cap");

  int target = -1;
  if (p.kind != Kind::NonTermination) {
    target = m.state_index(p.target);
    if (target < 0) throw Error("oracle: unknown target state " + p.target);
  }

  Configuration start = params.start ? *params.start : initial_configuration(m);
  if (start.state >= m.size() || start.counters.size() != m.counters)
    throw Error("oracle: malformed start configuration");

  auto succ = [&](const Configuration& c) {
    return lossy ? lossy_successors(m, c, *params.counter_cap) : successors(m, c);
  };
  uint64_t quota = std::max<uint64_t>(p.count, 1);
  auto aux_of = [&](const Configuration& c, uint64_t prev) -> uint64_t {
    if (!counting) return 0;
    return std::min(quota, prev + (int(c.state) == target ? 1 : 0));
  };
  auto done = [&](const SearchKey& k, size_t level) {
    switch (p.kind) {
      case Kind::NonTermination: return level == params.steps;
      case Kind::Reachability:
      case Kind::LossyReachability: return int(k.cfg.state) == target;
      case Kind::Recurrence:
      case Kind::LossyOmegaReachability: return k.aux >= quota;
    }
    return false;
  };

  // Level-synchronous BFS. For NonTermination the level is folded into the
  // key, so revisiting a configuration at a later level still counts (runs
  // may loop); the other problems dedupe on first discovery.
  std::map<SearchKey, std::pair<SearchKey, Instr>> parent;
  std::set<SearchKey> seen;
  std::deque<std::pair<SearchKey, size_t>> queue;

  auto make_key = [&](const Configuration& c, uint64_t aux, size_t level) {
    SearchKey k{c, p.kind == Kind::NonTermination ? level : aux};
    return k;
  };
  auto rebuild = [&](SearchKey k) {
    Run r;
    r.kind = lossy ? RunKind::Lossy : RunKind::Reliable;
    std::vector<Configuration> rev{k.cfg};
    std::vector<Instr> ops;
    auto it = parent.find(k);
    while (it != parent.end()) {
      ops.push_back(it->second.second);
      k = it->second.first;
      rev.push_back(k.cfg);
      it = parent.find(k);
    }
    r.configs.assign(rev.rbegin(), rev.rend());
    r.steps.assign(ops.rbegin(), ops.rend());
    return r;
  };

  SearchKey k0 = make_key(start, aux_of(start, 0), 0);
  seen.insert(k0);
  queue.push_back({k0, 0});
  while (!queue.empty()) {
    auto [k, level] = queue.front();
    queue.pop_front();
    if (done(k, level)) return {true, rebuild(k)};
    if (level == params.steps) continue;
    for (auto& [op, next] : succ(k.cfg)) {
      SearchKey nk = make_key(next, aux_of(next, k.aux), level + 1);
      if (!seen.insert(nk).second) continue;
      parent.emplace(nk, std::make_pair(k, op));
      queue.push_back({nk, level + 1});
    }
  }
  return {false, std::nullopt};
}

CounterMachine prefill(const CounterMachine& m, const Configuration& sigma0) {
  if (sigma0.state >= m.size() || sigma0.counters.size() != m.counters)
    throw Error("prefill: malformed configuration");
  uint64_t total = 0;
  for (uint64_t c : sigma0.counters) total += c;

  CounterMachine out;
  out.counters = m.counters;

  if (total == 0) {
    // Just promote sigma0.state to the initial slot.
    std::vector<uint32_t> order{sigma0.state};
    for (uint32_t q = 0; q < m.size(); ++q)
      if (q != sigma0.state) order.push_back(q);
    std::vector<uint32_t> remap(m.size());
    for (uint32_t pos = 0; pos < order.size(); ++pos) remap[order[pos]] = pos;
    for (uint32_t q : order) {
      out.states.push_back(m.states[q]);
      out.halting.push_back(m.halting[q]);
      out.instr.push_back(m.instr[q]);
      for (Instruction& ins : out.instr.back()) ins.target = remap[ins.target];
    }
    return out;
  }

  auto fresh = [&](uint64_t k) {
    std::string name = "pre" + std::to_string(k);
    while (m.state_index(name) >= 0) name += "_";
    return name;
  };
  for (uint64_t k = 0; k < total; ++k) {
    out.states.push_back(fresh(k));
    out.halting.push_back(false);
    out.instr.emplace_back();
  }
  uint64_t k = 0;
  for (uint32_t i = 0; i < m.counters; ++i)
    for (uint64_t c = 0; c < sigma0.counters[i]; ++c, ++k) {
      uint32_t next = k + 1 < total ? uint32_t(k + 1) : uint32_t(total + sigma0.state);
      out.instr[k].push_back({{InstrKind::Inc, i}, next});
    }
  for (uint32_t q = 0; q < m.size(); ++q) {
    out.states.push_back(m.states[q]);
    out.halting.push_back(m.halting[q]);
    out.instr.push_back(m.instr[q]);
    for (Instruction& ins : out.instr.back()) ins.target += total;
  }
  return out;
}

CounterMachine parse_machine(const std::string& text) {
  CounterMachine m;
  bool saw_counters = false, saw_states = false, saw_halt = false;
  std::vector<std::string> halt_names;
  std::vector<std::tuple<std::string, std::string, std::string, std::string>> raw;

  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok[0] == "counters:") {
      if (saw_counters || tok.size() != 2) throw ParseError("machine: bad counters line");
      saw_counters = true;
      m.counters = uint32_t(std::stoul(tok[1]));
    } else if (tok[0] == "states:") {
      if (saw_states) throw ParseError("machine: duplicate states line");
      saw_states = true;
      m.states.assign(tok.begin() + 1, tok.end());
    } else if (tok[0] == "halt:") {
      if (saw_halt) throw ParseError("machine: duplicate halt line");
      saw_halt = true;
      halt_names.assign(tok.begin() + 1, tok.end());
    } else if (tok.size() == 5 && tok[0].size() > 1 && tok[0].back() == ':' && tok[3] == "->") {
      raw.emplace_back(tok[0].substr(0, tok[0].size() - 1), tok[1], tok[2], tok[4]);
    } else {
      throw ParseError("machine: unrecognized line: " + line);
    }
  }

  if (!saw_counters || m.counters < 2)
    throw ParseError("machine: needs 'counters: N' with N > 1");
  if (m.states.empty()) throw ParseError("machine: needs a states line");
  for (size_t i = 0; i < m.states.size(); ++i)
    for (size_t j = i + 1; j < m.states.size(); ++j)
      if (m.states[i] == m.states[j])
        throw ParseError("machine: duplicate state " + m.states[i]);

  m.halting.assign(m.size(), false);
  for (const std::string& h : halt_names) {
    int q = m.state_index(h);
    if (q < 0) throw ParseError("machine: unknown halt state " + h);
    m.halting[q] = true;
  }

  m.instr.resize(m.size());
  for (auto& [state, kind, counter, target] : raw) {
    int q = m.state_index(state);
    if (q < 0) throw ParseError("machine: unknown state " + state);
    int to = m.state_index(target);
    if (to < 0) throw ParseError("machine: unknown target state " + target);
    Instr op;
    if (kind == "inc")
      op.kind = InstrKind::Inc;
    else if (kind == "dec")
      op.kind = InstrKind::Dec;
    else if (kind == "zero")
      op.kind = InstrKind::Zero;
    else
      throw ParseError("machine: unknown operation " + kind);
    op.counter = uint32_t(std::stoul(counter));
    if (op.counter >= m.counters)
      throw ParseError("machine: counter index " + counter + " out of range");
    m.instr[q].push_back({op, uint32_t(to)});
  }

  for (uint32_t q = 0; q < m.size(); ++q) {
    if (m.halting[q] && !m.instr[q].empty())
      throw ParseError("machine: halting state " + m.states[q] + " has instructions");
    if (!m.halting[q] && m.instr[q].empty())
      throw ParseError("machine: state " + m.states[q] + " has no instructions");
  }
  return m;
}

std::string print_machine(const CounterMachine& m) {
  std::ostringstream os;
  os << "counters: " << m.counters << "\n";
  os << "states:";
  for (const std::string& s : m.states) os << " " << s;
  os << "\nhalt:";
  for (uint32_t q = 0; q < m.size(); ++q)
    if (m.halting[q]) os << " " << m.states[q];
  os << "\n";
  for (uint32_t q = 0; q < m.size(); ++q)
    for (const Instruction& ins : m.instr[q]) {
      const char* k = ins.op.kind == InstrKind::Inc   ? "inc"
                      : ins.op.kind == InstrKind::Dec ? "dec"
                                                      : "zero";
      os << m.states[q] << ": " << k << " " << ins.op.counter << " -> "
         << m.states[ins.target] << "\n";
    }
  return os.str();
}

uint64_t machine_hash(const CounterMachine& m) {
  uint64_t h = 1469598103934665603ull;
  for (char c : print_machine(m)) {
    h ^= uint8_t(c);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace bimodal
