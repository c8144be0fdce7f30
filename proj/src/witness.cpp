// Builders, verifier, decoders, and structure checks for the explicit
// witness models. Valuations are driven by run-indexed element sets (one
// element per counter increment, dropped smallest-first); truncated kinds
// restrict the infinite valuation to the carrier and the verifier classifies
// every failure world against the kind's truncation edge.
#include "bimodal/witness.hpp"

#include "bimodal/frames.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace bimodal {

namespace {

std::string show(uint64_t n) { return std::to_string(n); }

// ------------------------------------------------------------ dictionary

const std::string& req_name(const VarDictionary& dict, const std::string& role) {
  if (!dict.has_role(role))
    throw Error("witness: encoding defines no variable for role '" + role + "'");
  return dict.name_of(role);
}

std::string state_role(const std::string& q) { return "S_" + q; }
std::string counter_role(uint32_t i) { return "C" + show(i); }
std::string plus_role(uint32_t i) { return "C" + show(i) + "+"; }
std::string minus_role(uint32_t i) { return "C" + show(i) + "-"; }
std::string instr_role(const Instr& op) { return "I_" + instr_name(op); }

// ------------------------------------------------------- model assembly

struct ValBuilder {
  std::map<std::string, std::vector<uint32_t>> vals_;

  void add(const std::string& name, uint32_t w) { vals_[name].push_back(w); }
  void install(Model& md) const {
    for (const auto& [name, worlds] : vals_) md.set_val(name, worlds);
  }
};

uint32_t grid_at(const Model& md, uint32_t h, uint32_t v) {
  int w = md.meta.at(h, v);
  if (w < 0)
    throw Error("witness: carrier has no point (" + show(h) + "," + show(v) + ")");
  return static_cast<uint32_t>(w);
}

// --------------------------------------------------- run preconditions

const Run& first_run(const WitnessSpec& spec) {
  if (spec.runs.empty()) throw Error("witness: no run supplied");
  return spec.runs.front();
}

void require_valid(const CounterMachine& mach, const Run& run, const std::string& what) {
  if (run.configs.empty()) throw Error("witness: " + what + " has no configurations");
  if (auto v = run_violation(mach, run)) throw Error("witness: " + what + ": " + *v);
}

void require_initial(const CounterMachine& mach, const Run& run, const std::string& what) {
  if (!(run.configs.front() == initial_configuration(mach)))
    throw Error("witness: " + what + " must start at the initial configuration");
}

// The first `upto` configurations must avoid halting states (the grid's
// state partition has no marker for them).
void require_live(const CounterMachine& mach, const Run& run, size_t upto,
                  const std::string& what) {
  for (size_t i = 0; i < upto && i < run.configs.size(); ++i)
    if (mach.is_halting(run.configs[i].state))
      throw Error("witness: " + what + " visits halting state " +
                  mach.states[run.configs[i].state] + " at step " + show(i));
}

void require_reliable(const Run& run, const std::string& kind) {
  if (run.kind != RunKind::Reliable)
    throw Error("witness: " + kind + " witnesses need a reliable run");
}

int require_state(const CounterMachine& mach, const std::string& q) {
  int idx = mach.state_index(q);
  if (idx < 0) throw Error("witness: unknown state '" + q + "'");
  return idx;
}

// --------------------------------------------------- counter histories

using ElemSets = std::vector<std::vector<std::set<uint32_t>>>;  // [step][counter]

// Forward plus/minus histories: step n files element n under plus on an
// increment and retires the least live element under minus on a decrement.
struct FwHistory {
  ElemSets plus, minus;
};

FwHistory fw_history(const CounterMachine& mach, const Run& run, uint32_t total) {
  FwHistory h;
  h.plus.assign(total, std::vector<std::set<uint32_t>>(mach.counters));
  h.minus = h.plus;
  for (uint32_t m = 0; m + 1 < total; ++m) {
    h.plus[m + 1] = h.plus[m];
    h.minus[m + 1] = h.minus[m];
    const Instr& op = run.steps[m];
    if (op.kind == InstrKind::Inc) {
      h.plus[m + 1][op.counter].insert(m);
    } else if (op.kind == InstrKind::Dec) {
      for (uint32_t e : h.plus[m][op.counter])
        if (!h.minus[m][op.counter].count(e)) {
          h.minus[m + 1][op.counter].insert(e);
          break;
        }
    }
  }
  return h;
}

// Backward histories: step n files element n on an increment and drops the
// least element on a decrement, so the set at step n lists the live columns.
ElemSets bw_history(const CounterMachine& mach, const Run& run, uint32_t total) {
  ElemSets mu(total, std::vector<std::set<uint32_t>>(mach.counters));
  for (uint32_t m = 0; m + 1 < total; ++m) {
    mu[m + 1] = mu[m];
    const Instr& op = run.steps[m];
    if (op.kind == InstrKind::Inc) {
      mu[m + 1][op.counter].insert(m);
    } else if (op.kind == InstrKind::Dec) {
      auto& s = mu[m + 1][op.counter];
      if (s.empty()) throw Error("witness: decrement from an empty counter");
      s.erase(s.begin());
    }
  }
  return mu;
}

// Per-config element sets of one backward segment whose config j sits at
// column last_col - j: a net gain of one files the entry column plus one,
// anything else drops the smallest |delta| elements. Works for reliable and
// lossy runs alike.
ElemSets segment_sets(const CounterMachine& mach, const Run& run, uint32_t last_col) {
  uint32_t total = static_cast<uint32_t>(run.configs.size());
  ElemSets sets(total, std::vector<std::set<uint32_t>>(mach.counters));
  for (uint32_t j = 0; j + 1 < total; ++j) {
    sets[j + 1] = sets[j];
    for (uint32_t i = 0; i < mach.counters; ++i) {
      uint64_t c = run.configs[j].counters[i];
      uint64_t c2 = run.configs[j + 1].counters[i];
      auto& s = sets[j + 1][i];
      if (c2 == c + 1) {
        s.insert(last_col - j);
      } else if (c2 <= c) {
        for (uint64_t k = c2; k < c; ++k) s.erase(s.begin());
      } else {
        throw Error("witness: counter " + show(i) + " gains more than one at step " + show(j));
      }
    }
  }
  return sets;
}

// ------------------------------------------------------------- builders

Model grid_model(GridTwoFrame g) {
  Model md;
  md.frame = std::move(g.tf);
  md.has_meta = true;
  md.meta = std::move(g.meta);
  return md;
}

// Forward grid on <T,<> x <T+1,!=>: staircase S/N along the diagonal, state
// markers on the S-points, monotone plus/minus counter histories, and for
// the finite kind an end marker on the last next-point.
Model build_fw(const WitnessSpec& spec, const VarDictionary& dict, bool finite) {
  const CounterMachine& mach = spec.machine;
  const Run& run = first_run(spec);
  require_valid(mach, run, "run");
  require_reliable(run, "forward grid");
  require_initial(mach, run, "run");
  uint32_t total = static_cast<uint32_t>(run.configs.size());
  if (!finite) {
    if (spec.K == 0) throw Error("witness: truncation depth K must be positive");
    if (run.configs.size() < spec.K)
      throw Error("witness: run has fewer than K configurations");
    total = spec.K;
  }
  require_live(mach, run, finite ? total - 1 : total, "run");
  require_state(mach, spec.recur_state);
  const std::string& last = mach.states[run.configs[total - 1].state];
  if (last != spec.recur_state)
    throw Error("witness: run ends in " + last + ", not the target state " +
                spec.recur_state);

  Model md = grid_model(product(make_linear(total), make_difference(total + 1)));
  ValBuilder vb;
  const std::string& s_name = req_name(dict, "S");
  const std::string& n_name = req_name(dict, "N");
  for (uint32_t m = 0; m < total; ++m) {
    uint32_t diag = grid_at(md, m, m);
    vb.add(s_name, diag);
    vb.add(req_name(dict, state_role(mach.states[run.configs[m].state])), diag);
    vb.add(n_name, grid_at(md, m, m + 1));
  }
  if (finite) vb.add(req_name(dict, "end"), grid_at(md, total - 1, total));
  FwHistory hist = fw_history(mach, run, total);
  for (uint32_t m = 0; m < total; ++m)
    for (uint32_t i = 0; i < mach.counters; ++i) {
      for (uint32_t e : hist.plus[m][i])
        vb.add(req_name(dict, plus_role(i)), grid_at(md, m, e));
      for (uint32_t e : hist.minus[m][i])
        vb.add(req_name(dict, minus_role(i)), grid_at(md, m, e));
    }
  vb.install(md);
  md.root = grid_at(md, 0, 0);
  return md;
}

// Truncated backward grid on (reversed omega+1 cut at K) x <K,!=>: the
// diagonal staircase with next-points one column up, instruction markers on
// the diagonal, live-column counter sets, and (for the recurrence kind) the
// parity marker on odd diagonals plus pointers to the next recurrence visit.
Model build_bw(const WitnessSpec& spec, const VarDictionary& dict, bool rec) {
  const CounterMachine& mach = spec.machine;
  const Run& run = first_run(spec);
  require_valid(mach, run, "run");
  require_reliable(run, "backward grid");
  require_initial(mach, run, "run");
  uint32_t K = spec.K;
  if (K == 0) throw Error("witness: truncation depth K must be positive");
  if (run.configs.size() < K)
    throw Error("witness: run has fewer than K configurations");
  require_live(mach, run, K, "run");

  Model md = grid_model(product(make_omega_plus_one_reversed(K), make_difference(K)));
  auto col = [](uint32_t n) { return n + 1; };  // chain world n sits at h-index n+1
  ValBuilder vb;
  const std::string& s_name = req_name(dict, "S");
  const std::string& n_name = req_name(dict, "N");
  ElemSets mu = bw_history(mach, run, K);
  for (uint32_t n = 0; n < K; ++n) {
    uint32_t diag = grid_at(md, col(n), n);
    vb.add(s_name, diag);
    vb.add(req_name(dict, state_role(mach.states[run.configs[n].state])), diag);
    if (n >= 1) vb.add(req_name(dict, instr_role(run.steps[n - 1])), diag);
    if (n + 1 < K) vb.add(n_name, grid_at(md, col(n + 1), n));
    for (uint32_t i = 0; i < mach.counters; ++i)
      for (uint32_t e : mu[n][i])
        vb.add(req_name(dict, counter_role(i)), grid_at(md, col(n), e));
  }
  if (rec) {
    int ridx = require_state(mach, spec.recur_state);
    const std::string& q_name = req_name(dict, "Q");
    const std::string& r_name = req_name(dict, "R");
    for (uint32_t n = 0; n < K; ++n) {
      if (n % 2 == 1) vb.add(q_name, grid_at(md, col(n), n));
      bool found = false;
      for (uint32_t k = n + 1; k < K; ++k)
        if (run.configs[k].state == static_cast<uint32_t>(ridx)) {
          vb.add(r_name, grid_at(md, col(n), k));
          found = true;
          break;
        }
      if (!found && n + 1 < K)
        throw Error("witness: no visit to " + spec.recur_state + " after step " +
                    show(n) + " within the truncation");
    }
  }
  vb.install(md);
  md.root = grid_at(md, 0, 0);
  return md;
}

// Tick-block chain: each backward-grid row is smeared over a block of
// `width` consecutive chain points, ticks alternate per block anchored at
// the top block, and each block also carries the primed copy of the row one
// step later (so the one-tick-ahead operators can see it).
Model build_dense(const WitnessSpec& spec, const VarDictionary& dict) {
  const CounterMachine& mach = spec.machine;
  const Run& run = first_run(spec);
  require_valid(mach, run, "run");
  require_reliable(run, "tick-block");
  require_initial(mach, run, "run");
  uint32_t K = spec.K;
  uint32_t width = spec.width;
  if (K == 0) throw Error("witness: truncation depth K must be positive");
  if (width == 0) throw Error("witness: block width must be positive");
  if (run.configs.size() < K)
    throw Error("witness: run has fewer than K configurations");
  require_live(mach, run, K, "run");

  Model md = grid_model(
      product(make_omega_plus_one_reversed(width * K - 1), make_difference(K)));
  ValBuilder vb;
  const std::string& s_name = req_name(dict, "S");
  const std::string& n_name = req_name(dict, "N");
  const std::string& tick_name = req_name(dict, "Tick");
  ElemSets mu = bw_history(mach, run, K);
  for (uint32_t b = 0; b < K; ++b) {
    bool tick = ((K - 1 - b) % 2) == 0;
    for (uint32_t p = 0; p < width; ++p) {
      uint32_t hidx = width * b + p + 1;  // chain world width*b+p
      if (tick)
        for (uint32_t v = 0; v < K; ++v) vb.add(tick_name, grid_at(md, hidx, v));
      vb.add(s_name, grid_at(md, hidx, b));
      vb.add(req_name(dict, state_role(mach.states[run.configs[b].state])),
             grid_at(md, hidx, b));
      if (b >= 1) {
        vb.add(n_name, grid_at(md, hidx, b - 1));
        vb.add(req_name(dict, instr_role(run.steps[b - 1])), grid_at(md, hidx, b));
      }
      for (uint32_t i = 0; i < mach.counters; ++i) {
        for (uint32_t e : mu[b][i])
          vb.add(req_name(dict, counter_role(i)), grid_at(md, hidx, e));
        if (b >= 1)
          for (uint32_t e : mu[b - 1][i])
            if (!mu[b][i].count(e))
              vb.add(req_name(dict, minus_role(i)), grid_at(md, hidx, e));
      }
      if (b + 1 < K) {  // primed copy of row b+1
        vb.add(req_name(dict, "N'"), grid_at(md, hidx, b));
        vb.add(req_name(dict, "S'"), grid_at(md, hidx, b + 1));
        vb.add(req_name(dict, state_role(mach.states[run.configs[b + 1].state]) + "'"),
               grid_at(md, hidx, b + 1));
        vb.add(req_name(dict, instr_role(run.steps[b]) + "'"), grid_at(md, hidx, b + 1));
        for (uint32_t i = 0; i < mach.counters; ++i)
          for (uint32_t e : mu[b][i])
            if (!mu[b + 1][i].count(e))
              vb.add(req_name(dict, minus_role(i) + "'"), grid_at(md, hidx, e));
      }
    }
  }
  vb.install(md);
  md.root = grid_at(md, 0, 0);
  return md;
}

// Recurrence-visit columns of one segment laid out backward: config j of a
// run ending at column `last` sits at column last - j, so visits are listed
// by ascending column.
std::vector<uint32_t> designated_columns(const Run& run, int ridx, uint32_t last) {
  std::vector<uint32_t> out;
  for (size_t j = run.configs.size(); j-- > 1;)
    if (run.configs[j].state == static_cast<uint32_t>(ridx))
      out.push_back(last - static_cast<uint32_t>(j));
  return out;
}

// Expanding lossy model: one backward segment per run between consecutive
// start columns, recurrence-visit diagonals starred, and pointer variables
// wiring each start column and each starred column to a distinct starred
// column of the next segment.
Model build_lossy_exp(const WitnessSpec& spec, const VarDictionary& dict) {
  const CounterMachine& mach = spec.machine;
  if (spec.runs.empty()) throw Error("witness: no runs supplied");
  int ridx = require_state(mach, spec.recur_state);
  if (ridx == 0)
    throw Error("witness: the recurrence state may not be the initial state "
                "(its visits must land inside segments, not on start columns)");
  size_t segs = spec.runs.size();
  std::vector<uint32_t> M(segs + 1, 0);
  std::vector<std::vector<uint32_t>> desig(segs + 1);
  for (size_t k = 1; k <= segs; ++k) {
    const Run& run = spec.runs[k - 1];
    std::string what = "run " + show(k);
    require_valid(mach, run, what);
    require_initial(mach, run, what);
    require_live(mach, run, run.configs.size(), what);
    M[k] = M[k - 1] + static_cast<uint32_t>(run.configs.size());
    desig[k] = designated_columns(run, ridx, M[k]);
    if (desig[k].size() < desig[k - 1].size() + 1)
      throw Error("witness: " + what + " must visit " + spec.recur_state +
                  " more often than its predecessor");
  }
  uint32_t last = M[segs];

  Model md = grid_model(product(make_linear(last + 1), make_difference(last + 2)));
  ValBuilder vb;
  const std::string& s_name = req_name(dict, "S");
  const std::string& n_name = req_name(dict, "N");
  const std::string& start_name = req_name(dict, "start");
  const std::string& star_name = req_name(dict, "S*");
  const std::string& r_name = req_name(dict, "R");
  for (uint32_t n = 0; n <= last; ++n) {
    vb.add(s_name, grid_at(md, n, n));
    vb.add(n_name, grid_at(md, n, n + 1));
  }
  vb.add(req_name(dict, state_role(mach.states[0])), grid_at(md, 0, 0));
  for (size_t k = 0; k <= segs; ++k)
    for (uint32_t v = 0; v < last + 2; ++v)
      vb.add(start_name, grid_at(md, M[k], v));
  for (size_t k = 1; k <= segs; ++k) {
    const Run& run = spec.runs[k - 1];
    ElemSets sets = segment_sets(mach, run, M[k]);
    for (uint32_t j = 0; j < run.configs.size(); ++j) {
      uint32_t c = M[k] - j;
      vb.add(req_name(dict, state_role(mach.states[run.configs[j].state])),
             grid_at(md, c, c));
      for (uint32_t i = 0; i < mach.counters; ++i)
        for (uint32_t e : sets[j][i])
          vb.add(req_name(dict, counter_role(i)), grid_at(md, c, e));
    }
    for (uint32_t d : desig[k]) vb.add(star_name, grid_at(md, d, d));
  }
  for (size_t k = 0; k < segs; ++k) {
    const std::vector<uint32_t>& next = desig[k + 1];
    vb.add(r_name, grid_at(md, M[k], next[0]));
    for (size_t t = 0; t < desig[k].size(); ++t)
      vb.add(r_name, grid_at(md, desig[k][t], next[t + 1]));
  }
  vb.install(md);
  md.root = grid_at(md, 0, 0);
  return md;
}

// Single backward segment on <T,<> x <T+1,!=>: the run laid out right to
// left with the whole last column marked start and end; exact kind.
Model build_lossy_fin(const WitnessSpec& spec, const VarDictionary& dict) {
  const CounterMachine& mach = spec.machine;
  const Run& run = first_run(spec);
  require_valid(mach, run, "run");
  require_initial(mach, run, "run");
  require_live(mach, run, run.configs.size(), "run");
  int ridx = require_state(mach, spec.recur_state);
  if (run.configs.back().state != static_cast<uint32_t>(ridx))
    throw Error("witness: run ends in " + mach.states[run.configs.back().state] +
                ", not the target state " + spec.recur_state);
  uint32_t total = static_cast<uint32_t>(run.configs.size());

  Model md = grid_model(product(make_linear(total), make_difference(total + 1)));
  ValBuilder vb;
  const std::string& s_name = req_name(dict, "S");
  const std::string& n_name = req_name(dict, "N");
  for (uint32_t n = 0; n < total; ++n) {
    vb.add(s_name, grid_at(md, n, n));
    vb.add(n_name, grid_at(md, n, n + 1));
  }
  for (uint32_t v = 0; v < total + 1; ++v) {
    vb.add(req_name(dict, "start"), grid_at(md, total - 1, v));
    vb.add(req_name(dict, "end"), grid_at(md, total - 1, v));
  }
  ElemSets sets = segment_sets(mach, run, total - 1);
  for (uint32_t j = 0; j < total; ++j) {
    uint32_t c = total - 1 - j;
    vb.add(req_name(dict, state_role(mach.states[run.configs[j].state])),
           grid_at(md, c, c));
    for (uint32_t i = 0; i < mach.counters; ++i)
      for (uint32_t e : sets[j][i])
        vb.add(req_name(dict, counter_role(i)), grid_at(md, c, e));
  }
  vb.install(md);
  md.root = grid_at(md, 0, 0);
  return md;
}

// ------------------------------------------------------------ verifying

bool lossy_rec_label(const std::string& label) {
  return label == "recinit" || label == "startpoints" || label == "qr" ||
         label == "recpoints" || label == "sstars" || label == "svuniq" ||
         label == "unipoints" || label == "recur-target";
}

// Classifier for failure worlds: true when the grid position only exists
// because the carrier was cut off (last represented column, first missing
// vertical, the reversed chain's limit point, or - for the expanding lossy
// kind - the recurrence machinery of the final segment, which has no next
// segment to point into).
std::function<bool(uint32_t, uint32_t)> boundary_for(const WitnessSpec& spec,
                                                     const std::string& label) {
  switch (spec.kind) {
    case WitnessKind::FwFin:
    case WitnessKind::LossyFin:
      return [](uint32_t, uint32_t) { return false; };
    case WitnessKind::FwRec: {
      uint32_t K = spec.K;
      return [K](uint32_t h, uint32_t v) { return h == K - 1 || v == K; };
    }
    case WitnessKind::BwInf:
    case WitnessKind::BwRec: {
      uint32_t K = spec.K;
      return [K](uint32_t h, uint32_t v) {
        return h == 0 || h == K + 1 || v == K - 1;
      };
    }
    case WitnessKind::Dense: {
      uint32_t K = spec.K;
      return [K](uint32_t h, uint32_t v) { return h == 0 || v == K - 1; };
    }
    case WitnessKind::LossyExp: {
      uint32_t last = 0;
      uint32_t prev = 0;
      for (const Run& r : spec.runs) {
        prev = last;
        last += static_cast<uint32_t>(r.configs.size());
      }
      bool rec = lossy_rec_label(label);
      return [last, prev, rec](uint32_t h, uint32_t v) {
        return h == last || v == last + 1 || (rec && h > prev);
      };
    }
  }
  throw Error("witness: unknown kind");
}

// -------------------------------------------------------------- decoding

std::vector<std::pair<uint32_t, Bits>> state_sets(const Model& md,
                                                  const VarDictionary& dict,
                                                  const CounterMachine& mach) {
  std::vector<std::pair<uint32_t, Bits>> out;
  for (uint32_t q = 0; q < mach.size(); ++q) {
    std::string role = state_role(mach.states[q]);
    if (dict.has_role(role)) out.emplace_back(q, md.val(dict.name_of(role)));
  }
  return out;
}

uint32_t state_at(const std::vector<std::pair<uint32_t, Bits>>& states, uint32_t w,
                  const std::string& where) {
  int found = -1;
  for (const auto& [q, set] : states) {
    if (!set.get(w)) continue;
    if (found >= 0) throw Error("decode: state marking not unique " + where);
    found = static_cast<int>(q);
  }
  if (found < 0) throw Error("decode: no state marking " + where);
  return static_cast<uint32_t>(found);
}

// Instruction markers present in the dictionary, in first-appearance order.
std::vector<std::pair<Instr, Bits>> marker_sets(const Model& md,
                                                const VarDictionary& dict,
                                                const CounterMachine& mach) {
  std::vector<std::pair<Instr, Bits>> out;
  std::set<std::string> seen;
  for (const auto& per_state : mach.instr)
    for (const Instruction& ins : per_state) {
      std::string role = instr_role(ins.op);
      if (!seen.insert(role).second) continue;
      if (dict.has_role(role)) out.emplace_back(ins.op, md.val(dict.name_of(role)));
    }
  return out;
}

Instr marker_at(const std::vector<std::pair<Instr, Bits>>& markers, uint32_t w,
                const std::string& where) {
  const Instr* found = nullptr;
  for (const auto& [op, set] : markers) {
    if (!set.get(w)) continue;
    if (found) throw Error("decode: instruction marker not unique " + where);
    found = &op;
  }
  if (!found) throw Error("decode: no instruction marker " + where);
  return *found;
}

void require_grid(const Model& md) {
  if (!md.has_meta) throw Error("decode: model carries no grid coordinates");
}

uint32_t require_root(const Model& md) {
  if (!md.root) throw Error("decode: model has no root");
  return *md.root;
}

void validate_decoded(const CounterMachine& mach, const Run& run) {
  if (auto v = run_violation(mach, run)) throw Error("decode: " + *v);
}

struct StairPoint {
  uint32_t world = 0;
  uint32_t state = 0;
  std::vector<uint64_t> counters;
};

// Walks the forward staircase from the root: per column the S-point with its
// state marking and counter counts, following each column's least next-point
// into the next column. With `endv` the walk stops at an end-marked
// next-point; without it, at the last column.
std::vector<StairPoint> walk_staircase(
    const Model& md, const Bits& S, const Bits& N, const Bits* endv,
    const std::vector<std::pair<uint32_t, Bits>>& states,
    const std::function<std::vector<uint64_t>(uint32_t)>& counts_at) {
  uint32_t root = require_root(md);
  if (!S.get(root)) throw Error("decode: root is not a staircase point");
  uint32_t columns = static_cast<uint32_t>(md.meta.columns.size());
  std::vector<StairPoint> out;
  uint32_t w = root;
  for (;;) {
    uint32_t c = md.meta.coord[w].first;
    StairPoint pt;
    pt.world = w;
    pt.state = state_at(states, w, "at column " + show(c));
    pt.counters = counts_at(c);
    out.push_back(std::move(pt));

    std::vector<uint32_t> nexts;
    for (uint32_t x : md.meta.columns[c])
      if (N.get(x)) nexts.push_back(x);
    if (endv) {
      bool done = false;
      for (uint32_t x : nexts)
        if (endv->get(x)) done = true;
      if (done) break;
    }
    if (nexts.empty()) {
      if (!endv && c + 1 >= columns) break;  // truncation edge
      throw Error("decode: no next marker at column " + show(c));
    }
    if (c + 1 >= columns) {
      if (!endv) break;
      throw Error("decode: ran out of columns before an end marker");
    }
    uint32_t best = nexts.front();
    for (uint32_t x : nexts)
      if (md.meta.coord[x].second < md.meta.coord[best].second) best = x;
    int nxt = md.meta.at(c + 1, md.meta.coord[best].second);
    if (nxt < 0 || !S.get(static_cast<uint32_t>(nxt)))
      throw Error("decode: no staircase point at column " + show(c + 1));
    w = static_cast<uint32_t>(nxt);
  }
  return out;
}

std::function<std::vector<uint64_t>(uint32_t)> fw_counts(const Model& md,
                                                         const VarDictionary& dict,
                                                         const CounterMachine& mach) {
  auto sets = std::make_shared<std::vector<std::pair<Bits, Bits>>>();
  for (uint32_t i = 0; i < mach.counters; ++i)
    sets->emplace_back(md.val(req_name(dict, plus_role(i))),
                       md.val(req_name(dict, minus_role(i))));
  return [&md, sets](uint32_t c) {
    std::vector<uint64_t> out;
    for (const auto& [plus, minus] : *sets) {
      uint64_t n = 0;
      for (uint32_t x : md.meta.columns[c])
        if (plus.get(x) && !minus.get(x)) ++n;
      out.push_back(n);
    }
    return out;
  };
}

std::function<std::vector<uint64_t>(uint32_t)> live_counts(const Model& md,
                                                           const VarDictionary& dict,
                                                           const CounterMachine& mach) {
  auto sets = std::make_shared<std::vector<Bits>>();
  for (uint32_t i = 0; i < mach.counters; ++i)
    sets->push_back(md.val(req_name(dict, counter_role(i))));
  return [&md, sets](uint32_t c) {
    std::vector<uint64_t> out;
    for (const Bits& set : *sets) {
      uint64_t n = 0;
      for (uint32_t x : md.meta.columns[c])
        if (set.get(x)) ++n;
      out.push_back(n);
    }
    return out;
  };
}

DecodedRun decode_fw(const Model& md, const CounterMachine& mach,
                     const CompiledEncoding& enc, bool finite) {
  require_grid(md);
  const VarDictionary& dict = enc.dict;
  Bits S = md.val(req_name(dict, "S"));
  Bits N = md.val(req_name(dict, "N"));
  Bits endv;
  if (finite) endv = md.val(req_name(dict, "end"));
  auto states = state_sets(md, dict, mach);
  auto stairs = walk_staircase(md, S, N, finite ? &endv : nullptr, states,
                               fw_counts(md, dict, mach));

  DecodedRun out;
  out.run.kind = RunKind::Reliable;
  for (const StairPoint& pt : stairs) {
    out.run.configs.push_back({pt.state, pt.counters});
    out.counts.push_back(pt.counters);
    out.y.push_back(pt.world);
  }
  for (size_t t = 0; t + 1 < out.run.configs.size(); ++t) {
    auto cands = successors(mach, out.run.configs[t]);
    const Instr* hit = nullptr;
    for (const auto& [op, next] : cands)
      if (next == out.run.configs[t + 1]) {
        hit = &op;
        break;
      }
    if (!hit) {
      std::string msg = "decode: step " + show(t) + " matches no instruction (tried:";
      for (const auto& [op, next] : cands) msg += " " + instr_name(op);
      msg += ")";
      throw Error(msg);
    }
    out.run.steps.push_back(*hit);
  }
  validate_decoded(mach, out.run);
  return out;
}

DecodedRun decode_bw(const Model& md, const CounterMachine& mach,
                     const CompiledEncoding& enc) {
  const VarDictionary& dict = enc.dict;
  Bits S = md.val(req_name(dict, "S"));
  Bits N = md.val(req_name(dict, "N"));
  auto states = state_sets(md, dict, mach);
  auto markers = marker_sets(md, dict, mach);
  std::vector<Bits> counters;
  for (uint32_t i = 0; i < mach.counters; ++i)
    counters.push_back(md.val(req_name(dict, counter_role(i))));

  uint32_t n = static_cast<uint32_t>(md.frame.size());
  std::vector<Rank> rank(n);
  for (uint32_t w = 0; w < n; ++w) rank[w] = horizontal_rank(md.frame, w);
  auto rank_is = [&](uint32_t w, uint32_t m) {
    return !rank[w].infinite && rank[w].value == m;
  };

  DecodedRun out;
  out.run.kind = RunKind::Reliable;
  for (uint32_t m = 0;; ++m) {
    std::vector<uint32_t> hits;
    for (uint32_t w = 0; w < n; ++w)
      if (S.get(w) && rank_is(w, m)) hits.push_back(w);
    if (hits.empty()) break;
    if (hits.size() > 1)
      throw Error("decode: diagonal point not unique at rank " + show(m));
    out.u.push_back(hits.front());
  }
  if (out.u.empty()) throw Error("decode: no staircase");

  uint32_t total = static_cast<uint32_t>(out.u.size());
  uint32_t root = require_root(md);
  for (uint32_t m = 0; m < total; ++m) {
    uint32_t um = out.u[m];
    std::vector<uint32_t> column{um};
    for (uint32_t x = 0; x < n; ++x)
      if (x != um && md.frame.edge1(x, um)) column.push_back(x);
    uint32_t q = state_at(states, um, "at rank " + show(m));
    std::vector<uint64_t> cs;
    for (const Bits& set : counters) {
      uint64_t cnt = 0;
      for (uint32_t x : column)
        if (set.get(x)) ++cnt;
      cs.push_back(cnt);
    }
    out.run.configs.push_back({q, cs});
    out.counts.push_back(cs);
    if (m > 0) out.run.steps.push_back(marker_at(markers, um, "at rank " + show(m)));
    if (m + 1 < total) {
      std::vector<uint32_t> ns;
      for (uint32_t w = 0; w < n; ++w)
        if (N.get(w) && rank_is(w, m + 1)) ns.push_back(w);
      if (ns.size() != 1)
        throw Error("decode: next marker not unique at rank " + show(m + 1));
      out.v.push_back(ns.front());
      std::vector<uint32_t> ys;
      if (md.frame.edge0(root, ns.front())) ys.push_back(root);
      for (uint32_t x = 0; x < n; ++x)
        if (md.frame.edge1(root, x) && md.frame.edge0(x, ns.front())) ys.push_back(x);
      if (ys.size() != 1)
        throw Error("decode: top-column point not unique for rank " + show(m));
      out.y.push_back(ys.front());
    }
  }
  validate_decoded(mach, out.run);
  return out;
}

DecodedRun decode_dense(const Model& md, const CounterMachine& mach,
                        const CompiledEncoding& enc) {
  require_grid(md);
  const VarDictionary& dict = enc.dict;
  Bits S = md.val(req_name(dict, "S"));
  auto states = state_sets(md, dict, mach);
  auto markers = marker_sets(md, dict, mach);
  auto counts_at = live_counts(md, dict, mach);

  DecodedRun out;
  out.run.kind = RunKind::Reliable;
  uint32_t n = static_cast<uint32_t>(md.frame.size());
  uint32_t verticals = static_cast<uint32_t>(md.meta.vnames.size());
  for (uint32_t b = 0; b < verticals; ++b) {
    // Block b is the set of points carrying the staircase marker at
    // vertical b; any of them represents the row.
    int rep = -1;
    for (uint32_t w = 0; w < n; ++w)
      if (S.get(w) && md.meta.coord[w].second == b)
        if (rep < 0 || md.meta.coord[w].first < md.meta.coord[rep].first) rep = w;
    if (rep < 0) break;
    uint32_t w = static_cast<uint32_t>(rep);
    std::string where = "at block " + show(b);
    out.run.configs.push_back(
        {state_at(states, w, where), counts_at(md.meta.coord[w].first)});
    out.counts.push_back(out.run.configs.back().counters);
    out.y.push_back(w);
    out.u.push_back(w);
    if (b > 0) out.run.steps.push_back(marker_at(markers, w, where));
  }
  if (out.run.configs.empty()) throw Error("decode: no staircase");
  validate_decoded(mach, out.run);
  return out;
}

// One segment of a lossy model, read right to left from column `hi` down to
// column lo+1 (exclusive bound lo).
DecodedRun decode_segment(const Model& md, const CounterMachine& mach, const Bits& S,
                          const std::vector<std::pair<uint32_t, Bits>>& states,
                          const std::function<std::vector<uint64_t>(uint32_t)>& counts_at,
                          uint32_t lo, uint32_t hi) {
  DecodedRun out;
  out.run.kind = RunKind::Lossy;
  for (uint32_t c = hi; c > lo; --c) {
    std::vector<uint32_t> ss;
    for (uint32_t x : md.meta.columns[c])
      if (S.get(x)) ss.push_back(x);
    if (ss.size() != 1)
      throw Error("decode: staircase point not unique at column " + show(c));
    uint32_t w = ss.front();
    out.run.configs.push_back(
        {state_at(states, w, "at column " + show(c)), counts_at(c)});
    out.counts.push_back(out.run.configs.back().counters);
    out.y.push_back(w);
  }
  if (!(out.run.configs.front() == initial_configuration(mach)))
    throw Error("decode: segment does not start at the initial configuration");
  for (size_t j = 0; j + 1 < out.run.configs.size(); ++j) {
    auto op = lossy_step(mach, out.run.configs[j], out.run.configs[j + 1]);
    if (!op)
      throw Error("decode: segment step " + show(j) + " admits no instruction");
    out.run.steps.push_back(*op);
  }
  validate_decoded(mach, out.run);
  return out;
}

DecodedRun decode_lossy_fin(const Model& md, const CounterMachine& mach,
                            const CompiledEncoding& enc) {
  require_grid(md);
  const VarDictionary& dict = enc.dict;
  Bits S = md.val(req_name(dict, "S"));
  Bits N = md.val(req_name(dict, "N"));
  Bits endv = md.val(req_name(dict, "end"));
  auto states = state_sets(md, dict, mach);
  auto counts_at = live_counts(md, dict, mach);
  // The forward staircase finds the end-marked column; the run then reads
  // right to left along it.
  auto stairs = walk_staircase(md, S, N, &endv, states, counts_at);

  DecodedRun out;
  out.run.kind = RunKind::Lossy;
  for (size_t t = stairs.size(); t-- > 0;) {
    const StairPoint& pt = stairs[t];
    out.run.configs.push_back({pt.state, pt.counters});
    out.counts.push_back(pt.counters);
    out.y.push_back(pt.world);
  }
  if (!(out.run.configs.front() == initial_configuration(mach)))
    throw Error("decode: segment does not start at the initial configuration");
  for (size_t j = 0; j + 1 < out.run.configs.size(); ++j) {
    auto op = lossy_step(mach, out.run.configs[j], out.run.configs[j + 1]);
    if (!op)
      throw Error("decode: segment step " + show(j) + " admits no instruction");
    out.run.steps.push_back(*op);
  }
  validate_decoded(mach, out.run);
  return out;
}

}  // namespace

// --------------------------------------------------------------- public

const char* witness_kind_tag(WitnessKind k) {
  switch (k) {
    case WitnessKind::FwRec: return "fw_rec";
    case WitnessKind::FwFin: return "fw_fin";
    case WitnessKind::BwInf: return "bw_inf";
    case WitnessKind::BwRec: return "bw_rec";
    case WitnessKind::Dense: return "dense";
    case WitnessKind::LossyExp: return "lossy_exp";
    case WitnessKind::LossyFin: return "lossy_fin";
  }
  throw Error("witness: unknown kind");
}

WitnessKind witness_kind_from_tag(const std::string& tag) {
  static const WitnessKind kinds[] = {
      WitnessKind::FwRec,  WitnessKind::FwFin, WitnessKind::BwInf,
      WitnessKind::BwRec,  WitnessKind::Dense, WitnessKind::LossyExp,
      WitnessKind::LossyFin};
  for (WitnessKind k : kinds)
    if (tag == witness_kind_tag(k)) return k;
  throw ParseError("unknown witness kind '" + tag + "'");
}

Target witness_target(WitnessKind k) {
  switch (k) {
    case WitnessKind::FwRec: return Target::FwRecurrence;
    case WitnessKind::FwFin: return Target::FwFiniteReach;
    case WitnessKind::BwInf: return Target::BwNonTermination;
    case WitnessKind::BwRec: return Target::BwRecurrence;
    case WitnessKind::Dense: return Target::DenseNonTermination;
    case WitnessKind::LossyExp: return Target::LossyOmegaReach;
    case WitnessKind::LossyFin: return Target::LossyFiniteReach;
  }
  throw Error("witness: unknown kind");
}

Model build_witness(const WitnessSpec& spec) {
  CompiledEncoding enc =
      compile_machine(spec.machine, witness_target(spec.kind), spec.recur_state);
  switch (spec.kind) {
    case WitnessKind::FwRec: return build_fw(spec, enc.dict, false);
    case WitnessKind::FwFin: return build_fw(spec, enc.dict, true);
    case WitnessKind::BwInf: return build_bw(spec, enc.dict, false);
    case WitnessKind::BwRec: return build_bw(spec, enc.dict, true);
    case WitnessKind::Dense: return build_dense(spec, enc.dict);
    case WitnessKind::LossyExp: return build_lossy_exp(spec, enc.dict);
    case WitnessKind::LossyFin: return build_lossy_fin(spec, enc.dict);
  }
  throw Error("witness: unknown kind");
}

VerifyReport verify_witness(const WitnessSpec& spec, const Model& m,
                            const CompiledEncoding& enc) {
  if (!m.root) throw Error("verify: model has no root");
  if (!m.has_meta) throw Error("verify: model carries no grid coordinates");
  Checker checker(m);
  VerifyReport rep;
  rep.all_hold = true;
  rep.boundary_clean = true;
  for (const auto& [label, f] : enc.conjuncts) {
    ConjunctReport cr;
    cr.label = label;
    std::vector<uint32_t> bad = failure_points(checker, *m.root, f);
    cr.holds = bad.empty();
    auto boundary = boundary_for(spec, label);
    cr.boundary_only = !bad.empty();
    for (uint32_t w : bad) {
      FailurePoint fp;
      fp.h = m.meta.coord[w].first;
      fp.v = m.meta.coord[w].second;
      fp.boundary = boundary(fp.h, fp.v);
      if (!fp.boundary) cr.boundary_only = false;
      cr.failures.push_back(fp);
    }
    rep.all_hold = rep.all_hold && cr.holds;
    rep.boundary_clean = rep.boundary_clean && (cr.holds || cr.boundary_only);
    rep.conjuncts.push_back(std::move(cr));
  }
  return rep;
}

void print_report(std::ostream& os, const VerifyReport& r) {
  for (const ConjunctReport& cr : r.conjuncts) {
    os << cr.label << ": ";
    if (cr.holds) {
      os << "HOLDS\n";
      continue;
    }
    os << "FAILS at ";
    for (size_t i = 0; i < cr.failures.size(); ++i) {
      const FailurePoint& fp = cr.failures[i];
      if (i) os << ", ";
      os << "(" << fp.h << "," << fp.v << ") ["
         << (fp.boundary ? "boundary" : "interior") << "]";
    }
    os << "\n";
  }
}

std::string print_report(const VerifyReport& r) {
  std::ostringstream os;
  print_report(os, r);
  return os.str();
}

DecodedRun decode_run(const Model& m, const CounterMachine& mach,
                      const CompiledEncoding& enc, WitnessKind kind) {
  switch (kind) {
    case WitnessKind::FwRec: return decode_fw(m, mach, enc, false);
    case WitnessKind::FwFin: return decode_fw(m, mach, enc, true);
    case WitnessKind::BwInf:
    case WitnessKind::BwRec: return decode_bw(m, mach, enc);
    case WitnessKind::Dense: return decode_dense(m, mach, enc);
    case WitnessKind::LossyFin: return decode_lossy_fin(m, mach, enc);
    case WitnessKind::LossyExp:
      throw Error(
          "decode: expanding lossy models hold several segments; use "
          "decode_segments");
  }
  throw Error("decode: unknown kind");
}

std::vector<DecodedRun> decode_segments(const Model& m, const CounterMachine& mach,
                                        const CompiledEncoding& enc) {
  require_grid(m);
  const VarDictionary& dict = enc.dict;
  Bits S = m.val(req_name(dict, "S"));
  Bits start = m.val(req_name(dict, "start"));
  auto states = state_sets(m, dict, mach);
  auto counts_at = live_counts(m, dict, mach);

  std::vector<uint32_t> anchors;
  for (uint32_t h = 0; h < m.meta.columns.size(); ++h) {
    size_t marked = 0;
    for (uint32_t x : m.meta.columns[h])
      if (start.get(x)) ++marked;
    if (marked == 0) continue;
    if (marked != m.meta.columns[h].size())
      throw Error("decode: start marking not column-uniform at column " + show(h));
    anchors.push_back(h);
  }
  if (anchors.empty() || anchors.front() != 0)
    throw Error("decode: anchor column is not start-marked");
  if (anchors.size() < 2) throw Error("decode: no segments between start columns");

  std::vector<DecodedRun> out;
  for (size_t k = 1; k < anchors.size(); ++k)
    out.push_back(decode_segment(m, mach, S, states, counts_at, anchors[k - 1],
                                 anchors[k]));
  return out;
}

ClaimsReport verify_backward_claims(const Model& m, const CompiledEncoding& enc,
                                    uint32_t K) {
  ClaimsReport rep;
  if (K < 2) return rep;
  const VarDictionary& dict = enc.dict;
  Bits S = m.val(req_name(dict, "S"));
  Bits N = m.val(req_name(dict, "N"));
  std::vector<Bits> counters;
  for (uint32_t i = 0; dict.has_role(counter_role(i)); ++i)
    counters.push_back(m.val(dict.name_of(counter_role(i))));
  auto viol = [&rep](std::string msg) { rep.violations.push_back(std::move(msg)); };

  uint32_t n = static_cast<uint32_t>(m.frame.size());
  std::vector<Rank> rank(n);
  for (uint32_t w = 0; w < n; ++w) rank[w] = horizontal_rank(m.frame, w);
  auto rank_is = [&](uint32_t w, uint32_t r) {
    return !rank[w].infinite && rank[w].value == r;
  };
  Bits dia_n(m.frame.size());
  for (uint32_t w = 0; w < n; ++w)
    for (uint32_t x = 0; x < n && !dia_n.get(w); ++x)
      if (m.frame.edge0(w, x) && N.get(x)) dia_n.set(w);

  // Staircase points: u_m up to rank K-1 (the counting check needs the last
  // interior column's successor), v_m up to rank K-2.
  std::vector<std::optional<uint32_t>> u(K), v(K);
  for (uint32_t r = 0; r < K; ++r) {
    std::vector<uint32_t> hits;
    for (uint32_t w = 0; w < n; ++w)
      if (S.get(w) && rank_is(w, r)) hits.push_back(w);
    if (hits.size() == 1)
      u[r] = hits.front();
    else
      viol("diagonal point at rank " + show(r) + ": expected 1 candidate, found " +
           show(hits.size()));
  }
  for (uint32_t r = 0; r + 1 < K; ++r) {
    std::vector<uint32_t> hits;
    for (uint32_t w = 0; w < n; ++w)
      if (N.get(w) && rank_is(w, r + 1)) hits.push_back(w);
    if (hits.size() == 1)
      v[r] = hits.front();
    else
      viol("next marker at rank " + show(r + 1) + ": expected 1 candidate, found " +
           show(hits.size()));
  }

  if (!m.root) {
    viol("model has no root");
    return rep;
  }
  uint32_t root = *m.root;
  std::vector<uint32_t> root_col{root};
  for (uint32_t x = 0; x < n; ++x)
    if (m.frame.edge1(root, x)) root_col.push_back(x);

  for (uint32_t r = 0; r + 1 < K; ++r) {
    if (!v[r]) continue;
    std::vector<uint32_t> ys;
    for (uint32_t x : root_col)
      if (m.frame.edge0(x, *v[r])) ys.push_back(x);
    if (ys.size() != 1)
      viol("top-column point for rank " + show(r) + ": expected 1 candidate, found " +
           show(ys.size()));
    if (u[r] && !m.frame.edge0(*v[r], *u[r]))
      viol("next marker at rank " + show(r + 1) +
           " does not step down to the diagonal point at rank " + show(r));
    if (r > 0 && v[r - 1] && u[r] && !m.frame.edge1(*v[r - 1], *u[r]))
      viol("next marker at rank " + show(r) +
           " is not vertically aligned with the diagonal point at rank " + show(r));
  }

  // Columns: constant rank, half-grid points, and the sightline
  // characterization.
  std::vector<std::vector<uint32_t>> column(K);
  for (uint32_t r = 0; r < K; ++r) {
    if (!u[r]) continue;
    column[r].push_back(*u[r]);
    for (uint32_t x = 0; x < n; ++x)
      if (x != *u[r] && m.frame.edge1(x, *u[r])) column[r].push_back(x);
  }
  for (uint32_t r = 0; r + 1 < K; ++r) {
    if (!u[r]) continue;
    for (uint32_t x : column[r])
      if (!rank_is(x, r))
        viol("rank not constant on column " + show(r) + ": world " +
             m.frame.names[x] + " has rank " +
             (rank[x].infinite ? std::string("infinity") : show(rank[x].value)));
    std::vector<uint32_t> xs;  // x_{r,t} for t < r, in t-order
    bool xs_ok = true;
    for (uint32_t t = 0; t < r; ++t) {
      if (!u[t]) {
        xs_ok = false;
        continue;
      }
      std::vector<uint32_t> hits;
      for (uint32_t x : column[r])
        if (m.frame.edge0(x, *u[t])) hits.push_back(x);
      if (hits.size() != 1) {
        viol("half-grid point (" + show(r) + "," + show(t) +
             "): expected 1 candidate, found " + show(hits.size()));
        xs_ok = false;
        continue;
      }
      xs.push_back(hits.front());
    }
    if (xs_ok) {
      std::set<uint32_t> distinct(xs.begin(), xs.end());
      if (distinct.size() != xs.size())
        viol("half-grid points on column " + show(r) + " are not pairwise distinct");
      std::set<uint32_t> sight;
      for (uint32_t x : column[r])
        if (N.get(x) || dia_n.get(x)) sight.insert(x);
      if (sight != distinct)
        viol("column " + show(r) +
             ": the points seeing a next marker are not exactly the half-grid "
             "points");
      std::vector<uint32_t> in_col_n;
      for (uint32_t x : column[r])
        if (N.get(x)) in_col_n.push_back(x);
      if (r == 0) {
        if (!in_col_n.empty()) viol("column 0 carries a next marker");
      } else if (in_col_n.size() != 1 || xs.empty() || in_col_n.front() != xs.back()) {
        viol("column " + show(r) +
             ": the next marker is not the top half-grid point");
      } else if (v[r - 1] && in_col_n.front() != *v[r - 1]) {
        viol("column " + show(r) + ": the in-column next marker is not v_" +
             show(r - 1));
      }
    }
    // Counting: every element alive through column r+1 was alive at column r.
    if (u[r + 1]) {
      for (uint32_t i = 0; i < counters.size(); ++i) {
        const Bits& ci = counters[i];
        uint64_t all_next = 0;
        for (uint32_t x : column[r + 1]) {
          if (!dia_n.get(x)) continue;
          bool all = true;
          for (uint32_t z = 0; z < n && all; ++z)
            if (m.frame.edge0(x, z) && (N.get(z) || dia_n.get(z)) && !ci.get(z))
              all = false;
          if (all) ++all_next;
        }
        uint64_t here = 0;
        for (uint32_t x : column[r])
          if (ci.get(x)) ++here;
        if (all_next != here)
          viol("counter " + show(i) + ": column " + show(r + 1) + " carries " +
               show(all_next) + " persistent elements but column " + show(r) +
               " holds " + show(here));
      }
    }
  }
  rep.checked = K - 1;
  return rep;
}

}  // namespace bimodal
