// Minsky counter machines with at least two counters: reliable and lossy
// step semantics, bounded run enumeration, and bound-qualified oracles for
// the five decision problems the encodings target.
#pragma once

#include "bimodal/formula.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bimodal {

enum class InstrKind : uint8_t { Inc, Dec, Zero };

// The operation half of an instruction; what the I_iota variables range over.
struct Instr {
  InstrKind kind = InstrKind::Inc;
  uint32_t counter = 0;

  friend bool operator==(const Instr& a, const Instr& b) {
    return a.kind == b.kind && a.counter == b.counter;
  }
  friend bool operator!=(const Instr& a, const Instr& b) { return !(a == b); }
};

std::string instr_name(const Instr& op);  // "inc0", "dec1", "zero0"

// One entry of I_q: perform op, move to target.
struct Instruction {
  Instr op;
  uint32_t target = 0;

  friend bool operator==(const Instruction& a, const Instruction& b) {
    return a.op == b.op && a.target == b.target;
  }
};

struct CounterMachine {
  std::vector<std::string> states;  // initial state = states[0]
  std::vector<bool> halting;
  uint32_t counters = 0;  // N > 1
  std::vector<std::vector<Instruction>> instr;  // per state, file order;
                                                // empty exactly on halting states

  size_t size() const { return states.size(); }
  int state_index(const std::string& name) const;  // -1 when absent
  bool is_halting(uint32_t q) const { return halting[q]; }
};

struct Configuration {
  uint32_t state = 0;
  std::vector<uint64_t> counters;

  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.state == b.state && a.counters == b.counters;
  }
};

// The all-zero start ⟨q0, 0...0⟩.
Configuration initial_configuration(const CounterMachine& m);

enum class RunKind : uint8_t { Reliable, Lossy };

struct Run {
  RunKind kind = RunKind::Reliable;
  std::vector<Configuration> configs;
  std::vector<Instr> steps;  // steps[i] connects configs[i] to configs[i+1]
};

// Nothing when r is a well-formed run of m (consecutive pairs satisfy the
// reliable step relation, or the lossy one for lossy kind, with the recorded
// label landing in a declared instruction); otherwise a description of the
// first violation.
std::optional<std::string> run_violation(const CounterMachine& m, const Run& r);

// Exactly the reliable steps enabled at cfg, in declaration order.
std::vector<std::pair<Instr, Configuration>> successors(const CounterMachine& m,
                                                        const Configuration& cfg);

// First declared instruction under which cfg can lossily move to cfg2:
// some lower approximation of cfg steps reliably to an upper approximation
// of cfg2. Decided by closed-form counter comparisons per op kind.
std::optional<Instr> lossy_step(const CounterMachine& m, const Configuration& cfg,
                                const Configuration& cfg2);

// All lossy successors of cfg with counters capped at `cap`, grouped per
// declared instruction, counter vectors in lexicographic order.
std::vector<std::pair<Instr, Configuration>> lossy_successors(const CounterMachine& m,
                                                              const Configuration& cfg,
                                                              uint64_t cap);

// Depth-first enumeration of the maximal runs from `start` with at most
// max_len configurations (maximal: hit the bound or ran out of steps).
// The callback returns false to stop the walk. Lossy kind requires a
// counter cap (Error otherwise); reliable kind ignores it.
void for_each_run(const CounterMachine& m, const Configuration& start, size_t max_len,
                  RunKind kind, std::optional<uint64_t> counter_cap,
                  const std::function<bool(const Run&)>& visit);

std::vector<Run> bounded_runs(const CounterMachine& m, const Configuration& start,
                              size_t max_len, RunKind kind,
                              std::optional<uint64_t> counter_cap = std::nullopt);

// The five decision problems. `target` names q_r (ignored for
// NonTermination); `count` is the visit quota for the recurrence flavors.
struct Problem {
  enum class Kind {
    NonTermination,
    Reachability,
    Recurrence,
    LossyReachability,
    LossyOmegaReachability,
  };
  Kind kind = Kind::NonTermination;
  std::string target;
  uint64_t count = 1;
};

struct OracleParams {
  size_t steps = 0;  // step (edge) budget, not configuration count
  std::optional<uint64_t> counter_cap;  // required for the lossy problems
  std::optional<Configuration> start;   // default ⟨q0, 0...0⟩
};

// Bound-qualified verdict: yes carries a witness run; no means only "not
// within these bounds" (the unbounded problems are undecidable, so no
// stronger claim is ever made).
struct OracleResult {
  bool yes = false;
  std::optional<Run> witness;
};

OracleResult bounded_oracle(const CounterMachine& m, const Problem& p,
                            const OracleParams& params);

// The pre-fill transformer M^{sigma0}: a fresh chain of Inc steps builds
// sigma0's counters from the all-zero start, then control enters
// sigma0.state. When sigma0 has zero counters the states are just rotated
// so that sigma0.state comes first. Reaching q from all-zero in
// sum(counters) + d steps then matches reaching q from sigma0 in d steps.
CounterMachine prefill(const CounterMachine& m, const Configuration& sigma0);

// Text format:
//   counters: N
//   states: q0 q1 ...
//   halt: h ...          (may be empty or absent)
//   q: inc I -> q'       (one instruction per line; also dec / zero)
CounterMachine parse_machine(const std::string& text);
std::string print_machine(const CounterMachine& m);

// FNV-1a over the canonical print; stamped into compiled encoding headers.
uint64_t machine_hash(const CounterMachine& m);

}  // namespace bimodal
