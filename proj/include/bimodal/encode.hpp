// Compilers from counter machines and plain formulas into the bimodal
// encodings: staircase grids, counter layers, instruction gadgets, whole
// machine targets, the tick translation, interval uniformity constraints,
// and the frame-class reductions.
#pragma once

#include "bimodal/formula.hpp"
#include "bimodal/machine.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace bimodal {

// A compiled formula kept in labeled pieces, so model reports can speak
// about individual conjuncts. `formula` is always the right-fold
// conjunction of `conjuncts` in order; `dict` maps stable roles (S, N,
// S_q0, C0+, I_inc0, ...) to the generated variable spellings.
struct CompiledEncoding {
  std::string target;
  uint64_t machine_hash = 0;  // 0 when no machine participates
  Formula formula;
  VarDictionary dict;
  std::vector<std::pair<std::string, Formula>> conjuncts;

  bool has_conjunct(const std::string& label) const;
  Formula conjunct(const std::string& label) const;  // throws Error
};

enum class GridVariant { Fw, Fin, Bw, Star, Unique, UniqueFin };
CompiledEncoding compile_grid(GridVariant v);

enum class CounterVariant { Fw, Bw, BwBullet, Lossy };
CompiledEncoding compile_counter_layer(CounterVariant v, uint32_t counters);

// Per-counter change formulas and the per-instruction gadget. The bullet
// variant is, node for node, the tick translation of the backward one.
Formula compile_fix(CounterVariant v, uint32_t i);
Formula compile_inc(CounterVariant v, uint32_t i);
Formula compile_dec(CounterVariant v, uint32_t i);
Formula compile_op_gadget(CounterVariant v, Instr op, uint32_t counters);

enum class Target {
  FwRecurrence,
  FwFiniteReach,
  BwNonTermination,
  BwRecurrence,
  DenseNonTermination,
  LossyOmegaReach,
  LossyFiniteReach,
};
const char* target_tag(Target t);

// recur_state names the distinguished state for the recurrence/reach
// targets and is ignored by the nontermination ones. Throws Error on an
// unknown state or when a required recur_state is missing.
CompiledEncoding compile_machine(const CounterMachine& m, Target t,
                                 const std::string& recur_state = "");

// The two-step horizontal diamond that skips exactly one tick change, its
// dual, the coherence conjunct making tick values column-constant, and the
// translation replacing every horizontal diamond in f by the macro.
Formula dia_bullet(const std::string& tick, Formula f);
Formula box_bullet(const std::string& tick, Formula f);
Formula tick_coherence(const std::string& tick);
Formula bullet_translate(Formula f, const std::string& tick);

// Five conjuncts forcing p to hold uniformly across each tick interval,
// with a fresh primed companion variable p'.
CompiledEncoding compile_interval(const std::string& p,
                                  const std::string& tick = "@Tick");

// Satisfiability transfer between frame classes: relativize to a fresh
// domain variable (closed under the mode's direction up to the modal depth
// of f), and the one-conjunct product-to-decreasing guard.
enum class Relativization { Decreasing, Expanding };
Formula relativize(Formula f, Relativization mode);
Formula product_to_decreasing(Formula f);

// Marker translation: one fresh variable per subformula of f, f with
// vertical diamonds weakened through the markers, and the bookkeeping
// formula keeping markers truthful along the horizontal order.
CompiledEncoding diff_to_linear(Formula f);

// Text format: "target:" line, optional "machine:" hash line, dictionary
// lines "role = name", then one "conjunct <label>: <formula>" per piece.
std::string print_encoding(const CompiledEncoding& enc);
CompiledEncoding parse_encoding(const std::string& text);

}  // namespace bimodal
