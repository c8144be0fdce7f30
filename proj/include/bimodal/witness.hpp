// Explicit witness models for the compiled encodings: forward grids (exact
// finite and truncated recurrence), truncated backward grids (plain and with
// the recurrence gadget), the tick-block chain model, and the expanding-run
// lossy models. Ships the per-conjunct verifier with truncation-boundary
// classification, the run decoders, and the backward-grid structure checks.
#pragma once

#include "bimodal/check.hpp"
#include "bimodal/encode.hpp"
#include "bimodal/machine.hpp"
#include "bimodal/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace bimodal {

enum class WitnessKind : uint8_t {
  FwRec,     // <K,<> x <K+1,!=>, staircase plus monotone counter history
  FwFin,     // <T,<> x <T+1,!=>, end marked at (T-1,T); exact (all conjuncts hold)
  BwInf,     // truncated <omega+1,>> x <K,!=>, diagonal staircase going up
  BwRec,     // BwInf plus the parity and recurrence-pointer valuation
  Dense,     // BwInf smeared over width-w tick blocks on a reversed chain
  LossyExp,  // forward grid carrying one backward run segment per supplied run
  LossyFin,  // single backward segment on <T,<> x <T+1,!=>; exact
};

// CLI names: fw_rec, fw_fin, bw_inf, bw_rec, dense, lossy_exp, lossy_fin.
const char* witness_kind_tag(WitnessKind k);
WitnessKind witness_kind_from_tag(const std::string& tag);  // throws ParseError

// The compilation target whose conjuncts the kind is built to satisfy.
Target witness_target(WitnessKind k);

struct WitnessSpec {
  WitnessKind kind = WitnessKind::FwFin;
  CounterMachine machine;
  // FwFin/LossyFin and the truncated kinds read runs[0] (a reliable run for
  // the grid kinds, reliable or lossy for LossyFin); LossyExp lays out one
  // backward segment per entry and needs strictly growing recur-visit counts.
  std::vector<Run> runs;
  uint32_t K = 0;         // horizontal truncation depth (FwRec/BwInf/BwRec/Dense)
  uint32_t width = 2;     // chain points per tick block (Dense only)
  std::string recur_state;  // q_r for the recurrence/reach kinds
};

// The paper-literal valuation on the kind's carrier. Throws Error when the
// supplied runs do not validate, start off the all-zero configuration, visit
// a halting state the encoding's partition excludes, or are shorter than K.
Model build_witness(const WitnessSpec& spec);

struct FailurePoint {
  uint32_t h = 0;  // horizontal index per the model's grid meta
  uint32_t v = 0;
  bool boundary = false;
};

struct ConjunctReport {
  std::string label;
  bool holds = false;
  std::vector<FailurePoint> failures;  // empty iff holds
  bool boundary_only = false;          // all failures on the truncation edge
};

struct VerifyReport {
  std::vector<ConjunctReport> conjuncts;  // encoding order
  bool all_hold = false;
  bool boundary_clean = false;  // every conjunct holds or fails boundary-only
};

// Checks every labeled conjunct of enc at m's root and classifies each
// failure world against spec's truncation boundary (computed from the kind,
// K, width, and the run lengths; exact kinds have an empty boundary).
VerifyReport verify_witness(const WitnessSpec& spec, const Model& m,
                            const CompiledEncoding& enc);

// One line per conjunct: "label: HOLDS" or
// "label: FAILS at (h,v) [boundary|interior], ...".
void print_report(std::ostream& os, const VerifyReport& r);
std::string print_report(const VerifyReport& r);

struct DecodedRun {
  Run run;
  std::vector<std::vector<uint64_t>> counts;  // counts[step][counter]
  // Forward and lossy kinds: the staircase S-point per step. Backward kinds:
  // the root-column points y_m; Dense: the block representatives.
  std::vector<uint32_t> y;
  std::vector<uint32_t> u;  // backward kinds: diagonal S-points
  std::vector<uint32_t> v;  // backward kinds: N-points (one fewer than u)
};

// Reads a run back out of a model per the kind's staircase discipline and
// validates every consecutive pair against the machine (reliable steps for
// the grid kinds, lossy steps for the lossy kinds). Throws Error when a
// staircase point is missing, a state marking is not unique, or no declared
// instruction explains a step. LossyExp models hold several segments; use
// decode_segments for those.
DecodedRun decode_run(const Model& m, const CounterMachine& mach,
                      const CompiledEncoding& enc, WitnessKind kind);

// One decoded run per start-delimited segment, each read right to left.
std::vector<DecodedRun> decode_segments(const Model& m, const CounterMachine& mach,
                                        const CompiledEncoding& enc);

struct ClaimsReport {
  uint32_t checked = 0;  // number of columns the checks covered (m < checked)
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

// Structure checks for a backward-kind model, away from the truncation edge
// (all m <= K-2): existence and uniqueness of the staircase points u_m, v_m
// and the root-column points y_m with their connecting edges; constant
// horizontal rank on each column; existence, uniqueness, and pairwise
// distinctness of the half-grid points x_{m,n} together with their
// characterization as the column's N-or-(dia0 N) points; and the per-counter
// count equality between AllC on column m+1 and C on column m.
ClaimsReport verify_backward_claims(const Model& m, const CompiledEncoding& enc,
                                    uint32_t K);

}  // namespace bimodal
