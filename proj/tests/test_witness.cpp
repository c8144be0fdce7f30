#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bimodal/witness.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace bimodal;

namespace {

using Coord = std::pair<uint32_t, uint32_t>;
using CoordSet = std::set<Coord>;

CounterMachine load(const std::string& stem) {
  std::ifstream in(std::string(BIMODAL_DATA_DIR) + "/machines/" + stem + ".cm");
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_machine(ss.str());
}

// Follows the first enabled instruction until `len` configurations exist or
// the machine gets stuck.
Run walk(const CounterMachine& m, size_t len) {
  Run r;
  r.configs.push_back(initial_configuration(m));
  while (r.configs.size() < len) {
    auto next = successors(m, r.configs.back());
    if (next.empty()) break;
    r.steps.push_back(next.front().first);
    r.configs.push_back(next.front().second);
  }
  return r;
}

CoordSet coords(const Model& md, const std::string& name) {
  CoordSet out;
  Bits b = md.val(name);
  for (uint32_t w = 0; w < md.frame.size(); ++w)
    if (b.get(w)) out.insert(md.meta.coord[w]);
  return out;
}

const ConjunctReport& conjunct_of(const VerifyReport& rep, const std::string& label) {
  for (const auto& cr : rep.conjuncts)
    if (cr.label == label) return cr;
  REQUIRE_MESSAGE(false, "no conjunct labeled ", label);
  static ConjunctReport dummy;
  return dummy;
}

// Every conjunct must hold unless listed in `expected`, in which case its
// failure set must match exactly; failure points listed in `interior` must be
// flagged interior, all others boundary.
void check_failures(const VerifyReport& rep,
                    const std::map<std::string, CoordSet>& expected,
                    const CoordSet& interior = {}) {
  std::set<std::string> seen;
  for (const auto& cr : rep.conjuncts) {
    INFO("conjunct ", cr.label);
    auto it = expected.find(cr.label);
    if (it == expected.end()) {
      CHECK(cr.holds);
      continue;
    }
    seen.insert(cr.label);
    CHECK_FALSE(cr.holds);
    CoordSet got;
    for (const FailurePoint& fp : cr.failures) {
      got.insert({fp.h, fp.v});
      INFO("failure point (", fp.h, ",", fp.v, ")");
      CHECK(fp.boundary == !interior.count({fp.h, fp.v}));
    }
    CHECK(got == it->second);
  }
  CHECK(seen.size() == expected.size());
  CHECK(rep.all_hold == expected.empty());
}

// Copy of md with `name` additionally true at grid point (h,v).
Model with_mark(const Model& md, const std::string& name, uint32_t h, uint32_t v) {
  Model out = md;
  Bits b = out.val(name);
  std::vector<uint32_t> ws;
  for (uint32_t w = 0; w < out.frame.size(); ++w)
    if (b.get(w)) ws.push_back(w);
  int t = out.meta.at(h, v);
  REQUIRE(t >= 0);
  ws.push_back(static_cast<uint32_t>(t));
  out.set_val(name, ws);
  return out;
}

void check_round_trip(const Model& md, const CounterMachine& m,
                      const CompiledEncoding& enc, WitnessKind kind, const Run& run) {
  DecodedRun dec = decode_run(md, m, enc, kind);
  CHECK(dec.run.configs == run.configs);
  CHECK(dec.run.steps == run.steps);
  REQUIRE(dec.counts.size() == run.configs.size());
  for (size_t t = 0; t < run.configs.size(); ++t)
    CHECK(dec.counts[t] == run.configs[t].counters);
}

}  // namespace

TEST_CASE("finite forward witnesses are exact and decode back") {
  CounterMachine ma = load("m_a");
  Run run = walk(ma, 3);
  REQUIRE(run.configs.size() == 3);
  WitnessSpec spec{WitnessKind::FwFin, ma, {run}, 0, 2, "h"};
  CompiledEncoding enc = compile_machine(ma, Target::FwFiniteReach, "h");
  Model md = build_witness(spec);

  CHECK(md.meta.columns.size() == 3);
  CHECK(md.meta.vnames.size() == 4);
  CHECK(coords(md, enc.dict.name_of("S")) == CoordSet{{0, 0}, {1, 1}, {2, 2}});
  CHECK(coords(md, enc.dict.name_of("N")) == CoordSet{{0, 1}, {1, 2}, {2, 3}});
  CHECK(coords(md, enc.dict.name_of("end")) == CoordSet{{2, 3}});
  CHECK(coords(md, enc.dict.name_of("S_q0")) == CoordSet{{0, 0}});
  CHECK(coords(md, enc.dict.name_of("S_q1")) == CoordSet{{1, 1}});
  CHECK(coords(md, enc.dict.name_of("S_h")) == CoordSet{{2, 2}});
  CHECK(coords(md, enc.dict.name_of("C0+")) == CoordSet{{1, 0}, {2, 0}});
  CHECK(coords(md, enc.dict.name_of("C0-")) == CoordSet{{2, 0}});
  CHECK(coords(md, enc.dict.name_of("C1+")).empty());

  VerifyReport rep = verify_witness(spec, md, enc);
  CHECK(rep.all_hold);
  CHECK(rep.boundary_clean);
  check_round_trip(md, ma, enc, WitnessKind::FwFin, run);

  // The same discipline across the corpus: reach the walk's own last state.
  for (const auto& [stem, len] : std::vector<std::pair<std::string, size_t>>{
           {"m_b", 4}, {"m_c", 1}, {"m_d", 5}, {"m_l", 4}}) {
    INFO("machine ", stem);
    CounterMachine m = load(stem);
    Run r = walk(m, len);
    REQUIRE(r.configs.size() == len);
    std::string target = m.states[r.configs.back().state];
    WitnessSpec sp{WitnessKind::FwFin, m, {r}, 0, 2, target};
    CompiledEncoding e = compile_machine(m, Target::FwFiniteReach, target);
    Model w = build_witness(sp);
    VerifyReport vr = verify_witness(sp, w, e);
    CHECK(vr.all_hold);
    check_round_trip(w, m, e, WitnessKind::FwFin, r);
  }
}

TEST_CASE("truncated forward recurrence witnesses fail boundary-only") {
  for (const std::string& stem : {std::string("m_l"), std::string("m_b")}) {
    INFO("machine ", stem);
    CounterMachine m = load(stem);
    uint32_t K = 4;
    Run run = walk(m, K);
    std::string target = m.states[run.configs.back().state];
    WitnessSpec spec{WitnessKind::FwRec, m, {run}, K, 2, target};
    CompiledEncoding enc = compile_machine(m, Target::FwRecurrence, target);
    Model md = build_witness(spec);
    VerifyReport rep = verify_witness(spec, md, enc);
    check_failures(rep, {{"sgenfw", {{3, 4}}},
                         {"fwstep", {{3, 3}}},
                         {"recur-target", {{3, 0}}}});
    CHECK(rep.boundary_clean);
    CHECK_FALSE(rep.all_hold);
    check_round_trip(md, m, enc, WitnessKind::FwRec, run);
  }
}

TEST_CASE("truncated backward witnesses fail only at the blanked row") {
  CounterMachine mb = load("m_b");
  for (uint32_t K : {3u, 4u, 5u}) {
    INFO("K = ", K);
    Run run = walk(mb, K);
    WitnessSpec spec{WitnessKind::BwInf, mb, {run}, K, 2, ""};
    CompiledEncoding enc = compile_machine(mb, Target::BwNonTermination);
    Model md = build_witness(spec);
    VerifyReport rep = verify_witness(spec, md, enc);
    check_failures(rep, {{"dgenbw", {{0, K - 1}}}});
    CHECK(rep.boundary_clean);

    DecodedRun dec = decode_run(md, mb, enc, WitnessKind::BwInf);
    CHECK(dec.run.configs == run.configs);
    CHECK(dec.run.steps == run.steps);
    REQUIRE(dec.u.size() == K);
    REQUIRE(dec.v.size() == K - 1);
    REQUIRE(dec.y.size() == K - 1);
    for (uint32_t m = 0; m < K; ++m)
      CHECK(md.meta.coord[dec.u[m]] == Coord{m + 1, m});
    for (uint32_t m = 0; m + 1 < K; ++m) {
      CHECK(md.meta.coord[dec.v[m]] == Coord{m + 2, m});
      CHECK(md.meta.coord[dec.y[m]] == Coord{0, m});
    }

    ClaimsReport claims = verify_backward_claims(md, enc, K);
    for (const std::string& v : claims.violations) INFO("violation: ", v);
    CHECK(claims.ok());
    CHECK(claims.checked == K - 1);
  }

  // A run that actually moves counters.
  CounterMachine ml = load("m_l");
  Run run = walk(ml, 4);
  WitnessSpec spec{WitnessKind::BwInf, ml, {run}, 4, 2, ""};
  CompiledEncoding enc = compile_machine(ml, Target::BwNonTermination);
  Model md = build_witness(spec);
  check_failures(verify_witness(spec, md, enc), {{"dgenbw", {{0, 3}}}});
  CHECK(coords(md, enc.dict.name_of("C0")) == CoordSet{{2, 0}, {4, 2}});
  check_round_trip(md, ml, enc, WitnessKind::BwInf, run);
  ClaimsReport claims = verify_backward_claims(md, enc, 4);
  for (const std::string& v : claims.violations) INFO("violation: ", v);
  CHECK(claims.ok());
}

TEST_CASE("backward recurrence witness reports the known interior gap") {
  CounterMachine mb = load("m_b");
  uint32_t K = 4;
  Run run = walk(mb, K);
  WitnessSpec spec{WitnessKind::BwRec, mb, {run}, K, 2, "q0"};
  CompiledEncoding enc = compile_machine(mb, Target::BwRecurrence, "q0");
  Model md = build_witness(spec);

  CHECK(coords(md, enc.dict.name_of("Q")) == CoordSet{{2, 1}, {4, 3}});
  CHECK(coords(md, enc.dict.name_of("R")) == CoordSet{{1, 1}, {2, 2}, {3, 3}});

  VerifyReport rep = verify_witness(spec, md, enc);
  check_failures(rep,
                 {{"dgenbw", {{0, 3}}}, {"erec", {{4, 3}}}, {"dgenr", {{2, 0}}}},
                 {{2, 0}});
  CHECK_FALSE(rep.boundary_clean);
  check_round_trip(md, mb, enc, WitnessKind::BwRec, run);
  CHECK(verify_backward_claims(md, enc, K).ok());

  // m_l visits q1 at odd steps only; after step 3 no visit fits inside K=5.
  CounterMachine ml = load("m_l");
  WitnessSpec spec5{WitnessKind::BwRec, ml, {walk(ml, 5)}, 5, 2, "q1"};
  CHECK_THROWS_AS(build_witness(spec5), Error);
  WitnessSpec spec4{WitnessKind::BwRec, ml, {walk(ml, 4)}, 4, 2, "q1"};
  CompiledEncoding enc4 = compile_machine(ml, Target::BwRecurrence, "q1");
  Model md4 = build_witness(spec4);
  CHECK(coords(md4, enc4.dict.name_of("R")) == CoordSet{{1, 1}, {2, 3}, {3, 3}});
  check_failures(verify_witness(spec4, md4, enc4),
                 {{"dgenbw", {{0, 3}}}, {"erec", {{4, 3}}}, {"dgenr", {{2, 0}}}},
                 {{2, 0}});
}

TEST_CASE("backward structure checks catch corruptions") {
  CounterMachine mb = load("m_b");
  uint32_t K = 4;
  Run run = walk(mb, K);
  WitnessSpec spec{WitnessKind::BwInf, mb, {run}, K, 2, ""};
  CompiledEncoding enc = compile_machine(mb, Target::BwNonTermination);
  Model md = build_witness(spec);
  REQUIRE(verify_backward_claims(md, enc, K).ok());

  // A stray next marker below the staircase breaks uniqueness and the
  // in-column characterization.
  Model bad_n = with_mark(md, enc.dict.name_of("N"), 3, 0);
  ClaimsReport c1 = verify_backward_claims(bad_n, enc, K);
  CHECK_FALSE(c1.ok());
  bool mentions = false;
  for (const std::string& v : c1.violations)
    if (v.find("expected 1 candidate") != std::string::npos) mentions = true;
  CHECK(mentions);
  CHECK_THROWS_AS(decode_run(bad_n, mb, enc, WitnessKind::BwInf), Error);
  VerifyReport rep1 = verify_witness(spec, bad_n, enc);
  CHECK_FALSE(rep1.boundary_clean);
  CHECK_FALSE(conjunct_of(rep1, "sgenbw").holds);

  // A duplicated staircase point at an occupied rank.
  Model bad_s = with_mark(md, enc.dict.name_of("S"), 3, 1);
  CHECK_FALSE(verify_backward_claims(bad_s, enc, K).ok());
  CHECK_THROWS_AS(decode_run(bad_s, mb, enc, WitnessKind::BwInf), Error);
}

TEST_CASE("tick-block chain witness smears rows over alternating blocks") {
  CounterMachine mb = load("m_b");
  uint32_t K = 4;
  Run run = walk(mb, K);
  for (uint32_t width : {2u, 3u}) {
    INFO("width = ", width);
    WitnessSpec spec{WitnessKind::Dense, mb, {run}, K, width, ""};
    CompiledEncoding enc = compile_machine(mb, Target::DenseNonTermination);
    Model md = build_witness(spec);
    CHECK(md.frame.size() == (width * K + 1) * K);

    // Ticks alternate per block, anchored at the top block; the limit point
    // never ticks.
    CoordSet ticks = coords(md, enc.dict.name_of("Tick"));
    CHECK(ticks.size() == 2 * width * K);
    for (uint32_t b = 0; b < K; ++b) {
      bool expect = ((K - 1 - b) % 2) == 0;
      for (uint32_t p = 0; p < width; ++p)
        CHECK(ticks.count({width * b + p + 1, 0}) == (expect ? 1 : 0));
    }
    for (uint32_t v = 0; v < K; ++v) CHECK(ticks.count({0, v}) == 0);

    VerifyReport rep = verify_witness(spec, md, enc);
    check_failures(rep, {{"dgenbw.bullet", {{0, K - 1}}}});
    CHECK(rep.boundary_clean);
    check_round_trip(md, mb, enc, WitnessKind::Dense, run);
  }

  // Counter movement: primed retirement markers sit one block early.
  CounterMachine ml = load("m_l");
  WitnessSpec spec{WitnessKind::Dense, ml, {walk(ml, 4)}, 4, 2, ""};
  CompiledEncoding enc = compile_machine(ml, Target::DenseNonTermination);
  Model md = build_witness(spec);
  CHECK(coords(md, enc.dict.name_of("C0-")) == CoordSet{{5, 0}, {6, 0}});
  CHECK(coords(md, enc.dict.name_of("C0-'")) == CoordSet{{3, 0}, {4, 0}});
  check_failures(verify_witness(spec, md, enc), {{"dgenbw.bullet", {{0, 3}}}});
  check_round_trip(md, ml, enc, WitnessKind::Dense, walk(ml, 4));
}

TEST_CASE("expanding lossy witness wires segments to growing visit counts") {
  CounterMachine ml = load("m_l");
  std::vector<Run> runs{walk(ml, 2), walk(ml, 4), walk(ml, 6)};
  WitnessSpec spec{WitnessKind::LossyExp, ml, runs, 0, 2, "q1"};
  CompiledEncoding enc = compile_machine(ml, Target::LossyOmegaReach, "q1");
  Model md = build_witness(spec);

  CHECK(md.meta.columns.size() == 13);
  CHECK(md.meta.vnames.size() == 14);
  CHECK(coords(md, enc.dict.name_of("S*")) ==
        CoordSet{{1, 1}, {3, 3}, {5, 5}, {7, 7}, {9, 9}, {11, 11}});
  CHECK(coords(md, enc.dict.name_of("R")) ==
        CoordSet{{0, 1}, {2, 3}, {1, 5}, {6, 7}, {3, 9}, {5, 11}});
  CoordSet start = coords(md, enc.dict.name_of("start"));
  CHECK(start.size() == 4 * 14);
  for (uint32_t c : {0u, 2u, 6u, 12u})
    for (uint32_t v = 0; v < 14; ++v) CHECK(start.count({c, v}) == 1);

  CoordSet startpoints_fails;
  for (uint32_t v = 0; v < 14; ++v) startpoints_fails.insert({12, v});
  VerifyReport rep = verify_witness(spec, md, enc);
  check_failures(rep, {{"sgenfw", {{12, 13}}},
                       {"recinit", {{12, 0}}},
                       {"startpoints", startpoints_fails},
                       {"recpoints", {{7, 7}, {9, 9}, {11, 11}}}});
  CHECK(rep.boundary_clean);

  std::vector<DecodedRun> segs = decode_segments(md, ml, enc);
  REQUIRE(segs.size() == 3);
  for (size_t k = 0; k < 3; ++k) {
    INFO("segment ", k + 1);
    CHECK(segs[k].run.kind == RunKind::Lossy);
    CHECK(segs[k].run.configs == runs[k].configs);
    CHECK(segs[k].run.steps.size() == runs[k].steps.size());
  }
  // Segment n carries at least n recurrence visits (here exactly n).
  CoordSet stars = coords(md, enc.dict.name_of("S*"));
  std::vector<uint32_t> bounds{0, 2, 6, 12};
  for (size_t k = 1; k <= 3; ++k) {
    size_t visits = 0;
    for (const Coord& c : stars)
      if (c.first > bounds[k - 1] && c.first <= bounds[k]) ++visits;
    CHECK(visits == k);
  }

  CHECK_THROWS_AS(decode_run(md, ml, enc, WitnessKind::LossyExp), Error);
  // Visit counts must strictly grow, and visits may not sit on start columns.
  WitnessSpec flat{WitnessKind::LossyExp, ml, {walk(ml, 2), walk(ml, 2)}, 0, 2, "q1"};
  CHECK_THROWS_AS(build_witness(flat), Error);
  WitnessSpec at_start{WitnessKind::LossyExp, ml, runs, 0, 2, "q0"};
  CHECK_THROWS_AS(build_witness(at_start), Error);
}

TEST_CASE("single-segment lossy witness is exact") {
  CounterMachine ml = load("m_l");
  Run run = walk(ml, 4);
  WitnessSpec spec{WitnessKind::LossyFin, ml, {run}, 0, 2, "q1"};
  CompiledEncoding enc = compile_machine(ml, Target::LossyFiniteReach, "q1");
  Model md = build_witness(spec);

  CoordSet start = coords(md, enc.dict.name_of("start"));
  CHECK(start == coords(md, enc.dict.name_of("end")));
  CHECK(start.size() == 5);
  for (uint32_t v = 0; v < 5; ++v) CHECK(start.count({3, v}) == 1);

  VerifyReport rep = verify_witness(spec, md, enc);
  CHECK(rep.all_hold);
  DecodedRun dec = decode_run(md, ml, enc, WitnessKind::LossyFin);
  CHECK(dec.run.kind == RunKind::Lossy);
  CHECK(dec.run.configs == run.configs);

  // A genuinely lossy run: the final increment loses the new unit.
  Run lossy;
  lossy.kind = RunKind::Lossy;
  lossy.configs = {{0, {0, 0}}, {1, {1, 0}}, {0, {0, 0}}, {1, {0, 0}}};
  lossy.steps = {{InstrKind::Inc, 0}, {InstrKind::Dec, 0}, {InstrKind::Inc, 0}};
  REQUIRE(!run_violation(ml, lossy));
  WitnessSpec lspec{WitnessKind::LossyFin, ml, {lossy}, 0, 2, "q1"};
  Model lmd = build_witness(lspec);
  CHECK(verify_witness(lspec, lmd, enc).all_hold);
  DecodedRun ldec = decode_run(lmd, ml, enc, WitnessKind::LossyFin);
  CHECK(ldec.run.configs == lossy.configs);

  // A two-state prefix of the halting machine reaches q1 exactly.
  CounterMachine ma = load("m_a");
  Run prefix = walk(ma, 2);
  WitnessSpec pspec{WitnessKind::LossyFin, ma, {prefix}, 0, 2, "q1"};
  CompiledEncoding penc = compile_machine(ma, Target::LossyFiniteReach, "q1");
  Model pmd = build_witness(pspec);
  CHECK(verify_witness(pspec, pmd, penc).all_hold);
  CHECK(decode_run(pmd, ma, penc, WitnessKind::LossyFin).run.configs ==
        prefix.configs);
  // The full run visits the halting state, which the grid cannot mark.
  WitnessSpec full{WitnessKind::LossyFin, ma, {walk(ma, 3)}, 0, 2, "h"};
  CHECK_THROWS_AS(build_witness(full), Error);
}

TEST_CASE("decoders reject corrupted models") {
  CounterMachine ma = load("m_a");
  Run run = walk(ma, 3);
  WitnessSpec spec{WitnessKind::FwFin, ma, {run}, 0, 2, "h"};
  CompiledEncoding enc = compile_machine(ma, Target::FwFiniteReach, "h");
  Model md = build_witness(spec);

  // Doubled state marking on the staircase.
  Model two_states = with_mark(md, enc.dict.name_of("S_q0"), 1, 1);
  CHECK_THROWS_AS(decode_run(two_states, ma, enc, WitnessKind::FwFin), Error);

  // End marker moved to the first column: the walk stops early and the
  // target check fails interior (exact kinds have no boundary to hide in).
  Model early_end = md;
  early_end.set_val(enc.dict.name_of("end"),
                    {static_cast<uint32_t>(md.meta.at(0, 1))});
  VerifyReport rep = verify_witness(spec, early_end, enc);
  CHECK_FALSE(conjunct_of(rep, "reach-target").holds);
  CHECK_FALSE(rep.boundary_clean);
  CHECK(decode_run(early_end, ma, enc, WitnessKind::FwFin).run.configs.size() == 1);

  // Erased increment history: the counts no longer match any instruction.
  Model no_plus = md;
  no_plus.set_val(enc.dict.name_of("C0+"), {});
  CHECK_THROWS_AS(decode_run(no_plus, ma, enc, WitnessKind::FwFin), Error);
}

TEST_CASE("verification reports read one line per conjunct") {
  CounterMachine mb = load("m_b");
  WitnessSpec spec{WitnessKind::BwInf, mb, {walk(mb, 3)}, 3, 2, ""};
  CompiledEncoding enc = compile_machine(mb, Target::BwNonTermination);
  Model md = build_witness(spec);
  std::string text = print_report(verify_witness(spec, md, enc));
  CHECK(text.find("initfbw: HOLDS\n") != std::string::npos);
  CHECK(text.find("dgenbw: FAILS at (0,2) [boundary]\n") != std::string::npos);
  size_t lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  CHECK(lines == enc.conjuncts.size());

  WitnessSpec rspec{WitnessKind::BwRec, mb, {walk(mb, 4)}, 4, 2, "q0"};
  CompiledEncoding renc = compile_machine(mb, Target::BwRecurrence, "q0");
  Model rmd = build_witness(rspec);
  std::string rtext = print_report(verify_witness(rspec, rmd, renc));
  CHECK(rtext.find("dgenr: FAILS at (2,0) [interior]\n") != std::string::npos);
}

TEST_CASE("builders validate their inputs") {
  CounterMachine ma = load("m_a");
  CounterMachine mb = load("m_b");
  Run run = walk(ma, 3);

  // Wrong target state for the supplied run.
  CHECK_THROWS_AS(build_witness({WitnessKind::FwFin, ma, {run}, 0, 2, "q0"}), Error);
  // Unknown state.
  CHECK_THROWS_AS(build_witness({WitnessKind::FwFin, ma, {run}, 0, 2, "nope"}),
                  Error);
  // Run shorter than the truncation depth.
  CHECK_THROWS_AS(build_witness({WitnessKind::BwInf, mb, {walk(mb, 2)}, 4, 2, ""}),
                  Error);
  // Zero depth, zero width, missing run.
  CHECK_THROWS_AS(build_witness({WitnessKind::BwInf, mb, {walk(mb, 4)}, 0, 2, ""}),
                  Error);
  CHECK_THROWS_AS(build_witness({WitnessKind::Dense, mb, {walk(mb, 4)}, 4, 0, ""}),
                  Error);
  CHECK_THROWS_AS(build_witness({WitnessKind::FwFin, ma, {}, 0, 2, "h"}), Error);
  // Grid kinds insist on reliable runs.
  Run lossy = walk(mb, 4);
  lossy.kind = RunKind::Lossy;
  CHECK_THROWS_AS(build_witness({WitnessKind::BwInf, mb, {lossy}, 4, 2, ""}), Error);
  // A run that breaks the step relation is rejected outright.
  Run broken = walk(mb, 4);
  broken.configs[2].counters[0] = 7;
  CHECK_THROWS_AS(build_witness({WitnessKind::BwInf, mb, {broken}, 4, 2, ""}),
                  Error);
}

TEST_CASE("witness kind tags round-trip") {
  for (WitnessKind k :
       {WitnessKind::FwRec, WitnessKind::FwFin, WitnessKind::BwInf,
        WitnessKind::BwRec, WitnessKind::Dense, WitnessKind::LossyExp,
        WitnessKind::LossyFin})
    CHECK(witness_kind_from_tag(witness_kind_tag(k)) == k);
  CHECK_THROWS_AS(witness_kind_from_tag("fw"), ParseError);
  CHECK(compile_machine(load("m_b"), witness_target(WitnessKind::BwInf)).target ==
        "bw_nontermination");
}

TEST_CASE("every short reliable prefix round-trips through the finite witness") {
  size_t tested = 0;
  for (const std::string& stem :
       {std::string("m_a"), std::string("m_b"), std::string("m_c"),
        std::string("m_d"), std::string("m_e"), std::string("m_l")}) {
    CounterMachine m = load(stem);
    for (const Run& full :
         bounded_runs(m, initial_configuration(m), 5, RunKind::Reliable)) {
      for (size_t t = 1; t <= full.configs.size(); ++t) {
        Run prefix;
        prefix.configs.assign(full.configs.begin(), full.configs.begin() + t);
        prefix.steps.assign(full.steps.begin(), full.steps.begin() + (t - 1));
        std::string target = m.states[prefix.configs.back().state];
        INFO("machine ", stem, ", prefix length ", t, ", target ", target);
        WitnessSpec spec{WitnessKind::FwFin, m, {prefix}, 0, 2, target};
        CompiledEncoding enc = compile_machine(m, Target::FwFiniteReach, target);
        Model md = build_witness(spec);
        VerifyReport rep = verify_witness(spec, md, enc);
        for (const auto& cr : rep.conjuncts) {
          INFO("conjunct ", cr.label);
          CHECK(cr.holds);
        }
        check_round_trip(md, m, enc, WitnessKind::FwFin, prefix);
        ++tested;
      }
    }
  }
  CHECK(tested >= 20);
}

TEST_CASE("serialized witness models verify and decode identically") {
  CounterMachine mb = load("m_b");
  WitnessSpec spec{WitnessKind::BwRec, mb, {walk(mb, 4)}, 4, 2, "q0"};
  CompiledEncoding enc = compile_machine(mb, Target::BwRecurrence, "q0");
  Model md = build_witness(spec);
  Model back = parse_model(print_model(md));
  VerifyReport a = verify_witness(spec, md, enc);
  VerifyReport b = verify_witness(spec, back, enc);
  REQUIRE(a.conjuncts.size() == b.conjuncts.size());
  for (size_t i = 0; i < a.conjuncts.size(); ++i) {
    CHECK(a.conjuncts[i].label == b.conjuncts[i].label);
    CHECK(a.conjuncts[i].holds == b.conjuncts[i].holds);
  }
  CHECK(decode_run(back, mb, enc, WitnessKind::BwRec).run.configs ==
        decode_run(md, mb, enc, WitnessKind::BwRec).run.configs);

  CounterMachine ml = load("m_l");
  std::vector<Run> runs{walk(ml, 2), walk(ml, 4), walk(ml, 6)};
  WitnessSpec lspec{WitnessKind::LossyExp, ml, runs, 0, 2, "q1"};
  CompiledEncoding lenc = compile_machine(ml, Target::LossyOmegaReach, "q1");
  Model lback = parse_model(print_model(build_witness(lspec)));
  std::vector<DecodedRun> segs = decode_segments(lback, ml, lenc);
  REQUIRE(segs.size() == 3);
  for (size_t k = 0; k < 3; ++k) CHECK(segs[k].run.configs == runs[k].configs);
}
