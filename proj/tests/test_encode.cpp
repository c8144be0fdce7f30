#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "bimodal/encode.hpp"

#include <fstream>
#include <sstream>

using namespace bimodal;

namespace {

CounterMachine load(const std::string& stem) {
  std::ifstream in(std::string(BIMODAL_DATA_DIR) + "/machines/" + stem + ".cm");
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_machine(ss.str());
}

std::vector<std::string> labels(const CompiledEncoding& enc) {
  std::vector<std::string> out;
  for (const auto& [l, f] : enc.conjuncts) out.push_back(l);
  return out;
}

// The structural invariants every encoding should satisfy: ordered conjunction,
// unique labels, and no dictionary entry that fails to occur in the formula.
void check_wellformed(const CompiledEncoding& enc) {
  std::vector<Formula> fs;
  for (const auto& [l, f] : enc.conjuncts) fs.push_back(f);
  CHECK(enc.formula == conj_all(fs));
  auto ls = labels(enc);
  for (size_t i = 0; i < ls.size(); ++i)
    for (size_t j = i + 1; j < ls.size(); ++j)
      CHECK(ls[i] != ls[j]);
  auto used = vars(enc.formula);
  for (const auto& [role, name] : enc.dict.entries()) {
    INFO("role ", role, " -> ", name);
    CHECK(std::binary_search(used.begin(), used.end(), name));
  }
}

Formula S() { return var("@S"); }
Formula N() { return var("@N"); }

}  // namespace

TEST_CASE("grid variants emit the documented conjunct lists") {
  CompiledEncoding fw = compile_grid(GridVariant::Fw);
  CHECK(fw.target == "grid_fw");
  CHECK(fw.machine_hash == 0);
  CHECK(labels(fw) == std::vector<std::string>{"initfw", "dgenfw", "sgenfw"});
  CHECK(fw.conjunct("initfw") == parse("@S & [0] ~@S"));
  CHECK(fw.conjunct("dgenfw") == parse("[0]+ [1]+ (@S -> <1> @N)"));
  CHECK(fw.conjunct("sgenfw") ==
        parse("[0]+ [1] (@N -> <0> @S & [0] [0] ~@S)"));
  CHECK(fw.dict.name_of("S") == "@S");
  CHECK(fw.dict.name_of("N") == "@N");
  check_wellformed(fw);

  CompiledEncoding fin = compile_grid(GridVariant::Fin);
  CHECK(labels(fin) == std::vector<std::string>{"initfw", "dgenfw", "sgenfin"});
  CHECK(fin.conjunct("sgenfin") ==
        parse("[0]+ [1] (@N & ~@end -> <0> @S & [0] [0] ~@S)"));
  CHECK(fin.dict.name_of("end") == "@end");
  check_wellformed(fin);

  CompiledEncoding bw = compile_grid(GridVariant::Bw);
  CHECK(labels(bw) == std::vector<std::string>{"initfbw", "dgenbw", "sgenbw",
                                               "sgen", "suni"});
  CHECK(bw.conjunct("initfbw") == parse("<0> (@S & [0] false)"));
  CHECK(bw.conjunct("dgenbw") == parse("[1]+ <0> @N"));
  CHECK(bw.conjunct("sgenbw") ==
        parse("[1]+ [0] (@N -> [1] ~@N & <1> @S)"));
  CHECK(bw.conjunct("sgen") == parse("[1]+ [0] (@N -> <0> @S & [0] [0] ~@S)"));
  CHECK(bw.conjunct("suni") == parse("[1]+ [0] (@S -> [0] ~@S & [1] ~@S)"));
  check_wellformed(bw);

  // The uniqueness variants extend the forward staircase with diaguniq.
  CompiledEncoding uq = compile_grid(GridVariant::Unique);
  CHECK(labels(uq) ==
        std::vector<std::string>{"initfw", "dgenfw", "sgenfw", "diaguniq"});
  for (const auto& [l, f] : fw.conjuncts) CHECK(uq.conjunct(l) == f);
  CHECK(uq.conjunct("diaguniq") == parse("[0]+ [1] (@N -> [1] ~@N)"));
  check_wellformed(uq);

  CompiledEncoding uqf = compile_grid(GridVariant::UniqueFin);
  CHECK(labels(uqf) ==
        std::vector<std::string>{"initfw", "dgenfw", "sgenfin", "diaguniq"});
  check_wellformed(uqf);

  CompiledEncoding st = compile_grid(GridVariant::Star);
  CHECK(st.target == "grid_star");
  std::vector<std::string> want{"initbwd", "dgenbw.bullet", "sgenbw.bullet",
                                "sgen.bullet", "suni.bullet", "tick"};
  for (const char* p : {"N", "S"})
    for (const char* sfx : {"puniq", "int1", "int5", "int2", "int4"})
      want.push_back("Interval_" + std::string(p) + "." + sfx);
  CHECK(labels(st) == want);
  CHECK(st.conjunct("initbwd") ==
        dia_bullet("@Tick", conj(S(), box_plus(1, box_bullet("@Tick", bot())))));
  CHECK(st.conjunct("dgenbw.bullet") ==
        bullet_translate(bw.conjunct("dgenbw"), "@Tick"));
  CHECK(st.conjunct("sgenbw.bullet") ==
        bullet_translate(bw.conjunct("sgenbw"), "@Tick"));
  CHECK(st.conjunct("sgen.bullet") ==
        bullet_translate(bw.conjunct("sgen"), "@Tick"));
  CHECK(st.conjunct("suni.bullet") ==
        bullet_translate(bw.conjunct("suni"), "@Tick"));
  CHECK(st.dict.name_of("Tick") == "@Tick");
  CHECK(st.dict.name_of("S'") == "@S'");
  CHECK(st.dict.name_of("N'") == "@N'");
  check_wellformed(st);
}

TEST_CASE("counter layers emit one variable family per counter") {
  CompiledEncoding fw = compile_counter_layer(CounterVariant::Fw, 2);
  CHECK(labels(fw) == std::vector<std::string>{"counter"});
  Formula one_i = parse(
      "[0]+ [1]+ ((@C0p -> [0] @C0p) & (@C0m -> [0] @C0m) & (@C0m -> @C0p))");
  Formula one_j = parse(
      "[0]+ [1]+ ((@C1p -> [0] @C1p) & (@C1m -> [0] @C1m) & (@C1m -> @C1p))");
  CHECK(fw.conjunct("counter") == conj(one_i, one_j));
  check_wellformed(fw);

  CompiledEncoding bw = compile_counter_layer(CounterVariant::Bw, 2);
  CHECK(labels(bw) == std::vector<std::string>{"counterbw"});
  CHECK(bw.conjunct("counterbw") ==
        parse("[1]+ [0] ((@C0 -> @N | <0> @N & [0] (@N | <0> @N -> @C0))"
              " & (@C1 -> @N | <0> @N & [0] (@N | <0> @N -> @C1)))"));
  check_wellformed(bw);

  CompiledEncoding bb = compile_counter_layer(CounterVariant::BwBullet, 2);
  CHECK(labels(bb) == std::vector<std::string>{"counterbw.bullet"});
  CHECK(bb.conjunct("counterbw.bullet") ==
        bullet_translate(bw.conjunct("counterbw"), "@Tick"));
  check_wellformed(bb);

  CompiledEncoding lo = compile_counter_layer(CounterVariant::Lossy, 2);
  CHECK(labels(lo) ==
        std::vector<std::string>{"TillStartAllC0", "TillStartAllC1"});
  CHECK(lo.conjunct("TillStartAllC0") ==
        parse("<0> @N & [0] (@N | <0> @N -> ~@start & @C0)"));
  check_wellformed(lo);

  CHECK_THROWS_AS(compile_counter_layer(CounterVariant::Fw, 1), Error);
}

TEST_CASE("op gadgets match the displayed shapes") {
  // Forward family.
  CHECK(compile_inc(CounterVariant::Fw, 0) ==
        parse("<1>=1 (~@C0p & [0] @C0p) & [1]+ ([0] @C0m -> @C0m)"));
  CHECK(compile_dec(CounterVariant::Fw, 0) ==
        parse("<1>=1 (~@C0m & [0] @C0m) & [1] ([0] @C0p -> @C0p)"));
  CHECK(compile_fix(CounterVariant::Fw, 1) ==
        parse("[1]+ ([0] @C1p -> @C1p) & [1]+ ([0] @C1m -> @C1m)"));
  CHECK(compile_op_gadget(CounterVariant::Fw, {InstrKind::Inc, 0}, 2) ==
        conj(compile_inc(CounterVariant::Fw, 0),
             compile_fix(CounterVariant::Fw, 1)));
  CHECK(compile_op_gadget(CounterVariant::Fw, {InstrKind::Zero, 0}, 2) ==
        conj_all({parse("[1]+ (@C0p -> @C0m)"),
                  compile_fix(CounterVariant::Fw, 0),
                  compile_fix(CounterVariant::Fw, 1)}));

  // Backward family.
  Formula allc0 = parse("<0> @N & [0] (@N | <0> @N -> @C0)");
  CHECK(compile_fix(CounterVariant::Bw, 0) ==
        box_plus(1, iff(var("@C0"), allc0)));
  CHECK(compile_inc(CounterVariant::Bw, 0) ==
        box_plus(1, iff(var("@C0"), disj(N(), allc0))));
  CHECK(compile_dec(CounterVariant::Bw, 0) ==
        conj(box_plus(1, impl(var("@C0"), allc0)),
             dia_eq1(conj(neg(var("@C0")), allc0))));
  CHECK(compile_op_gadget(CounterVariant::Bw, {InstrKind::Zero, 0}, 2) ==
        conj_all({parse("[1]+ ~@C0"), compile_fix(CounterVariant::Bw, 0),
                  compile_fix(CounterVariant::Bw, 1)}));

  // The bullet family is the tick translation of the backward one,
  // gadget for gadget.
  for (Instr op : {Instr{InstrKind::Inc, 1}, Instr{InstrKind::Dec, 0},
                   Instr{InstrKind::Zero, 1}})
    CHECK(compile_op_gadget(CounterVariant::BwBullet, op, 2) ==
          bullet_translate(compile_op_gadget(CounterVariant::Bw, op, 2),
                           "@Tick"));

  // Lossy family: decrement drops at least one marked point rather than
  // exactly one, and the zero pattern conjoins the fixes of every counter.
  Formula tsac0 = parse("<0> @N & [0] (@N | <0> @N -> ~@start & @C0)");
  CHECK(compile_fix(CounterVariant::Lossy, 0) ==
        box_plus(1, impl(var("@C0"), tsac0)));
  CHECK(compile_inc(CounterVariant::Lossy, 0) ==
        box_plus(1, impl(var("@C0"), disj(N(), tsac0))));
  CHECK(compile_dec(CounterVariant::Lossy, 0) ==
        conj(box_plus(1, impl(var("@C0"), tsac0)),
             dia_plus(1, conj(neg(var("@C0")), tsac0))));
  CHECK(compile_op_gadget(CounterVariant::Lossy, {InstrKind::Zero, 1}, 2) ==
        conj_all({parse("[1]+ ~@C1"), compile_fix(CounterVariant::Lossy, 0),
                  compile_fix(CounterVariant::Lossy, 1)}));

  CHECK_THROWS_AS(compile_op_gadget(CounterVariant::Fw, {InstrKind::Inc, 2}, 2),
                  Error);
}

TEST_CASE("bullet translation rewrites exactly the horizontal diamonds") {
  Formula P = var("P");
  CHECK(bullet_translate(dia(0, S()), "@Tick") ==
        parse("@Tick & <0> (~@Tick & (@S | <0> @S))"
              " | ~@Tick & <0> (@Tick & (@S | <0> @S))"));
  CHECK(bullet_translate(P, "@Tick") == P);
  CHECK(bullet_translate(dia(1, dia(0, P)), "@Tick") ==
        dia(1, dia_bullet("@Tick", P)));
  // Boxes desugar to negated diamonds, so they transform consistently.
  CHECK(bullet_translate(box(0, P), "@Tick") == box_bullet("@Tick", P));
  CHECK(bullet_translate(box(1, dia(0, P)), "@Tick") ==
        box(1, dia_bullet("@Tick", P)));
  CHECK(bullet_translate(conj(P, dia(1, P)), "@Tick") == conj(P, dia(1, P)));
  CHECK(box_bullet("@Tick", P) == neg(dia_bullet("@Tick", neg(P))));
  CHECK(tick_coherence("@Tick") ==
        parse("[1]+ [0]+ (@Tick | <1> @Tick -> @Tick & [1] @Tick)"));
  CHECK_THROWS_AS(bullet_translate(Formula(), "@Tick"), Error);
}

TEST_CASE("interval fragments pin a proposition to tick intervals") {
  CompiledEncoding iv = compile_interval("@S");
  CHECK(iv.target == "interval_S");
  CHECK(labels(iv) ==
        std::vector<std::string>{"Interval_S.puniq", "Interval_S.int1",
                                 "Interval_S.int5", "Interval_S.int2",
                                 "Interval_S.int4"});
  const std::string t = "@Tick";
  Formula Sp = var("@S'");
  CHECK(iv.conjunct("Interval_S.puniq") ==
        box_plus(1, box_plus(0, impl(S(), box_bullet(t, neg(S()))))));
  CHECK(iv.conjunct("Interval_S.int1") ==
        box_plus(1, box_plus(0, impl(conj(dia(0, S()), box_bullet(t, neg(S()))),
                                     S()))));
  CHECK(iv.conjunct("Interval_S.int5") ==
        box_plus(1, box_plus(0, impl(conj(S(), neg(dia_bullet(t, top()))),
                                     box(0, S())))));
  CHECK(iv.conjunct("Interval_S.int2") ==
        box_plus(1, box_plus(0, impl(conj(S(), dia_bullet(t, top())),
                                     dia_bullet(t, Sp)))));
  CHECK(iv.conjunct("Interval_S.int4") ==
        box_plus(1, box_plus(0, impl(S(), box(0, impl(dia_bullet(t, Sp),
                                                      S()))))));
  CHECK(iv.dict.name_of("S") == "@S");
  CHECK(iv.dict.name_of("Tick") == "@Tick");
  CHECK(iv.dict.name_of("S'") == "@S'");
  check_wellformed(iv);

  // Two applications produce disjoint primed companions.
  CompiledEncoding iv2 = compile_interval("@N");
  CHECK(iv2.dict.name_of("N'") == "@N'");
  CHECK(iv2.dict.name_of("N'") != iv.dict.name_of("S'"));
}

TEST_CASE("forward machine encodings carry the full conjunct list") {
  CounterMachine ma = load("m_a");

  CompiledEncoding fin = compile_machine(ma, Target::FwFiniteReach, "h");
  CHECK(fin.target == "fw_finite_reach");
  CHECK(fin.machine_hash == machine_hash(ma));
  CHECK(labels(fin) == std::vector<std::string>{
                           "initfw", "dgenfw", "sgenfin", "counter", "allzero",
                           "griduniquetwo", "fwstep", "initstate", "endstops",
                           "reach-target"});
  std::vector<std::pair<std::string, std::string>> roles{
      {"S", "@S"},       {"N", "@N"},       {"end", "@end"},
      {"S_q0", "@S_q0"}, {"S_q1", "@S_q1"}, {"S_h", "@S_h"},
      {"C0+", "@C0p"},   {"C0-", "@C0m"},   {"C1+", "@C1p"},
      {"C1-", "@C1m"}};
  CHECK(fin.dict.entries() == roles);
  check_wellformed(fin);

  CHECK(fin.conjunct("initstate") == var("@S_q0"));
  CHECK(fin.conjunct("allzero") ==
        conj(parse("[1]+ (~@C0p & ~@C0m)"), parse("[1]+ (~@C1p & ~@C1m)")));
  CHECK(fin.conjunct("reach-target") ==
        parse("[0]+ [1] (@N & @end -> [1] (@S -> @S_h))"));
  CHECK(fin.conjunct("endstops") ==
        parse("[1]+ [0]+ (@S_h -> [1] (@N -> @end))"));

  // The finite staircase keeps halting states inside the partition; the
  // step rule fires only where the staircase still continues.
  auto part = [](std::initializer_list<const char*> on,
                 std::initializer_list<const char*> off) {
    std::vector<Formula> fs;
    for (const char* v : on) fs.push_back(var(v));
    for (const char* v : off) fs.push_back(neg(var(v)));
    return conj_all(fs);
  };
  Formula part_fin = disj_all({part({"@S_q0"}, {"@S_q1", "@S_h"}),
                               part({"@S_q1"}, {"@S_q0", "@S_h"}),
                               part({"@S_h"}, {"@S_q0", "@S_q1"})});
  CHECK(fin.conjunct("griduniquetwo") ==
        box_plus(1, box_plus(0, iff(S(), part_fin))));
  Formula cont = dia(1, conj(N(), neg(var("@end"))));
  Formula step_q0 =
      impl(conj(var("@S_q0"), cont),
           conj(compile_op_gadget(CounterVariant::Fw, {InstrKind::Inc, 0}, 2),
                next_around(var("@S_q1"), S(), N())));
  Formula step_q1 =
      impl(conj(var("@S_q1"), cont),
           conj(compile_op_gadget(CounterVariant::Fw, {InstrKind::Dec, 0}, 2),
                next_around(var("@S_h"), S(), N())));
  CHECK(fin.conjunct("fwstep") ==
        box_plus(1, box_plus(0, conj(step_q0, step_q1))));

  CompiledEncoding rec = compile_machine(ma, Target::FwRecurrence, "q0");
  CHECK(rec.target == "fw_recurrence");
  CHECK(labels(rec) == std::vector<std::string>{
                           "initfw", "dgenfw", "sgenfw", "counter", "allzero",
                           "griduniquetwo", "fwstep", "initstate",
                           "recur-target"});
  CHECK(!rec.dict.has_role("end"));
  CHECK(rec.conjunct("recur-target") ==
        parse("[0] <0> [1] (@S -> @S_q0)"));
  // Recurrent staircases never halt, so the partition drops halting states
  // and the step rule is unguarded.
  Formula part_rec = disj_all({part({"@S_q0"}, {"@S_q1", "@S_h"}),
                               part({"@S_q1"}, {"@S_q0", "@S_h"})});
  CHECK(rec.conjunct("griduniquetwo") ==
        box_plus(1, box_plus(0, iff(S(), part_rec))));
  CHECK(rec.conjunct("fwstep") ==
        box_plus(1, box_plus(0, conj(
            impl(var("@S_q0"),
                 conj(compile_op_gadget(CounterVariant::Fw,
                                        {InstrKind::Inc, 0}, 2),
                      next_around(var("@S_q1"), S(), N()))),
            impl(var("@S_q1"),
                 conj(compile_op_gadget(CounterVariant::Fw,
                                        {InstrKind::Dec, 0}, 2),
                      next_around(var("@S_h"), S(), N())))))));
  check_wellformed(rec);

  CHECK_THROWS_AS(compile_machine(ma, Target::FwRecurrence, ""), Error);
  CHECK_THROWS_AS(compile_machine(ma, Target::FwFiniteReach, "nope"), Error);
}

TEST_CASE("backward machine encodings introduce instruction variables") {
  CounterMachine mb = load("m_b");

  CompiledEncoding bw = compile_machine(mb, Target::BwNonTermination);
  CHECK(bw.target == "bw_nontermination");
  CHECK(labels(bw) == std::vector<std::string>{
                          "initfbw", "dgenbw", "sgenbw", "sgen", "suni",
                          "counterbw", "gridunique", "executebwdec", "instbw",
                          "initstate"});
  std::vector<std::pair<std::string, std::string>> roles{
      {"S", "@S"},   {"N", "@N"},   {"S_q0", "@S_q0"},
      {"C0", "@C0"}, {"C1", "@C1"}, {"I_zero0", "@I_zero0"}};
  CHECK(bw.dict.entries() == roles);
  check_wellformed(bw);

  // Single non-halting state: the partition disjunction collapses to S_q0.
  CHECK(bw.conjunct("gridunique") ==
        parse("[1]+ [0] (@S <-> @S_q0)"));
  CHECK(bw.conjunct("executebwdec") ==
        box(1, box(0, impl(conj(S(), dia(1, conj(N(), dia(0, var("@S_q0"))))),
                           conj(var("@I_zero0"), var("@S_q0"))))));
  CHECK(bw.conjunct("instbw") ==
        box(1, box(0, impl(var("@I_zero0"),
                           compile_op_gadget(CounterVariant::Bw,
                                             {InstrKind::Zero, 0}, 2)))));
  CHECK(bw.conjunct("initstate") ==
        parse("[1]+ [0] (@S & [0] false -> @S_q0)"));

  CompiledEncoding rec = compile_machine(mb, Target::BwRecurrence, "q0");
  CHECK(labels(rec) == std::vector<std::string>{
                           "initfbw", "dgenbw", "sgenbw", "sgen", "suni",
                           "erec", "upd", "dgenr", "dgenrdiff", "counterbw",
                           "gridunique", "executebwdec", "instbw", "rtos",
                           "initstate"});
  CHECK(rec.dict.name_of("R") == "@R");
  CHECK(rec.dict.name_of("Q") == "@Q");
  CHECK(rec.conjunct("erec") == parse("[1]+ [0] (@S -> <1> @R)"));
  CHECK(rec.conjunct("upd") == parse("[1]+ [0] (@R -> [0] ~@S)"));
  CHECK(rec.conjunct("dgenr") == parse("[0] (<1> @S -> <1> @N)"));
  CHECK(rec.conjunct("dgenrdiff") ==
        box(1, box(0, impl(S(), iff(var("@Q"),
                                    next_around(neg(var("@Q")), S(), N()))))));
  CHECK(rec.conjunct("rtos") ==
        parse("[1]+ [0] (@S & <0> @R -> @S_q0)"));
  check_wellformed(rec);

  // Instruction variables are deduplicated by op: m_e reuses inc0 twice.
  CounterMachine me = load("m_e");
  CompiledEncoding bwe = compile_machine(me, Target::BwNonTermination);
  CHECK(bwe.dict.has_role("I_inc0"));
  CHECK(bwe.dict.has_role("I_dec0"));
  int icount = 0;
  for (const auto& [role, name] : bwe.dict.entries())
    if (role.rfind("I_", 0) == 0) ++icount;
  CHECK(icount == 2);
  check_wellformed(bwe);
}

TEST_CASE("dense encoding is the bulleted backward encoding plus intervals") {
  CounterMachine mb = load("m_b");
  CompiledEncoding bw = compile_machine(mb, Target::BwNonTermination);
  CompiledEncoding dn = compile_machine(mb, Target::DenseNonTermination);
  CHECK(dn.target == "dense_nontermination");

  std::vector<std::string> want{"initbwd",      "dgenbw.bullet",
                                "sgenbw.bullet", "sgen.bullet",
                                "suni.bullet",   "tick"};
  auto interval = [&](const std::string& stem) {
    for (const char* sfx : {"puniq", "int1", "int5", "int2", "int4"})
      want.push_back("Interval_" + stem + "." + sfx);
  };
  interval("N");
  interval("S");
  want.insert(want.end(), {"counterbw.bullet", "gridunique.bullet",
                           "executebwdec.bullet", "instbw.bullet"});
  interval("C0-");
  want.push_back("decuniq.C0");
  interval("C1-");
  want.push_back("decuniq.C1");
  interval("S_q0");
  interval("I_zero0");
  want.push_back("initstate.bullet");
  CHECK(labels(dn) == want);
  check_wellformed(dn);

  // Every carried-over conjunct is node-for-node the tick translation of
  // its backward counterpart.
  for (const char* l : {"dgenbw", "sgenbw", "sgen", "suni", "counterbw",
                        "gridunique", "executebwdec", "instbw", "initstate"})
    CHECK(dn.conjunct(std::string(l) + ".bullet") ==
          bullet_translate(bw.conjunct(l), "@Tick"));

  CHECK(dn.conjunct("tick") == tick_coherence("@Tick"));
  CHECK(dn.conjunct("initbwd") ==
        dia_bullet("@Tick",
                   conj(S(), box_plus(1, box_bullet("@Tick", bot())))));

  // The explicit decrement markers pair an interval block with the
  // uniqueness of the drop column.
  Formula allc0 = parse("<0> @N & [0] (@N | <0> @N -> @C0)");
  CHECK(dn.conjunct("decuniq.C0") ==
        box_plus(1, box(0, iff(var("@C0m"),
                               conj(neg(var("@C0")),
                                    bullet_translate(allc0, "@Tick"))))));
  CHECK(dn.dict.name_of("C0-") == "@C0m");
  CHECK(dn.dict.name_of("C0-'") == "@C0m'");
  CHECK(dn.dict.name_of("S_q0'") == "@S_q0'");
  CHECK(dn.dict.name_of("I_zero0'") == "@I_zero0'");
}

TEST_CASE("lossy machine encodings cover both reachability targets") {
  CounterMachine ml = load("m_l");

  CompiledEncoding om = compile_machine(ml, Target::LossyOmegaReach, "q1");
  CHECK(om.target == "lossy_omega_reach");
  CHECK(labels(om) == std::vector<std::string>{
                          "initfw", "dgenfw", "sgenfw", "diaguniq", "startv",
                          "griduniquel", "initmmbwl", "executebwl", "recinit",
                          "startpoints", "qr", "recpoints", "sstars", "svuniq",
                          "unipoints", "recur-target"});
  std::vector<std::pair<std::string, std::string>> roles{
      {"S", "@S"},       {"N", "@N"},       {"start", "@start"},
      {"R", "@R"},       {"S*", "@Sstar"},  {"S_q0", "@S_q0"},
      {"S_q1", "@S_q1"}, {"C0", "@C0"},     {"C1", "@C1"}};
  CHECK(om.dict.entries() == roles);
  check_wellformed(om);

  CHECK(om.conjunct("startv") ==
        parse("[0]+ [1]+ (@start -> [1] @start)"));
  CHECK(om.conjunct("initmmbwl") ==
        parse("[0]+ [1]+ (@S & @start -> @S_q0 & [1]+ ~@C0 & [1]+ ~@C1)"));
  CHECK(om.conjunct("recinit") == parse("@start & [0]+ <0> @start"));
  CHECK(om.conjunct("qr") ==
        parse("[0]+ [1]+ (@R -> [0] (@S -> @Sstar))"));
  CHECK(om.conjunct("sstars") == parse("[0]+ [1]+ (@Sstar -> @S)"));
  CHECK(om.conjunct("svuniq") == parse("[0]+ [1]+ (@S -> [1] ~@S)"));
  CHECK(om.conjunct("unipoints") == parse("[0]+ [1]+ (@R -> [0] ~@R)"));
  CHECK(om.conjunct("recur-target") ==
        parse("[0]+ [1]+ (@Sstar -> @S_q1)"));
  CHECK(om.conjunct("startpoints") ==
        parse("[0]+ [1]+ (@start -> <1>+ (@R & <0> (@S & ~@start)"
              " & [0] (<0> @S -> ~@start)))"));
  CHECK(om.conjunct("recpoints") ==
        box(0, box_plus(1, impl(var("@Sstar"),
            dia(1, conj_all({var("@R"),
                             dia(0, conj(var("@start"),
                                         dia(0, conj(S(), neg(var("@start")))))),
                             box(0, impl(conj(var("@start"), dia(0, S())),
                                         box(0, impl(dia(0, S()),
                                                     neg(var("@start"))))))}))))));
  Formula step_q0 =
      impl(conj(S(), conj(neg(var("@start")),
                          dia(1, conj(N(), dia(0, var("@S_q0")))))),
           conj(compile_op_gadget(CounterVariant::Lossy, {InstrKind::Inc, 0}, 2),
                var("@S_q1")));
  Formula step_q1 =
      impl(conj(S(), conj(neg(var("@start")),
                          dia(1, conj(N(), dia(0, var("@S_q1")))))),
           conj(compile_op_gadget(CounterVariant::Lossy, {InstrKind::Dec, 0}, 2),
                var("@S_q0")));
  CHECK(om.conjunct("executebwl") == box(0, box(1, conj(step_q0, step_q1))));

  CompiledEncoding fn = compile_machine(ml, Target::LossyFiniteReach, "q1");
  CHECK(labels(fn) == std::vector<std::string>{
                          "initfw", "dgenfw", "sgenfin", "diaguniq", "startv",
                          "griduniquel", "initmmbwl", "executebwl",
                          "reach-target", "endstart"});
  CHECK(fn.dict.entries() ==
        std::vector<std::pair<std::string, std::string>>{
            {"S", "@S"},       {"N", "@N"},       {"end", "@end"},
            {"start", "@start"}, {"S_q0", "@S_q0"}, {"S_q1", "@S_q1"},
            {"C0", "@C0"},     {"C1", "@C1"}});
  CHECK(fn.conjunct("reach-target") == var("@S_q1"));
  CHECK(fn.conjunct("endstart") ==
        parse("[0]+ [1]+ (@end <-> @start)"));
  // The single finite segment widens the step rule to reflexive scope so it
  // also bites at the root column.
  CHECK(fn.conjunct("executebwl") ==
        box_plus(0, box_plus(1, conj(step_q0, step_q1))));
  check_wellformed(fn);

  CHECK_THROWS_AS(compile_machine(ml, Target::LossyOmegaReach, ""), Error);
}

TEST_CASE("relativization guards both diamonds to the new domain") {
  Formula P = var("P");
  Formula D = var("@D");
  Formula dec_body = impl(dia(0, D), D);
  Formula exp_body = impl(D, box(0, D));

  CHECK(relativize(dia(0, P), Relativization::Decreasing) ==
        conj(D, conj(box_upto(0, 1, box_upto(1, 1, dec_body)),
                     dia(0, conj(D, P)))));
  CHECK(relativize(P, Relativization::Decreasing) ==
        conj(D, conj(dec_body, P)));
  CHECK(relativize(dia(1, dia(0, P)), Relativization::Expanding) ==
        conj(D, conj(box_upto(0, 2, box_upto(1, 2, exp_body)),
                     dia(1, conj(D, dia(0, conj(D, P)))))));

  // The domain proposition avoids the formula's own vocabulary.
  Formula clash = conj(var("@D"), dia(0, var("@D'")));
  auto used = vars(relativize(clash, Relativization::Decreasing));
  CHECK(std::binary_search(used.begin(), used.end(), std::string("@D''")));

  CHECK(product_to_decreasing(P) ==
        conj(parse("[1]+ [0]+ (<0> true -> [1] <0> true)"), P));
  CHECK(product_to_decreasing(dia(0, P)) ==
        conj(parse("[1]+ [0]+ (<0> true -> [1] <0> true)"), dia(0, P)));
  CHECK(product_to_decreasing(dia(1, P)) ==
        conj(parse("[1]+ [0]+ (<0> true -> [1] <0> true)"), dia(1, P)));
}

TEST_CASE("difference-to-linear translation tags every subformula") {
  Formula P = var("P");

  CompiledEncoding one = diff_to_linear(dia(1, P));
  CHECK(one.target == "diff_to_linear");
  CHECK(labels(one) == std::vector<std::string>{"chi", "dagger"});
  CHECK(one.dict.entries().size() == 2);
  CHECK(one.dict.name_of("P[P]") == "@P0");
  CHECK(one.dict.name_of("P[<1> P]") == "@P1");
  // (<1>psi)+ = marker-of-psi | <1>psi+; P itself is untouched.
  CHECK(one.conjunct("dagger") == disj(var("@P0"), dia(1, P)));
  auto block = [](Formula marker, Formula psi) {
    return conj_all({neg(marker), box_plus(1, impl(psi, box(1, marker))),
                     impl(dia(1, marker),
                          dia_plus(1, conj(neg(marker), psi)))});
  };
  CHECK(one.conjunct("chi") ==
        box_plus(0, conj(block(var("@P0"), P),
                         block(var("@P1"), disj(var("@P0"), dia(1, P))))));
  check_wellformed(one);

  CompiledEncoding atom = diff_to_linear(P);
  CHECK(atom.conjunct("dagger") == P);
  CHECK(atom.conjunct("chi") == box_plus(0, block(var("@P0"), P)));
  CHECK(atom.dict.entries().size() == 1);

  // Vertical diamonds under horizontal ones still get their own markers;
  // horizontal structure passes through unchanged.
  Formula f = dia(0, dia(1, P));
  CompiledEncoding two = diff_to_linear(f);
  CHECK(two.dict.entries().size() == 3);
  CHECK(two.conjunct("dagger") == dia(0, disj(var("@P0"), dia(1, P))));

  // Marker names are primed until clear of the input vocabulary.
  Formula clash = conj(var("@P0"), dia(1, var("@P0")));
  CompiledEncoding cl = diff_to_linear(clash);
  CHECK(cl.dict.name_of("P[@P0]") == "@P'0");
  auto used = vars(cl.formula);
  CHECK(std::binary_search(used.begin(), used.end(), std::string("@P'2")));

  // One marker per distinct subformula, even with sharing.
  Formula shared = conj(dia(1, P), neg(dia(1, P)));
  CHECK(diff_to_linear(shared).dict.entries().size() ==
        subformulas(shared).size());
}

TEST_CASE("golden encodings stay frozen") {
  CounterMachine ma = load("m_a");
  auto golden = [](const std::string& stem) {
    std::ifstream in(std::string(BIMODAL_GOLDEN_DIR) + "/" + stem + ".txt");
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  CHECK(print_encoding(compile_machine(ma, Target::FwFiniteReach, "h")) ==
        golden("m_a_fw_finite_reach"));
  CHECK(print_encoding(compile_machine(ma, Target::FwRecurrence, "q0")) ==
        golden("m_a_fw_recurrence"));
}

TEST_CASE("encoding text round trips through print and parse") {
  CounterMachine ma = load("m_a");
  for (CompiledEncoding enc :
       {compile_machine(ma, Target::FwFiniteReach, "h"),
        compile_machine(ma, Target::BwRecurrence, "q0"),
        compile_grid(GridVariant::Star), diff_to_linear(parse("<1> P & Q"))}) {
    std::string text = print_encoding(enc);
    CompiledEncoding back = parse_encoding(text);
    CHECK(back.target == enc.target);
    CHECK(back.machine_hash == enc.machine_hash);
    CHECK(back.dict.entries() == enc.dict.entries());
    CHECK(labels(back) == labels(enc));
    for (const auto& [l, f] : enc.conjuncts) CHECK(back.conjunct(l) == f);
    CHECK(back.formula == enc.formula);
  }

  // Machine line appears exactly when a machine is referenced.
  std::string with = print_encoding(compile_machine(ma, Target::FwRecurrence,
                                                    "q0"));
  CHECK(with.find("machine: ") != std::string::npos);
  std::string without = print_encoding(compile_grid(GridVariant::Fw));
  CHECK(without.find("machine: ") == std::string::npos);

  CHECK(parse_encoding("target: t\n# comment\n\nS = @S\nconjunct a: @S & @S'")
            .conjunct("a") == conj(var("@S"), var("@S'")));
  CHECK_THROWS_AS(parse_encoding("S = @S\n"), ParseError);
  CHECK_THROWS_AS(parse_encoding("target: t\nnonsense line\n"), ParseError);
  CHECK_THROWS_AS(parse_encoding("target: t\nconjunct broken\n"), ParseError);
}
