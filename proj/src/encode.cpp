#include "bimodal/encode.hpp"

#include <algorithm>
#include <functional>
#include <iomanip>
#include <sstream>
#include <unordered_map>

namespace bimodal {

bool CompiledEncoding::has_conjunct(const std::string& label) const {
  for (const auto& [l, f] : conjuncts)
    if (l == label) return true;
  return false;
}

Formula CompiledEncoding::conjunct(const std::string& label) const {
  for (const auto& [l, f] : conjuncts)
    if (l == label) return f;
  throw Error("encoding '" + target + "' has no conjunct '" + label + "'");
}

namespace {

// Canonical variable spellings shared by all machine encodings.
Formula vS() { return var("@S"); }
Formula vN() { return var("@N"); }
Formula vEnd() { return var("@end"); }
Formula vStart() { return var("@start"); }
Formula vR() { return var("@R"); }
Formula vQ() { return var("@Q"); }
Formula vSstar() { return var("@Sstar"); }

std::string cplus_name(uint32_t i) { return "@C" + std::to_string(i) + "p"; }
std::string cminus_name(uint32_t i) { return "@C" + std::to_string(i) + "m"; }
std::string cbw_name(uint32_t i) { return "@C" + std::to_string(i); }
Formula cplus(uint32_t i) { return var(cplus_name(i)); }
Formula cminus(uint32_t i) { return var(cminus_name(i)); }
Formula cbw(uint32_t i) { return var(cbw_name(i)); }

std::string state_name(const std::string& q) { return "@S_" + q; }
Formula state_var(const std::string& q) { return var(state_name(q)); }
std::string instr_var_name(const Instr& op) { return "@I_" + instr_name(op); }
Formula instr_var(const Instr& op) { return var(instr_var_name(op)); }

const char* kTick = "@Tick";

// AllC_i := <0>N & [0](N | <0>N -> C_i): "every vertical used below is
// counted", read at a column point.
Formula all_c(uint32_t i) {
  return conj(dia(0, vN()),
              box(0, impl(disj(vN(), dia(0, vN())), cbw(i))));
}

// TillStartAllC_i adds the segment fence: counted points were not yet
// recycled by a later start column.
Formula till_start_all_c(uint32_t i) {
  return conj(dia(0, vN()),
              box(0, impl(disj(vN(), dia(0, vN())),
                          conj(neg(vStart()), cbw(i)))));
}

// ------------------------------------------------------------ grid pieces

Formula initfw_f() { return conj(vS(), box(0, neg(vS()))); }
Formula dgenfw_f() {
  return box_plus(0, box_plus(1, impl(vS(), dia(1, vN()))));
}
Formula sgen_core() {
  return conj(dia(0, vS()), box(0, box(0, neg(vS()))));
}
Formula sgenfw_f() { return box_plus(0, box(1, impl(vN(), sgen_core()))); }
Formula sgenfin_f() {
  return box_plus(0, box(1, impl(conj(vN(), neg(vEnd())), sgen_core())));
}
Formula diaguniq_f() {
  return box_plus(0, box(1, impl(vN(), box(1, neg(vN())))));
}

Formula initfbw_f() { return dia(0, conj(vS(), box(0, bot()))); }
Formula dgenbw_f() { return box_plus(1, dia(0, vN())); }
Formula sgenbw_f() {
  return box_plus(1, box(0, impl(vN(), conj(box(1, neg(vN())), dia(1, vS())))));
}
Formula sgenb_f() { return box_plus(1, box(0, impl(vN(), sgen_core()))); }
Formula suni_f() {
  return box_plus(1,
                  box(0, impl(vS(), conj(box(0, neg(vS())), box(1, neg(vS()))))));
}

// --------------------------------------------------------- machine pieces

Formula counter_fw(uint32_t n) {
  std::vector<Formula> per;
  for (uint32_t i = 0; i < n; ++i)
    per.push_back(box_plus(
        0, box_plus(1, conj_all({impl(cplus(i), box(0, cplus(i))),
                                 impl(cminus(i), box(0, cminus(i))),
                                 impl(cminus(i), cplus(i))}))));
  return conj_all(per);
}

Formula allzero_f(uint32_t n) {
  std::vector<Formula> per;
  for (uint32_t i = 0; i < n; ++i)
    per.push_back(box_plus(1, conj(neg(cplus(i)), neg(cminus(i)))));
  return conj_all(per);
}

Formula counter_bw(uint32_t n) {
  std::vector<Formula> per;
  for (uint32_t i = 0; i < n; ++i)
    per.push_back(impl(cbw(i), disj(vN(), all_c(i))));
  return box_plus(1, box(0, conj_all(per)));
}

// One disjunct per state q: q holds and nothing else does.
Formula state_partition(const CounterMachine& m, bool include_halting) {
  std::vector<Formula> choices;
  for (uint32_t q = 0; q < m.size(); ++q) {
    if (!include_halting && m.is_halting(q)) continue;
    std::vector<Formula> parts{state_var(m.states[q])};
    for (uint32_t q2 = 0; q2 < m.size(); ++q2)
      if (q2 != q) parts.push_back(neg(state_var(m.states[q2])));
    choices.push_back(conj_all(parts));
  }
  return disj_all(choices);
}

std::vector<Instr> distinct_ops(const CounterMachine& m) {
  std::vector<Instr> out;
  for (const auto& per_state : m.instr)
    for (const auto& ins : per_state)
      if (std::find(out.begin(), out.end(), ins.op) == out.end())
        out.push_back(ins.op);
  return out;
}

// ------------------------------------------------------------- assembling

struct Build {
  CompiledEncoding enc;

  explicit Build(std::string tag, uint64_t hash = 0) {
    enc.target = std::move(tag);
    enc.machine_hash = hash;
  }
  void role(const std::string& r, const std::string& name) {
    enc.dict.define(r, name);
  }
  void add(const std::string& label, Formula f) {
    if (enc.has_conjunct(label))
      throw Error("duplicate conjunct label '" + label + "'");
    enc.conjuncts.emplace_back(label, f);
  }
  CompiledEncoding finish() {
    std::vector<Formula> fs;
    fs.reserve(enc.conjuncts.size());
    for (const auto& [l, f] : enc.conjuncts) fs.push_back(f);
    enc.formula = conj_all(fs);
    return std::move(enc);
  }
};

// The five uniformity conjuncts for (stem, variable p); defines the primed
// companion role. Base roles are the caller's business.
void add_interval(Build& b, const std::string& stem, const std::string& p,
                  const std::string& tick) {
  std::string pp = p + "'";
  b.role(stem + "'", pp);
  Formula P = var(p);
  Formula Pp = var(pp);
  std::string prefix = "Interval_" + stem + ".";
  b.add(prefix + "puniq",
        box_plus(1, box_plus(0, impl(P, box_bullet(tick, neg(P))))));
  b.add(prefix + "int1",
        box_plus(1, box_plus(0, impl(conj(dia(0, P), box_bullet(tick, neg(P))),
                                     P))));
  b.add(prefix + "int5",
        box_plus(1, box_plus(0, impl(conj(P, neg(dia_bullet(tick, top()))),
                                     box(0, P)))));
  b.add(prefix + "int2",
        box_plus(1, box_plus(0, impl(conj(P, dia_bullet(tick, top())),
                                     dia_bullet(tick, Pp)))));
  b.add(prefix + "int4",
        box_plus(1, box_plus(0, impl(P, box(0, impl(dia_bullet(tick, Pp), P))))));
}

void add_state_roles(Build& b, const CounterMachine& m) {
  for (const auto& q : m.states) b.role("S_" + q, state_name(q));
}

// ------------------------------------------------------- machine encoders

Formula fw_step(const CounterMachine& m, bool guarded_by_end) {
  std::vector<Formula> per_q;
  for (uint32_t q = 0; q < m.size(); ++q) {
    if (m.is_halting(q)) continue;
    Formula guard = state_var(m.states[q]);
    if (guarded_by_end)
      guard = conj(guard, dia(1, conj(vN(), neg(vEnd()))));
    std::vector<Formula> branches;
    for (const auto& ins : m.instr[q])
      branches.push_back(
          conj(compile_op_gadget(CounterVariant::Fw, ins.op, m.counters),
               next_around(state_var(m.states[ins.target]), vS(), vN())));
    per_q.push_back(impl(guard, disj_all(branches)));
  }
  return box_plus(1, box_plus(0, conj_all(per_q)));
}

CompiledEncoding compile_fw(const CounterMachine& m, Target t, int qr) {
  bool fin = t == Target::FwFiniteReach;
  Build b(target_tag(t), machine_hash(m));
  b.role("S", "@S");
  b.role("N", "@N");
  if (fin) b.role("end", "@end");
  add_state_roles(b, m);
  for (uint32_t i = 0; i < m.counters; ++i) {
    b.role("C" + std::to_string(i) + "+", cplus_name(i));
    b.role("C" + std::to_string(i) + "-", cminus_name(i));
  }

  b.add("initfw", initfw_f());
  b.add("dgenfw", dgenfw_f());
  if (fin)
    b.add("sgenfin", sgenfin_f());
  else
    b.add("sgenfw", sgenfw_f());
  b.add("counter", counter_fw(m.counters));
  b.add("allzero", allzero_f(m.counters));
  // The finite variant partitions over all states: halting configurations
  // still sit on the staircase, they just never step.
  b.add("griduniquetwo",
        box_plus(1, box_plus(0, iff(vS(), state_partition(m, fin)))));
  b.add("fwstep", fw_step(m, fin));
  b.add("initstate", state_var(m.states[0]));
  if (fin) {
    std::vector<Formula> stops;
    for (uint32_t q = 0; q < m.size(); ++q)
      if (m.is_halting(q))
        stops.push_back(
            impl(state_var(m.states[q]), box(1, impl(vN(), vEnd()))));
    b.add("endstops", box_plus(1, box_plus(0, conj_all(stops))));
    b.add("reach-target",
          box_plus(0, box(1, impl(conj(vN(), vEnd()),
                                  box(1, impl(vS(), state_var(m.states[qr])))))));
  } else {
    b.add("recur-target",
          box(0, dia(0, box(1, impl(vS(), state_var(m.states[qr]))))));
  }
  return b.finish();
}

Formula execute_bw_dec(const CounterMachine& m) {
  std::vector<Formula> per_q;
  for (uint32_t q = 0; q < m.size(); ++q) {
    if (m.is_halting(q)) continue;
    Formula guard =
        conj(vS(), dia(1, conj(vN(), dia(0, state_var(m.states[q])))));
    std::vector<Formula> branches;
    for (const auto& ins : m.instr[q])
      branches.push_back(
          conj(instr_var(ins.op), state_var(m.states[ins.target])));
    per_q.push_back(impl(guard, disj_all(branches)));
  }
  return box(1, box(0, conj_all(per_q)));
}

Formula inst_bw(const CounterMachine& m) {
  std::vector<Formula> per_op;
  for (const Instr& op : distinct_ops(m))
    per_op.push_back(impl(instr_var(op),
                          compile_op_gadget(CounterVariant::Bw, op, m.counters)));
  return box(1, box(0, conj_all(per_op)));
}

Formula initstate_bw(const CounterMachine& m) {
  return box_plus(1, box(0, impl(conj(vS(), box(0, bot())),
                                 state_var(m.states[0]))));
}

CompiledEncoding compile_bw(const CounterMachine& m, Target t, int qr) {
  bool rec = t == Target::BwRecurrence;
  Build b(target_tag(t), machine_hash(m));
  b.role("S", "@S");
  b.role("N", "@N");
  if (rec) {
    b.role("R", "@R");
    b.role("Q", "@Q");
  }
  add_state_roles(b, m);
  for (uint32_t i = 0; i < m.counters; ++i)
    b.role("C" + std::to_string(i), cbw_name(i));
  for (const Instr& op : distinct_ops(m))
    b.role("I_" + instr_name(op), instr_var_name(op));

  b.add("initfbw", initfbw_f());
  b.add("dgenbw", dgenbw_f());
  b.add("sgenbw", sgenbw_f());
  b.add("sgen", sgenb_f());
  b.add("suni", suni_f());
  if (rec) {
    b.add("erec", box_plus(1, box(0, impl(vS(), dia(1, vR())))));
    b.add("upd", box_plus(1, box(0, impl(vR(), box(0, neg(vS()))))));
    b.add("dgenr", box(0, impl(dia(1, vS()), dia(1, vN()))));
    b.add("dgenrdiff",
          box(1, box(0, impl(vS(), iff(vQ(),
                                       next_around(neg(vQ()), vS(), vN()))))));
  }
  b.add("counterbw", counter_bw(m.counters));
  b.add("gridunique", box_plus(1, box(0, iff(vS(), state_partition(m, false)))));
  b.add("executebwdec", execute_bw_dec(m));
  b.add("instbw", inst_bw(m));
  if (rec)
    b.add("rtos", box_plus(1, box(0, impl(conj(vS(), dia(0, vR())),
                                          state_var(m.states[qr])))));
  b.add("initstate", initstate_bw(m));
  return b.finish();
}

CompiledEncoding compile_dense(const CounterMachine& m) {
  Build b(target_tag(Target::DenseNonTermination), machine_hash(m));
  b.role("S", "@S");
  b.role("N", "@N");
  b.role("Tick", kTick);
  add_state_roles(b, m);
  std::vector<Instr> ops = distinct_ops(m);
  for (uint32_t i = 0; i < m.counters; ++i) {
    b.role("C" + std::to_string(i), cbw_name(i));
    b.role("C" + std::to_string(i) + "-", cminus_name(i));
  }
  for (const Instr& op : ops) b.role("I_" + instr_name(op), instr_var_name(op));

  auto bullet = [&](Formula f) { return bullet_translate(f, kTick); };

  b.add("initbwd",
        dia_bullet(kTick, conj(vS(), box_plus(1, box_bullet(kTick, bot())))));
  b.add("dgenbw.bullet", bullet(dgenbw_f()));
  b.add("sgenbw.bullet", bullet(sgenbw_f()));
  b.add("sgen.bullet", bullet(sgenb_f()));
  b.add("suni.bullet", bullet(suni_f()));
  b.add("tick", tick_coherence(kTick));
  add_interval(b, "N", "@N", kTick);
  add_interval(b, "S", "@S", kTick);

  b.add("counterbw.bullet", bullet(counter_bw(m.counters)));
  b.add("gridunique.bullet",
        bullet(box_plus(1, box(0, iff(vS(), state_partition(m, false))))));
  b.add("executebwdec.bullet", bullet(execute_bw_dec(m)));
  b.add("instbw.bullet", bullet(inst_bw(m)));

  for (uint32_t i = 0; i < m.counters; ++i) {
    std::string si = std::to_string(i);
    add_interval(b, "C" + si + "-", cminus_name(i), kTick);
    b.add("decuniq.C" + si,
          box_plus(1, box(0, iff(cminus(i),
                                 conj(neg(cbw(i)), bullet(all_c(i)))))));
  }
  for (const auto& q : m.states)
    add_interval(b, "S_" + q, state_name(q), kTick);
  for (const Instr& op : ops)
    add_interval(b, "I_" + instr_name(op), instr_var_name(op), kTick);

  b.add("initstate.bullet", bullet(initstate_bw(m)));
  return b.finish();
}

CompiledEncoding compile_lossy(const CounterMachine& m, Target t, int qr) {
  bool fin = t == Target::LossyFiniteReach;
  Build b(target_tag(t), machine_hash(m));
  b.role("S", "@S");
  b.role("N", "@N");
  if (fin) b.role("end", "@end");
  b.role("start", "@start");
  if (!fin) {
    b.role("R", "@R");
    b.role("S*", "@Sstar");
  }
  add_state_roles(b, m);
  for (uint32_t i = 0; i < m.counters; ++i)
    b.role("C" + std::to_string(i), cbw_name(i));

  b.add("initfw", initfw_f());
  b.add("dgenfw", dgenfw_f());
  if (fin)
    b.add("sgenfin", sgenfin_f());
  else
    b.add("sgenfw", sgenfw_f());
  b.add("diaguniq", diaguniq_f());
  b.add("startv", box_plus(0, box_plus(1, impl(vStart(), box(1, vStart())))));
  b.add("griduniquel",
        box_plus(0, box_plus(1, iff(vS(), state_partition(m, false)))));
  {
    std::vector<Formula> zeroed{state_var(m.states[0])};
    for (uint32_t i = 0; i < m.counters; ++i)
      zeroed.push_back(box_plus(1, neg(cbw(i))));
    b.add("initmmbwl",
          box_plus(0, box_plus(1, impl(conj(vS(), vStart()), conj_all(zeroed)))));
  }
  {
    std::vector<Formula> per_q;
    for (uint32_t q = 0; q < m.size(); ++q) {
      if (m.is_halting(q)) continue;
      Formula guard = conj(
          vS(), conj(neg(vStart()),
                     dia(1, conj(vN(), dia(0, state_var(m.states[q]))))));
      std::vector<Formula> branches;
      for (const auto& ins : m.instr[q])
        branches.push_back(
            conj(compile_op_gadget(CounterVariant::Lossy, ins.op, m.counters),
                 state_var(m.states[ins.target])));
      per_q.push_back(impl(guard, disj_all(branches)));
    }
    Formula body = conj_all(per_q);
    // On the single finite segment the step rule must also bite at the
    // root column, so the finite variant widens the scope to reflexive
    // boxes.
    b.add("executebwl", fin ? box_plus(0, box_plus(1, body))
                            : box(0, box(1, body)));
  }
  if (fin) {
    b.add("reach-target", state_var(m.states[qr]));
    b.add("endstart", box_plus(0, box_plus(1, iff(vEnd(), vStart()))));
  } else {
    b.add("recinit", conj(vStart(), box_plus(0, dia(0, vStart()))));
    b.add("startpoints",
          box_plus(0, box_plus(1, impl(vStart(),
              dia_plus(1, conj_all({vR(),
                                    dia(0, conj(vS(), neg(vStart()))),
                                    box(0, impl(dia(0, vS()), neg(vStart())))}))))));
    b.add("qr",
          box_plus(0, box_plus(1, impl(vR(), box(0, impl(vS(), vSstar()))))));
    b.add("recpoints",
          box(0, box_plus(1, impl(vSstar(),
              dia(1, conj_all({vR(),
                               dia(0, conj(vStart(),
                                           dia(0, conj(vS(), neg(vStart()))))),
                               box(0, impl(conj(vStart(), dia(0, vS())),
                                           box(0, impl(dia(0, vS()),
                                                       neg(vStart())))))}))))));
    b.add("sstars", box_plus(0, box_plus(1, impl(vSstar(), vS()))));
    b.add("svuniq", box_plus(0, box_plus(1, impl(vS(), box(1, neg(vS()))))));
    b.add("unipoints", box_plus(0, box_plus(1, impl(vR(), box(0, neg(vR()))))));
    b.add("recur-target",
          box_plus(0, box_plus(1, impl(vSstar(), state_var(m.states[qr])))));
  }
  return b.finish();
}

}  // namespace

// ------------------------------------------------------------ public API

Formula compile_fix(CounterVariant v, uint32_t i) {
  switch (v) {
    case CounterVariant::Fw:
      return conj(box_plus(1, impl(box(0, cplus(i)), cplus(i))),
                  box_plus(1, impl(box(0, cminus(i)), cminus(i))));
    case CounterVariant::Bw:
      return box_plus(1, iff(cbw(i), all_c(i)));
    case CounterVariant::BwBullet:
      return bullet_translate(compile_fix(CounterVariant::Bw, i), kTick);
    case CounterVariant::Lossy:
      return box_plus(1, impl(cbw(i), till_start_all_c(i)));
  }
  throw Error("bad counter variant");
}

Formula compile_inc(CounterVariant v, uint32_t i) {
  switch (v) {
    case CounterVariant::Fw:
      return conj(dia_eq1(conj(neg(cplus(i)), box(0, cplus(i)))),
                  box_plus(1, impl(box(0, cminus(i)), cminus(i))));
    case CounterVariant::Bw:
      return box_plus(1, iff(cbw(i), disj(vN(), all_c(i))));
    case CounterVariant::BwBullet:
      return bullet_translate(compile_inc(CounterVariant::Bw, i), kTick);
    case CounterVariant::Lossy:
      return box_plus(1, impl(cbw(i), disj(vN(), till_start_all_c(i))));
  }
  throw Error("bad counter variant");
}

Formula compile_dec(CounterVariant v, uint32_t i) {
  switch (v) {
    case CounterVariant::Fw:
      // The second conjunct is one-step only: the decremented point itself
      // keeps its mark.
      return conj(dia_eq1(conj(neg(cminus(i)), box(0, cminus(i)))),
                  box(1, impl(box(0, cplus(i)), cplus(i))));
    case CounterVariant::Bw:
      return conj(box_plus(1, impl(cbw(i), all_c(i))),
                  dia_eq1(conj(neg(cbw(i)), all_c(i))));
    case CounterVariant::BwBullet:
      return bullet_translate(compile_dec(CounterVariant::Bw, i), kTick);
    case CounterVariant::Lossy:
      // Lossiness shows up here: some vertical drops out, not exactly one.
      return conj(box_plus(1, impl(cbw(i), till_start_all_c(i))),
                  dia_plus(1, conj(neg(cbw(i)), till_start_all_c(i))));
  }
  throw Error("bad counter variant");
}

Formula compile_op_gadget(CounterVariant v, Instr op, uint32_t counters) {
  if (op.counter >= counters)
    throw Error("instruction counter out of range");
  std::vector<Formula> parts;
  switch (op.kind) {
    case InstrKind::Inc:
      parts.push_back(compile_inc(v, op.counter));
      for (uint32_t j = 0; j < counters; ++j)
        if (j != op.counter) parts.push_back(compile_fix(v, j));
      break;
    case InstrKind::Dec:
      parts.push_back(compile_dec(v, op.counter));
      for (uint32_t j = 0; j < counters; ++j)
        if (j != op.counter) parts.push_back(compile_fix(v, j));
      break;
    case InstrKind::Zero: {
      Formula zero;
      switch (v) {
        case CounterVariant::Fw:
          zero = box_plus(1, impl(cplus(op.counter), cminus(op.counter)));
          break;
        case CounterVariant::Bw:
        case CounterVariant::BwBullet:
        case CounterVariant::Lossy:
          zero = box_plus(1, neg(cbw(op.counter)));
          break;
      }
      parts.push_back(zero);
      for (uint32_t j = 0; j < counters; ++j)
        parts.push_back(compile_fix(v, j));
      break;
    }
  }
  return conj_all(parts);
}

CompiledEncoding compile_grid(GridVariant v) {
  switch (v) {
    case GridVariant::Fw: {
      Build b("grid_fw");
      b.role("S", "@S");
      b.role("N", "@N");
      b.add("initfw", initfw_f());
      b.add("dgenfw", dgenfw_f());
      b.add("sgenfw", sgenfw_f());
      return b.finish();
    }
    case GridVariant::Fin: {
      Build b("grid_fin");
      b.role("S", "@S");
      b.role("N", "@N");
      b.role("end", "@end");
      b.add("initfw", initfw_f());
      b.add("dgenfw", dgenfw_f());
      b.add("sgenfin", sgenfin_f());
      return b.finish();
    }
    case GridVariant::Bw: {
      Build b("grid_bw");
      b.role("S", "@S");
      b.role("N", "@N");
      b.add("initfbw", initfbw_f());
      b.add("dgenbw", dgenbw_f());
      b.add("sgenbw", sgenbw_f());
      b.add("sgen", sgenb_f());
      b.add("suni", suni_f());
      return b.finish();
    }
    case GridVariant::Star: {
      Build b("grid_star");
      b.role("S", "@S");
      b.role("N", "@N");
      b.role("Tick", kTick);
      auto bullet = [&](Formula f) { return bullet_translate(f, kTick); };
      b.add("initbwd", dia_bullet(kTick, conj(vS(), box_plus(1, box_bullet(
                                                        kTick, bot())))));
      b.add("dgenbw.bullet", bullet(dgenbw_f()));
      b.add("sgenbw.bullet", bullet(sgenbw_f()));
      b.add("sgen.bullet", bullet(sgenb_f()));
      b.add("suni.bullet", bullet(suni_f()));
      b.add("tick", tick_coherence(kTick));
      add_interval(b, "N", "@N", kTick);
      add_interval(b, "S", "@S", kTick);
      return b.finish();
    }
    case GridVariant::Unique: {
      Build b("grid_unique");
      b.role("S", "@S");
      b.role("N", "@N");
      b.add("initfw", initfw_f());
      b.add("dgenfw", dgenfw_f());
      b.add("sgenfw", sgenfw_f());
      b.add("diaguniq", diaguniq_f());
      return b.finish();
    }
    case GridVariant::UniqueFin: {
      Build b("grid_unique_fin");
      b.role("S", "@S");
      b.role("N", "@N");
      b.role("end", "@end");
      b.add("initfw", initfw_f());
      b.add("dgenfw", dgenfw_f());
      b.add("sgenfin", sgenfin_f());
      b.add("diaguniq", diaguniq_f());
      return b.finish();
    }
  }
  throw Error("bad grid variant");
}

CompiledEncoding compile_counter_layer(CounterVariant v, uint32_t counters) {
  if (counters < 2) throw Error("counter layer needs at least two counters");
  switch (v) {
    case CounterVariant::Fw: {
      Build b("counter_fw");
      for (uint32_t i = 0; i < counters; ++i) {
        b.role("C" + std::to_string(i) + "+", cplus_name(i));
        b.role("C" + std::to_string(i) + "-", cminus_name(i));
      }
      b.add("counter", counter_fw(counters));
      return b.finish();
    }
    case CounterVariant::Bw: {
      Build b("counter_bw");
      b.role("N", "@N");
      for (uint32_t i = 0; i < counters; ++i)
        b.role("C" + std::to_string(i), cbw_name(i));
      b.add("counterbw", counter_bw(counters));
      return b.finish();
    }
    case CounterVariant::BwBullet: {
      Build b("counter_bw_bullet");
      b.role("N", "@N");
      b.role("Tick", kTick);
      for (uint32_t i = 0; i < counters; ++i)
        b.role("C" + std::to_string(i), cbw_name(i));
      b.add("counterbw.bullet", bullet_translate(counter_bw(counters), kTick));
      return b.finish();
    }
    case CounterVariant::Lossy: {
      Build b("counter_lossy");
      b.role("N", "@N");
      b.role("start", "@start");
      for (uint32_t i = 0; i < counters; ++i)
        b.role("C" + std::to_string(i), cbw_name(i));
      for (uint32_t i = 0; i < counters; ++i)
        b.add("TillStartAllC" + std::to_string(i), till_start_all_c(i));
      return b.finish();
    }
  }
  throw Error("bad counter variant");
}

const char* target_tag(Target t) {
  switch (t) {
    case Target::FwRecurrence: return "fw_recurrence";
    case Target::FwFiniteReach: return "fw_finite_reach";
    case Target::BwNonTermination: return "bw_nontermination";
    case Target::BwRecurrence: return "bw_recurrence";
    case Target::DenseNonTermination: return "dense_nontermination";
    case Target::LossyOmegaReach: return "lossy_omega_reach";
    case Target::LossyFiniteReach: return "lossy_finite_reach";
  }
  throw Error("bad target");
}

CompiledEncoding compile_machine(const CounterMachine& m, Target t,
                                 const std::string& recur_state) {
  bool needs_state = t != Target::BwNonTermination &&
                     t != Target::DenseNonTermination;
  int qr = -1;
  if (needs_state) {
    if (recur_state.empty())
      throw Error(std::string(target_tag(t)) +
                  " needs a distinguished state");
    qr = m.state_index(recur_state);
    if (qr < 0) throw Error("unknown state: " + recur_state);
  }
  switch (t) {
    case Target::FwRecurrence:
    case Target::FwFiniteReach:
      return compile_fw(m, t, qr);
    case Target::BwNonTermination:
    case Target::BwRecurrence:
      return compile_bw(m, t, qr);
    case Target::DenseNonTermination:
      return compile_dense(m);
    case Target::LossyOmegaReach:
    case Target::LossyFiniteReach:
      return compile_lossy(m, t, qr);
  }
  throw Error("bad target");
}

// ------------------------------------------------------------- tick trick

Formula dia_bullet(const std::string& tick, Formula f) {
  Formula T = var(tick);
  Formula reach = disj(f, dia(0, f));
  return disj(conj(T, dia(0, conj(neg(T), reach))),
              conj(neg(T), dia(0, conj(T, reach))));
}

Formula box_bullet(const std::string& tick, Formula f) {
  return neg(dia_bullet(tick, neg(f)));
}

Formula tick_coherence(const std::string& tick) {
  Formula T = var(tick);
  return box_plus(1, box_plus(0, impl(disj(T, dia(1, T)),
                                      conj(T, box(1, T)))));
}

Formula bullet_translate(Formula f, const std::string& tick) {
  if (!f.valid()) throw Error("bullet_translate: empty formula");
  std::unordered_map<const Node*, Formula> memo;
  std::function<Formula(const Node*)> rec = [&](const Node* n) -> Formula {
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    Formula out;
    switch (n->op) {
      case Op::Var:
      case Op::Top:
      case Op::Bot:
        out = Formula(n);
        break;
      case Op::Neg:
        out = neg(rec(n->a));
        break;
      case Op::And:
        out = conj(rec(n->a), rec(n->b));
        break;
      case Op::Dia:
        out = n->modality == 0 ? dia_bullet(tick, rec(n->a))
                               : dia(1, rec(n->a));
        break;
    }
    memo.emplace(n, out);
    return out;
  };
  return rec(f.node());
}

CompiledEncoding compile_interval(const std::string& p,
                                  const std::string& tick) {
  std::string stem = p;
  if (!stem.empty() && stem[0] == '@') stem.erase(stem.begin());
  Build b("interval_" + stem);
  b.role(stem, p);
  if (p != tick) b.role("Tick", tick);
  add_interval(b, stem, p, tick);
  return b.finish();
}

// ------------------------------------------------------ class reductions

Formula relativize(Formula f, Relativization mode) {
  if (!f.valid()) throw Error("relativize: empty formula");
  std::string dname = "@D";
  {
    auto used = vars(f);
    while (std::binary_search(used.begin(), used.end(), dname)) dname += "'";
  }
  Formula D = var(dname);

  std::unordered_map<const Node*, Formula> memo;
  std::function<Formula(const Node*)> rel = [&](const Node* n) -> Formula {
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    Formula out;
    switch (n->op) {
      case Op::Var:
      case Op::Top:
      case Op::Bot:
        out = Formula(n);
        break;
      case Op::Neg:
        out = neg(rel(n->a));
        break;
      case Op::And:
        out = conj(rel(n->a), rel(n->b));
        break;
      case Op::Dia:
        out = dia(n->modality, conj(D, rel(n->a)));
        break;
    }
    memo.emplace(n, out);
    return out;
  };
  Formula relativized = rel(f.node());

  int n = int(modal_depth(f));
  Formula body = mode == Relativization::Decreasing ? impl(dia(0, D), D)
                                                    : impl(D, box(0, D));
  Formula guard = box_upto(0, n, box_upto(1, n, body));
  return conj(D, conj(guard, relativized));
}

Formula product_to_decreasing(Formula f) {
  if (!f.valid()) throw Error("product_to_decreasing: empty formula");
  Formula seen = dia(0, top());
  return conj(box_plus(1, box_plus(0, impl(seen, box(1, seen)))), f);
}

CompiledEncoding diff_to_linear(Formula f) {
  if (!f.valid()) throw Error("diff_to_linear: empty formula");
  Build b("diff_to_linear");
  std::vector<const Node*> subs = subformulas(f);

  // Marker names @P0.., primed until clear of f's own vocabulary.
  std::string base = "@P";
  {
    auto used = vars(f);
    auto clashes = [&]() {
      for (size_t k = 0; k < subs.size(); ++k)
        if (std::binary_search(used.begin(), used.end(),
                               base + std::to_string(k)))
          return true;
      return false;
    };
    while (clashes()) base += "'";
  }

  std::unordered_map<const Node*, Formula> marker;
  for (size_t k = 0; k < subs.size(); ++k) {
    std::string name = base + std::to_string(k);
    b.role("P[" + print(Formula(subs[k])) + "]", name);
    marker.emplace(subs[k], var(name));
  }

  std::unordered_map<const Node*, Formula> dag;
  for (const Node* n : subs) {
    Formula out;
    switch (n->op) {
      case Op::Var:
      case Op::Top:
      case Op::Bot:
        out = Formula(n);
        break;
      case Op::Neg:
        out = neg(dag.at(n->a));
        break;
      case Op::And:
        out = conj(dag.at(n->a), dag.at(n->b));
        break;
      case Op::Dia:
        out = n->modality == 0
                  ? dia(0, dag.at(n->a))
                  : disj(marker.at(n->a), dia(1, dag.at(n->a)));
        break;
    }
    dag.emplace(n, out);
  }

  std::vector<Formula> blocks;
  for (const Node* n : subs) {
    Formula P = marker.at(n);
    Formula psi = dag.at(n);
    blocks.push_back(conj_all({neg(P),
                               box_plus(1, impl(psi, box(1, P))),
                               impl(dia(1, P), dia_plus(1, conj(neg(P), psi)))}));
  }
  b.add("chi", box_plus(0, conj_all(blocks)));
  b.add("dagger", dag.at(f.node()));
  return b.finish();
}

// ----------------------------------------------------------------- text

std::string print_encoding(const CompiledEncoding& enc) {
  std::ostringstream out;
  out << "target: " << enc.target << "\n";
  if (enc.machine_hash != 0)
    out << "machine: " << std::hex << std::setw(16) << std::setfill('0')
        << enc.machine_hash << std::dec << "\n";
  out << enc.dict.serialize();
  for (const auto& [label, f] : enc.conjuncts)
    out << "conjunct " << label << ": " << print(f) << "\n";
  return out.str();
}

CompiledEncoding parse_encoding(const std::string& text) {
  CompiledEncoding enc;
  std::istringstream in(text);
  std::string line;
  std::vector<Formula> fs;
  bool saw_target = false;
  while (std::getline(in, line)) {
    size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line.rfind("target: ", 0) == 0) {
      enc.target = line.substr(8);
      saw_target = true;
    } else if (line.rfind("machine: ", 0) == 0) {
      enc.machine_hash = std::stoull(line.substr(9), nullptr, 16);
    } else if (line.rfind("conjunct ", 0) == 0) {
      std::string rest = line.substr(9);
      size_t colon = rest.find(": ");
      if (colon == std::string::npos)
        throw ParseError("bad conjunct line: '" + line + "'");
      Formula f = parse(rest.substr(colon + 2));
      enc.conjuncts.emplace_back(rest.substr(0, colon), f);
      fs.push_back(f);
    } else {
      size_t eq = line.find(" = ");
      if (eq == std::string::npos)
        throw ParseError("bad encoding line: '" + line + "'");
      enc.dict.define(line.substr(0, eq), line.substr(eq + 3));
    }
  }
  if (!saw_target) throw ParseError("encoding text has no target line");
  enc.formula = conj_all(fs);
  return enc;
}

}  // namespace bimodal
