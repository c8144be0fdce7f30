#include "bimodal/foltl.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace bimodal {

namespace {

struct FKey {
  FOp op;
  const FNode* a;
  const FNode* b;
  std::string name;
  bool operator==(const FKey& o) const {
    return op == o.op && a == o.a && b == o.b && name == o.name;
  }
};

struct FKeyHash {
  size_t operator()(const FKey& k) const {
    size_t h = static_cast<size_t>(k.op) * 0x9e3779b97f4a7c15ull;
    h ^= std::hash<const void*>()(k.a) + 0x9e3779b9 + (h << 6) + (h >> 2);
    h ^= std::hash<const void*>()(k.b) + 0x9e3779b9 + (h << 6) + (h >> 2);
    h ^= std::hash<std::string>()(k.name) + (h << 6) + (h >> 2);
    return h;
  }
};

struct FPool {
  std::mutex mu;
  std::unordered_map<FKey, std::unique_ptr<FNode>, FKeyHash> nodes;
  uint32_t next_id = 0;

  const FNode* intern(FOp op, const FNode* a, const FNode* b, std::string name) {
    std::lock_guard<std::mutex> lock(mu);
    FKey k{op, a, b, name};
    auto it = nodes.find(k);
    if (it != nodes.end()) return it->second.get();
    auto n = std::make_unique<FNode>();
    n->op = op;
    n->id = next_id++;
    n->a = a;
    n->b = b;
    n->name = std::move(name);
    const FNode* raw = n.get();
    nodes.emplace(std::move(k), std::move(n));
    return raw;
  }
};

FPool& fpool() {
  static FPool p;
  return p;
}

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '@' || c == '_';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '@' || c == '_' ||
         c == '\'';
}

bool sorted_member(const std::vector<std::string>& v, const std::string& x) {
  return std::binary_search(v.begin(), v.end(), x);
}

}  // namespace

FoltlFormula fpred(const std::string& name) {
  if (name.empty() || !ident_start(name[0]))
    throw Error("bad predicate name: '" + name + "'");
  for (char c : name)
    if (!ident_char(c)) throw Error("bad predicate name: '" + name + "'");
  // true/false/X stay out so the star image is always a legal variable;
  // E would collide with the quantifier syntax when printed.
  if (name == "true" || name == "false" || name == "X" || name == "E")
    throw Error("predicate name '" + name + "' is reserved");
  return FoltlFormula(fpool().intern(FOp::Pred, nullptr, nullptr, name));
}

FoltlFormula fneg(FoltlFormula f) {
  return FoltlFormula(fpool().intern(FOp::Neg, f.node(), nullptr, ""));
}
FoltlFormula fand(FoltlFormula a, FoltlFormula b) {
  return FoltlFormula(fpool().intern(FOp::And, a.node(), b.node(), ""));
}
FoltlFormula fdia(FoltlFormula f) {
  return FoltlFormula(fpool().intern(FOp::DiaF, f.node(), nullptr, ""));
}
FoltlFormula fexists_ne(FoltlFormula f) {
  return FoltlFormula(fpool().intern(FOp::ExistsNe, f.node(), nullptr, ""));
}

FoltlFormula fdisj(FoltlFormula a, FoltlFormula b) {
  return fneg(fand(fneg(a), fneg(b)));
}
FoltlFormula fimpl(FoltlFormula a, FoltlFormula b) { return fneg(fand(a, fneg(b))); }
FoltlFormula fiff(FoltlFormula a, FoltlFormula b) {
  return fand(fimpl(a, b), fimpl(b, a));
}
FoltlFormula fbox(FoltlFormula f) { return fneg(fdia(fneg(f))); }
FoltlFormula fexists(FoltlFormula f) { return fdisj(f, fexists_ne(f)); }
FoltlFormula fexists_ge2(FoltlFormula f) { return fexists(fand(f, fexists_ne(f))); }
FoltlFormula fexists_eq1(FoltlFormula f) {
  // Shapes the "no second witness" half exactly like the bimodal box
  // desugaring ~<1>~~f, so star carries it onto <1>=1 node-for-node.
  return fexists(fand(f, fneg(fexists_ne(fneg(fneg(f))))));
}

// ---------------------------------------------------------------- parsing

namespace {

enum class FTok {
  End, Neg, AndT, OrT, Impl, Iff, DiaF, BoxF, ExNe, ExGe2, ExEq1, Ex, Ident,
  LParen, RParen
};

struct FLexer {
  std::string s;
  size_t i = 0;
  FTok tok = FTok::End;
  std::string ident;

  explicit FLexer(const std::string& text) : s(text) { advance(); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("foltl: " + msg + " (offset " + std::to_string(i) + ")");
  }

  void advance() {
    while (i < s.size()) {
      if (s[i] == '#') {
        while (i < s.size() && s[i] != '\n') ++i;
      } else if (std::isspace(static_cast<unsigned char>(s[i]))) {
        ++i;
      } else {
        break;
      }
    }
    if (i >= s.size()) {
      tok = FTok::End;
      return;
    }
    char c = s[i];
    switch (c) {
      case '~': ++i; tok = FTok::Neg; return;
      case '&': ++i; tok = FTok::AndT; return;
      case '|': ++i; tok = FTok::OrT; return;
      case '(': ++i; tok = FTok::LParen; return;
      case ')': ++i; tok = FTok::RParen; return;
      case '-':
        if (i + 1 < s.size() && s[i + 1] == '>') {
          i += 2;
          tok = FTok::Impl;
          return;
        }
        fail("expected ->");
      case '<':
        if (i + 2 < s.size() && s[i + 1] == '-' && s[i + 2] == '>') {
          i += 3;
          tok = FTok::Iff;
          return;
        }
        fail("expected <->");
      case '[':
        if (i + 2 < s.size() && s[i + 1] == 'F' && s[i + 2] == ']') {
          i += 3;
          tok = FTok::BoxF;
          return;
        }
        fail("expected [F]");
      default:
        break;
    }
    if (!ident_start(c)) fail("unexpected character");
    size_t j = i;
    while (j < s.size() && ident_char(s[j])) ++j;
    ident = s.substr(i, j - i);
    i = j;
    if (ident == "F" && i < s.size() && s[i] == '>') {
      ++i;
      tok = FTok::DiaF;
      return;
    }
    if (ident == "E") {
      if (i < s.size() && s[i] == '!') {
        if (i + 1 < s.size() && s[i + 1] == '=') {
          i += 2;
          tok = FTok::ExNe;
          return;
        }
        fail("expected E!=");
      }
      if (i < s.size() && s[i] == '>') {
        if (i + 2 < s.size() && s[i + 1] == '=' && s[i + 2] == '2') {
          i += 3;
          tok = FTok::ExGe2;
          return;
        }
        fail("expected E>=2");
      }
      if (i < s.size() && s[i] == '=') {
        if (i + 1 < s.size() && s[i + 1] == '1') {
          i += 2;
          tok = FTok::ExEq1;
          return;
        }
        fail("expected E=1");
      }
      tok = FTok::Ex;
      return;
    }
    tok = FTok::Ident;
  }
};

struct FParser {
  FLexer lx;
  explicit FParser(const std::string& text) : lx(text) {}

  FoltlFormula parse_iff() {
    FoltlFormula left = parse_impl();
    if (lx.tok == FTok::Iff) {
      lx.advance();
      return fiff(left, parse_iff());
    }
    return left;
  }
  FoltlFormula parse_impl() {
    FoltlFormula left = parse_or();
    if (lx.tok == FTok::Impl) {
      lx.advance();
      return fimpl(left, parse_impl());
    }
    return left;
  }
  FoltlFormula parse_or() {
    FoltlFormula left = parse_and();
    if (lx.tok == FTok::OrT) {
      lx.advance();
      return fdisj(left, parse_or());
    }
    return left;
  }
  FoltlFormula parse_and() {
    FoltlFormula left = parse_unary();
    if (lx.tok == FTok::AndT) {
      lx.advance();
      return fand(left, parse_and());
    }
    return left;
  }

  void expect_x() {
    if (lx.tok != FTok::Ident || lx.ident != "x")
      lx.fail("the object variable is spelled x");
    lx.advance();
  }

  FoltlFormula parse_unary() {
    switch (lx.tok) {
      case FTok::Neg: lx.advance(); return fneg(parse_unary());
      case FTok::DiaF: lx.advance(); return fdia(parse_unary());
      case FTok::BoxF: lx.advance(); return fbox(parse_unary());
      case FTok::ExNe:
        lx.advance();
        expect_x();
        return fexists_ne(parse_unary());
      case FTok::Ex:
        lx.advance();
        expect_x();
        return fexists(parse_unary());
      case FTok::ExGe2:
        lx.advance();
        expect_x();
        return fexists_ge2(parse_unary());
      case FTok::ExEq1:
        lx.advance();
        expect_x();
        return fexists_eq1(parse_unary());
      case FTok::Ident: {
        std::string name = lx.ident;
        lx.advance();
        if (lx.tok != FTok::LParen) lx.fail("atoms are written P(x)");
        lx.advance();
        expect_x();
        if (lx.tok != FTok::RParen) lx.fail("atoms are written P(x)");
        lx.advance();
        return fpred(name);
      }
      case FTok::LParen: {
        lx.advance();
        FoltlFormula f = parse_iff();
        if (lx.tok != FTok::RParen) lx.fail("expected ')'");
        lx.advance();
        return f;
      }
      default:
        lx.fail("expected a formula");
    }
  }
};

}  // namespace

FoltlFormula parse_foltl(const std::string& text) {
  FParser p(text);
  FoltlFormula f = p.parse_iff();
  if (p.lx.tok != FTok::End) p.lx.fail("trailing input");
  return f;
}

// --------------------------------------------------------------- printing

namespace {

enum FPrec { FPrecImpl = 1, FPrecOr, FPrecAnd, FPrecUnary, FPrecAtom };

struct FView {
  enum Kind { Plain, BoxK, OrK, ImplK } kind = Plain;
  const FNode* x = nullptr;
  const FNode* y = nullptr;
};

FView fclassify(const FNode* n) {
  FView v;
  if (n->op != FOp::Neg) return v;
  const FNode* c = n->a;
  if (c->op == FOp::DiaF && c->a->op == FOp::Neg) {
    v.kind = FView::BoxK;
    v.x = c->a->a;
    return v;
  }
  if (c->op == FOp::And) {
    if (c->a->op == FOp::Neg && c->b->op == FOp::Neg) {
      v.kind = FView::OrK;
      v.x = c->a->a;
      v.y = c->b->a;
      return v;
    }
    if (c->b->op == FOp::Neg) {
      v.kind = FView::ImplK;
      v.x = c->a;
      v.y = c->b->a;
      return v;
    }
  }
  return v;
}

void fprint_rec(const FNode* n, int min_prec, std::string& out) {
  auto wrap = [&](int prec, auto&& body) {
    bool parens = prec < min_prec;
    if (parens) out += '(';
    body();
    if (parens) out += ')';
  };
  switch (n->op) {
    case FOp::Pred:
      out += n->name;
      out += "(x)";
      return;
    case FOp::DiaF:
      wrap(FPrecUnary, [&] {
        out += "F> ";
        fprint_rec(n->a, FPrecUnary, out);
      });
      return;
    case FOp::ExistsNe:
      wrap(FPrecUnary, [&] {
        out += "E!= x ";
        fprint_rec(n->a, FPrecUnary, out);
      });
      return;
    case FOp::And:
      wrap(FPrecAnd, [&] {
        fprint_rec(n->a, FPrecAnd + 1, out);
        out += " & ";
        fprint_rec(n->b, FPrecAnd, out);
      });
      return;
    case FOp::Neg: {
      FView v = fclassify(n);
      switch (v.kind) {
        case FView::BoxK:
          wrap(FPrecUnary, [&] {
            out += "[F] ";
            fprint_rec(v.x, FPrecUnary, out);
          });
          return;
        case FView::OrK:
          wrap(FPrecOr, [&] {
            fprint_rec(v.x, FPrecOr + 1, out);
            out += " | ";
            fprint_rec(v.y, FPrecOr, out);
          });
          return;
        case FView::ImplK:
          wrap(FPrecImpl, [&] {
            fprint_rec(v.x, FPrecImpl + 1, out);
            out += " -> ";
            fprint_rec(v.y, FPrecImpl, out);
          });
          return;
        case FView::Plain:
          wrap(FPrecUnary, [&] {
            out += '~';
            fprint_rec(n->a, FPrecUnary, out);
          });
          return;
      }
    }
  }
}

}  // namespace

std::string print_foltl(FoltlFormula f) {
  std::string out;
  fprint_rec(f.node(), 0, out);
  return out;
}

// ----------------------------------------------------------------- models

bool operator==(const FoltlModel& a, const FoltlModel& b) {
  return a.timeline.names == b.timeline.names && a.timeline.succ == b.timeline.succ &&
         a.domains == b.domains && a.interp == b.interp && a.mode == b.mode;
}

void validate(const FoltlModel& m) {
  size_t T = m.timeline.size();
  if (T == 0) throw Error("foltl model: empty timeline");
  for (size_t t = 0; t < T; ++t) {
    std::vector<uint32_t> want;
    for (size_t u = t + 1; u < T; ++u) want.push_back(uint32_t(u));
    if (m.timeline.succ[t] != want)
      throw Error("foltl model: timeline must be the canonical linear order");
  }
  if (m.domains.size() != T) throw Error("foltl model: one domain per instant");
  for (const auto& d : m.domains) {
    if (d.empty()) throw Error("foltl model: domains must be non-empty");
    if (!std::is_sorted(d.begin(), d.end()) ||
        std::adjacent_find(d.begin(), d.end()) != d.end())
      throw Error("foltl model: domains must be sorted and duplicate-free");
  }
  for (const auto& [p, per] : m.interp) {
    if (per.size() != T)
      throw Error("foltl model: interpretation of " + p + " must cover every instant");
    for (size_t t = 0; t < T; ++t) {
      if (!std::is_sorted(per[t].begin(), per[t].end()) ||
          std::adjacent_find(per[t].begin(), per[t].end()) != per[t].end())
        throw Error("foltl model: interpretation of " + p + " must be sorted");
      if (!std::includes(m.domains[t].begin(), m.domains[t].end(), per[t].begin(),
                         per[t].end()))
        throw Error("foltl model: " + p + " leaves the domain at instant " +
                    std::to_string(t));
    }
  }
  for (size_t t = 0; t + 1 < T; ++t) {
    const auto& cur = m.domains[t];
    const auto& nxt = m.domains[t + 1];
    bool grow = std::includes(nxt.begin(), nxt.end(), cur.begin(), cur.end());
    bool shrink = std::includes(cur.begin(), cur.end(), nxt.begin(), nxt.end());
    switch (m.mode) {
      case DomainMode::Constant:
        if (cur != nxt) throw Error("foltl model: constant mode needs equal domains");
        break;
      case DomainMode::Expanding:
        if (!grow) throw Error("foltl model: expanding mode violated");
        break;
      case DomainMode::Decreasing:
        if (!shrink) throw Error("foltl model: decreasing mode violated");
        break;
      case DomainMode::Free:
        break;
    }
  }
}

namespace {

bool feval(const FoltlModel& m, size_t t, const std::string& a, const FNode* n) {
  switch (n->op) {
    case FOp::Pred: {
      auto it = m.interp.find(n->name);
      return it != m.interp.end() && t < it->second.size() &&
             sorted_member(it->second[t], a);
    }
    case FOp::Neg:
      return !feval(m, t, a, n->a);
    case FOp::And:
      return feval(m, t, a, n->a) && feval(m, t, a, n->b);
    case FOp::DiaF:
      for (uint32_t u : m.timeline.succ[t])
        if (sorted_member(m.domains[u], a) && feval(m, u, a, n->a)) return true;
      return false;
    case FOp::ExistsNe:
      for (const std::string& b : m.domains[t])
        if (b != a && feval(m, t, b, n->a)) return true;
      return false;
  }
  return false;
}

}  // namespace

bool foltl_check(const FoltlModel& m, size_t t, const std::string& a, FoltlFormula f) {
  if (!f.valid()) throw Error("foltl_check: empty formula");
  if (t >= m.instants()) throw Error("foltl_check: instant out of range");
  if (!sorted_member(m.domains[t], a))
    throw Error("foltl_check: element " + a + " not in the domain at instant " +
                std::to_string(t));
  return feval(m, t, a, f.node());
}

// --------------------------------------------------- the correspondences

Formula star(FoltlFormula f) {
  if (!f.valid()) throw Error("star: empty formula");
  std::unordered_map<uint32_t, Formula> memo;
  std::function<Formula(const FNode*)> rec = [&](const FNode* n) -> Formula {
    auto it = memo.find(n->id);
    if (it != memo.end()) return it->second;
    Formula out;
    switch (n->op) {
      case FOp::Pred: out = var(n->name); break;
      case FOp::Neg: out = neg(rec(n->a)); break;
      case FOp::And: out = conj(rec(n->a), rec(n->b)); break;
      case FOp::DiaF: out = dia(0, rec(n->a)); break;
      case FOp::ExistsNe: out = dia(1, rec(n->a)); break;
    }
    memo.emplace(n->id, out);
    return out;
  };
  return rec(f.node());
}

FoltlFormula unstar(Formula f) {
  if (!f.valid()) throw Error("unstar: empty formula");
  std::unordered_map<uint32_t, FoltlFormula> memo;
  std::function<FoltlFormula(const Node*)> rec = [&](const Node* n) -> FoltlFormula {
    auto it = memo.find(n->id);
    if (it != memo.end()) return it->second;
    FoltlFormula out;
    switch (n->op) {
      case Op::Var: out = fpred(n->name); break;
      case Op::Neg: out = fneg(rec(n->a)); break;
      case Op::And: out = fand(rec(n->a), rec(n->b)); break;
      case Op::Dia: out = n->modality == 0 ? fdia(rec(n->a)) : fexists_ne(rec(n->a)); break;
      case Op::Top:
      case Op::Bot:
        throw Error("unstar: true/false have no first-order counterpart");
    }
    memo.emplace(n->id, out);
    return out;
  };
  return rec(f.node());
}

Model dagger(const FoltlModel& m) {
  validate(m);
  if (m.mode == DomainMode::Free)
    throw Error("dagger: free domain mode has no grid construction");
  std::vector<Frame> doms;
  doms.reserve(m.domains.size());
  for (const auto& d : m.domains) {
    Frame f;
    f.names = d;
    f.succ.resize(d.size());
    for (uint32_t i = 0; i < d.size(); ++i)
      for (uint32_t j = 0; j < d.size(); ++j)
        if (i != j) f.succ[i].push_back(j);
    doms.push_back(std::move(f));
  }
  GridTag tag = m.mode == DomainMode::Constant    ? GridTag::Product
                : m.mode == DomainMode::Expanding ? GridTag::Expanding
                                                  : GridTag::Decreasing;
  GridTwoFrame g = assemble(m.timeline, doms, tag);

  Model out;
  out.frame = std::move(g.tf);
  out.has_meta = true;
  out.meta = std::move(g.meta);
  std::unordered_map<std::string, uint32_t> vidx;
  for (uint32_t i = 0; i < out.meta.vnames.size(); ++i) vidx[out.meta.vnames[i]] = i;
  for (const auto& [p, per] : m.interp) {
    std::vector<uint32_t> worlds;
    for (uint32_t t = 0; t < per.size(); ++t)
      for (const std::string& e : per[t]) worlds.push_back(uint32_t(out.meta.at(t, vidx.at(e))));
    out.set_val(p, worlds);
  }
  return out;
}

FoltlModel undagger(const Model& md) {
  if (!md.has_meta) throw Error("undagger: model carries no grid coordinates");
  const GridMeta& meta = md.meta;
  FoltlModel m;
  m.timeline = meta.horizontal;
  m.mode = meta.tag == GridTag::Product     ? DomainMode::Constant
           : meta.tag == GridTag::Expanding ? DomainMode::Expanding
                                            : DomainMode::Decreasing;
  m.domains.resize(meta.columns.size());
  for (size_t h = 0; h < meta.columns.size(); ++h) {
    for (uint32_t w : meta.columns[h]) m.domains[h].push_back(meta.vnames[meta.coord[w].second]);
    std::sort(m.domains[h].begin(), m.domains[h].end());
  }
  for (const auto& [p, bits] : md.valuation) {
    std::vector<std::vector<std::string>> per(meta.columns.size());
    for (uint32_t w = 0; w < md.frame.size(); ++w)
      if (bits.get(w)) per[meta.coord[w].first].push_back(meta.vnames[meta.coord[w].second]);
    for (auto& v : per) std::sort(v.begin(), v.end());
    m.interp.emplace(p, std::move(per));
  }
  validate(m);
  return m;
}

}  // namespace bimodal
