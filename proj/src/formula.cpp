#include "bimodal/formula.hpp"

#include <algorithm>
#include <cctype>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_map>

namespace bimodal {

namespace {

struct Key {
  Op op;
  uint8_t modality;
  const Node* a;
  const Node* b;
  std::string name;
  bool operator==(const Key& o) const {
    return op == o.op && modality == o.modality && a == o.a && b == o.b &&
           name == o.name;
  }
};

struct KeyHash {
  size_t operator()(const Key& k) const {
    size_t h = static_cast<size_t>(k.op) * 0x9e3779b97f4a7c15ull;
    h ^= k.modality + (h << 6);
    h ^= std::hash<const void*>()(k.a) + 0x9e3779b9 + (h << 6) + (h >> 2);
    h ^= std::hash<const void*>()(k.b) + 0x9e3779b9 + (h << 6) + (h >> 2);
    h ^= std::hash<std::string>()(k.name) + (h << 6) + (h >> 2);
    return h;
  }
};

struct Pool {
  std::mutex mu;
  std::unordered_map<Key, std::unique_ptr<Node>, KeyHash> nodes;
  uint32_t next_id = 0;

  const Node* intern(Op op, uint8_t modality, const Node* a, const Node* b,
                     std::string name) {
    std::lock_guard<std::mutex> lock(mu);
    Key k{op, modality, a, b, name};
    auto it = nodes.find(k);
    if (it != nodes.end()) return it->second.get();
    auto n = std::make_unique<Node>();
    n->op = op;
    n->modality = modality;
    n->id = next_id++;
    n->a = a;
    n->b = b;
    n->name = std::move(name);
    uint32_t d = 0;
    if (a) d = std::max(d, a->depth);
    if (b) d = std::max(d, b->depth);
    if (op == Op::Dia) d += 1;
    n->depth = d;
    const Node* raw = n.get();
    nodes.emplace(std::move(k), std::move(n));
    return raw;
  }
};

Pool& pool() {
  static Pool p;
  return p;
}

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '@' || c == '_';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '@' || c == '_' ||
         c == '\'';
}

}  // namespace

Formula var(const std::string& name) {
  if (name.empty() || !ident_start(name[0]))
    throw Error("bad variable name: '" + name + "'");
  for (char c : name)
    if (!ident_char(c)) throw Error("bad variable name: '" + name + "'");
  if (name == "true" || name == "false" || name == "X")
    throw Error("variable name '" + name + "' is reserved");
  return Formula(pool().intern(Op::Var, 0, nullptr, nullptr, name));
}

Formula top() { return Formula(pool().intern(Op::Top, 0, nullptr, nullptr, "")); }
Formula bot() { return Formula(pool().intern(Op::Bot, 0, nullptr, nullptr, "")); }

Formula neg(Formula f) {
  return Formula(pool().intern(Op::Neg, 0, f.node(), nullptr, ""));
}

Formula conj(Formula a, Formula b) {
  return Formula(pool().intern(Op::And, 0, a.node(), b.node(), ""));
}

Formula dia(int i, Formula f) {
  if (i != 0 && i != 1) throw Error("modality index must be 0 or 1");
  return Formula(
      pool().intern(Op::Dia, static_cast<uint8_t>(i), f.node(), nullptr, ""));
}

Formula disj(Formula a, Formula b) { return neg(conj(neg(a), neg(b))); }
Formula impl(Formula a, Formula b) { return neg(conj(a, neg(b))); }
Formula iff(Formula a, Formula b) { return conj(impl(a, b), impl(b, a)); }
Formula box(int i, Formula f) { return neg(dia(i, neg(f))); }
Formula dia_plus(int i, Formula f) { return disj(f, dia(i, f)); }
Formula box_plus(int i, Formula f) { return conj(f, box(i, f)); }
Formula dia_eq1(Formula f) { return dia_plus(1, conj(f, box(1, neg(f)))); }

Formula box_upto(int i, int n, Formula f) {
  std::vector<Formula> parts;
  Formula cur = f;
  parts.push_back(cur);
  for (int k = 1; k <= n; k++) {
    cur = box(i, cur);
    parts.push_back(cur);
  }
  return conj_all(parts);
}

Formula conj_all(const std::vector<Formula>& fs) {
  if (fs.empty()) return top();
  Formula acc = fs.back();
  for (size_t i = fs.size() - 1; i-- > 0;) acc = conj(fs[i], acc);
  return acc;
}

Formula disj_all(const std::vector<Formula>& fs) {
  if (fs.empty()) return bot();
  Formula acc = fs.back();
  for (size_t i = fs.size() - 1; i-- > 0;) acc = disj(fs[i], acc);
  return acc;
}

Formula next_around(Formula f, Formula s, Formula n) {
  return box(1, impl(n, box(0, impl(s, f))));
}

uint32_t modal_depth(Formula f) { return f.node()->depth; }

std::vector<const Node*> subformulas(Formula f) {
  std::vector<const Node*> out;
  std::set<const Node*> seen;
  // Iterative post-order; the DAG is small but can be deep.
  std::vector<std::pair<const Node*, bool>> stack{{f.node(), false}};
  while (!stack.empty()) {
    auto [n, expanded] = stack.back();
    stack.pop_back();
    if (seen.count(n)) continue;
    if (expanded) {
      seen.insert(n);
      out.push_back(n);
      continue;
    }
    stack.push_back({n, true});
    if (n->b) stack.push_back({n->b, false});
    if (n->a) stack.push_back({n->a, false});
  }
  return out;
}

std::vector<std::string> vars(Formula f) {
  std::set<std::string> names;
  for (const Node* n : subformulas(f))
    if (n->op == Op::Var) names.insert(n->name);
  return std::vector<std::string>(names.begin(), names.end());
}

// ---------------------------------------------------------------- parsing

namespace {

enum class Tok {
  End, Ident, True, False, Neg, AndT, OrT, Impl, Iff,
  Dia0, Dia1, Box0, Box1, DiaPlus0, DiaPlus1, BoxPlus0, BoxPlus1,
  DiaEq1, Next, LParen, RParen
};

struct Lexer {
  const std::string& s;
  size_t pos = 0;
  Tok tok = Tok::End;
  std::string ident;

  explicit Lexer(const std::string& text) : s(text) { advance(); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("parse error at offset " + std::to_string(pos) + ": " +
                     msg);
  }

  void advance() {
    while (pos < s.size()) {
      char c = s[pos];
      if (c == '#') {
        while (pos < s.size() && s[pos] != '\n') pos++;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        pos++;
      } else {
        break;
      }
    }
    if (pos >= s.size()) {
      tok = Tok::End;
      return;
    }
    char c = s[pos];
    if (ident_start(c)) {
      size_t start = pos;
      while (pos < s.size() && ident_char(s[pos])) pos++;
      ident = s.substr(start, pos - start);
      if (ident == "true") tok = Tok::True;
      else if (ident == "false") tok = Tok::False;
      else if (ident == "X") tok = Tok::Next;
      else tok = Tok::Ident;
      return;
    }
    switch (c) {
      case '~': pos++; tok = Tok::Neg; return;
      case '&': pos++; tok = Tok::AndT; return;
      case '|': pos++; tok = Tok::OrT; return;
      case '(': pos++; tok = Tok::LParen; return;
      case ')': pos++; tok = Tok::RParen; return;
      case '-':
        if (pos + 1 < s.size() && s[pos + 1] == '>') {
          pos += 2;
          tok = Tok::Impl;
          return;
        }
        fail("stray '-'");
      case '<': {
        if (pos + 1 >= s.size()) fail("truncated '<'");
        char d = s[pos + 1];
        if (d == '-') {
          if (pos + 2 < s.size() && s[pos + 2] == '>') {
            pos += 3;
            tok = Tok::Iff;
            return;
          }
          fail("expected '<->'");
        }
        if ((d == '0' || d == '1') && pos + 2 < s.size() && s[pos + 2] == '>') {
          pos += 3;
          bool one = d == '1';
          if (pos < s.size() && s[pos] == '+') {
            pos++;
            tok = one ? Tok::DiaPlus1 : Tok::DiaPlus0;
            return;
          }
          if (one && pos + 1 < s.size() && s[pos] == '=' && s[pos + 1] == '1') {
            pos += 2;
            tok = Tok::DiaEq1;
            return;
          }
          tok = one ? Tok::Dia1 : Tok::Dia0;
          return;
        }
        fail("expected '<0>', '<1>' or '<->'");
      }
      case '[': {
        if (pos + 2 < s.size() && (s[pos + 1] == '0' || s[pos + 1] == '1') &&
            s[pos + 2] == ']') {
          bool one = s[pos + 1] == '1';
          pos += 3;
          if (pos < s.size() && s[pos] == '+') {
            pos++;
            tok = one ? Tok::BoxPlus1 : Tok::BoxPlus0;
            return;
          }
          tok = one ? Tok::Box1 : Tok::Box0;
          return;
        }
        fail("expected '[0]' or '[1]'");
      }
      default:
        fail(std::string("unexpected character '") + c + "'");
    }
  }
};

struct Parser {
  Lexer lx;
  explicit Parser(const std::string& text) : lx(text) {}

  Formula parse_iff() {
    Formula left = parse_impl();
    if (lx.tok == Tok::Iff) {
      lx.advance();
      return iff(left, parse_iff());
    }
    return left;
  }

  Formula parse_impl() {
    Formula left = parse_or();
    if (lx.tok == Tok::Impl) {
      lx.advance();
      return impl(left, parse_impl());
    }
    return left;
  }

  Formula parse_or() {
    Formula left = parse_and();
    if (lx.tok == Tok::OrT) {
      lx.advance();
      return disj(left, parse_or());
    }
    return left;
  }

  Formula parse_and() {
    Formula left = parse_unary();
    if (lx.tok == Tok::AndT) {
      lx.advance();
      return conj(left, parse_and());
    }
    return left;
  }

  Formula parse_unary() {
    switch (lx.tok) {
      case Tok::Neg: lx.advance(); return neg(parse_unary());
      case Tok::Dia0: lx.advance(); return dia(0, parse_unary());
      case Tok::Dia1: lx.advance(); return dia(1, parse_unary());
      case Tok::Box0: lx.advance(); return box(0, parse_unary());
      case Tok::Box1: lx.advance(); return box(1, parse_unary());
      case Tok::DiaPlus0: lx.advance(); return dia_plus(0, parse_unary());
      case Tok::DiaPlus1: lx.advance(); return dia_plus(1, parse_unary());
      case Tok::BoxPlus0: lx.advance(); return box_plus(0, parse_unary());
      case Tok::BoxPlus1: lx.advance(); return box_plus(1, parse_unary());
      case Tok::DiaEq1: lx.advance(); return dia_eq1(parse_unary());
      case Tok::Next:
        lx.advance();
        return next_around(parse_unary(), var("@S"), var("@N"));
      case Tok::True: lx.advance(); return top();
      case Tok::False: lx.advance(); return bot();
      case Tok::Ident: {
        Formula v = var(lx.ident);
        lx.advance();
        return v;
      }
      case Tok::LParen: {
        lx.advance();
        Formula f = parse_iff();
        if (lx.tok != Tok::RParen) lx.fail("expected ')'");
        lx.advance();
        return f;
      }
      default:
        lx.fail("expected a formula");
    }
  }
};

}  // namespace

Formula parse(const std::string& text) {
  Parser p(text);
  Formula f = p.parse_iff();
  if (p.lx.tok != Tok::End) p.lx.fail("trailing input");
  return f;
}

// --------------------------------------------------------------- printing

namespace {

// Precedence levels, loosest first. Used both for parenthesization and to
// decide when a child needs wrapping under right-associative chaining.
enum Prec { PrecImpl = 1, PrecOr, PrecAnd, PrecUnary, PrecAtom };

// Re-sugared view of a primitive node.
struct View {
  enum Kind { Plain, BoxK, OrK, ImplK } kind = Plain;
  const Node* x = nullptr;
  const Node* y = nullptr;
  int modality = 0;
};

View classify(const Node* n) {
  View v;
  if (n->op != Op::Neg) return v;
  const Node* c = n->a;
  if (c->op == Op::Dia && c->a->op == Op::Neg) {
    v.kind = View::BoxK;
    v.modality = c->modality;
    v.x = c->a->a;
    return v;
  }
  if (c->op == Op::And) {
    if (c->a->op == Op::Neg && c->b->op == Op::Neg) {
      v.kind = View::OrK;
      v.x = c->a->a;
      v.y = c->b->a;
      return v;
    }
    if (c->b->op == Op::Neg) {
      v.kind = View::ImplK;
      v.x = c->a;
      v.y = c->b->a;
      return v;
    }
  }
  return v;
}

void print_rec(const Node* n, int min_prec, std::string& out) {
  auto wrap = [&](int prec, auto&& body) {
    bool parens = prec < min_prec;
    if (parens) out += '(';
    body();
    if (parens) out += ')';
  };
  switch (n->op) {
    case Op::Var: out += n->name; return;
    case Op::Top: out += "true"; return;
    case Op::Bot: out += "false"; return;
    case Op::Dia:
      wrap(PrecUnary, [&] {
        out += n->modality ? "<1> " : "<0> ";
        print_rec(n->a, PrecUnary, out);
      });
      return;
    case Op::And:
      wrap(PrecAnd, [&] {
        print_rec(n->a, PrecAnd + 1, out);
        out += " & ";
        print_rec(n->b, PrecAnd, out);
      });
      return;
    case Op::Neg: {
      View v = classify(n);
      switch (v.kind) {
        case View::BoxK:
          wrap(PrecUnary, [&] {
            out += v.modality ? "[1] " : "[0] ";
            print_rec(v.x, PrecUnary, out);
          });
          return;
        case View::OrK:
          wrap(PrecOr, [&] {
            print_rec(v.x, PrecOr + 1, out);
            out += " | ";
            print_rec(v.y, PrecOr, out);
          });
          return;
        case View::ImplK:
          wrap(PrecImpl, [&] {
            print_rec(v.x, PrecImpl + 1, out);
            out += " -> ";
            print_rec(v.y, PrecImpl, out);
          });
          return;
        case View::Plain:
          wrap(PrecUnary, [&] {
            out += '~';
            print_rec(n->a, PrecUnary, out);
          });
          return;
      }
    }
  }
}

}  // namespace

std::string print(Formula f) {
  std::string out;
  print_rec(f.node(), 0, out);
  return out;
}

// ------------------------------------------------------------- dictionary

const std::string& VarDictionary::define(const std::string& role,
                                         const std::string& name) {
  if (has_role(role)) throw Error("dictionary role '" + role + "' redefined");
  if (has_name(name))
    throw Error("dictionary name '" + name + "' already in use");
  var(name);  // validates spelling
  entries_.emplace_back(role, name);
  return entries_.back().second;
}

const std::string& VarDictionary::name_of(const std::string& role) const {
  for (auto& [r, n] : entries_)
    if (r == role) return n;
  throw Error("dictionary has no role '" + role + "'");
}

bool VarDictionary::has_role(const std::string& role) const {
  for (auto& [r, n] : entries_)
    if (r == role) return true;
  return false;
}

bool VarDictionary::has_name(const std::string& name) const {
  for (auto& [r, n] : entries_)
    if (n == name) return true;
  return false;
}

Formula VarDictionary::var_of(const std::string& role) const {
  return var(name_of(role));
}

std::string VarDictionary::serialize() const {
  std::string out;
  for (auto& [r, n] : entries_) {
    out += r;
    out += " = ";
    out += n;
    out += '\n';
  }
  return out;
}

VarDictionary VarDictionary::deserialize(const std::string& text) {
  VarDictionary d;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto eq = line.find(" = ");
    if (eq == std::string::npos)
      throw ParseError("bad dictionary line: '" + line + "'");
    d.define(line.substr(0, eq), line.substr(eq + 3));
  }
  return d;
}

}  // namespace bimodal
