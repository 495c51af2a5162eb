// SPDX-License-Identifier: Apache-2.0
#include "fencer/ir.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace fencer {

// ---------------------------------------------------------------- Expr

ExprPtr Expr::var(std::string n) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Var;
  e->name = std::move(n);
  return e;
}
ExprPtr Expr::lit(std::string text) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Lit;
  e->name = std::move(text);
  return e;
}
ExprPtr Expr::nondet() {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Nondet;
  return e;
}
ExprPtr Expr::addr_of(std::string n) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::AddrOf;
  e->name = std::move(n);
  return e;
}
ExprPtr Expr::index(std::string base, ExprPtr idx, int site) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Index;
  e->name = std::move(base);
  e->kids = {std::move(idx)};
  e->site = site;
  return e;
}
ExprPtr Expr::deref(ExprPtr ptr, int site) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Deref;
  e->kids = {std::move(ptr)};
  e->site = site;
  return e;
}
ExprPtr Expr::unary(std::string op, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Unary;
  e->op = std::move(op);
  e->kids = {std::move(a)};
  return e;
}
ExprPtr Expr::binary(std::string op, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Binary;
  e->op = std::move(op);
  e->kids = {std::move(a), std::move(b)};
  return e;
}

namespace {

std::string sub(const Expr& e) {
  if (e.kind == Expr::Kind::Binary) return "(" + to_string(e) + ")";
  return to_string(e);
}

}  // namespace

std::string to_string(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Var: return e.name;
    case Expr::Kind::Lit: return e.name;
    case Expr::Kind::Nondet: return "nondet()";
    case Expr::Kind::AddrOf: return "&" + e.name;
    case Expr::Kind::Index: return e.name + "[" + to_string(*e.kids[0]) + "]";
    case Expr::Kind::Deref:
      if (e.kids[0]->kind == Expr::Kind::Var) return "*" + e.kids[0]->name;
      return "*(" + to_string(*e.kids[0]) + ")";
    case Expr::Kind::Unary: return e.op + sub(*e.kids[0]);
    case Expr::Kind::Binary: return sub(*e.kids[0]) + " " + e.op + " " + sub(*e.kids[1]);
  }
  return "?";
}

bool same_expr(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.name != b.name || a.op != b.op || a.kids.size() != b.kids.size())
    return false;
  for (std::size_t i = 0; i < a.kids.size(); ++i)
    if (!same_expr(*a.kids[i], *b.kids[i])) return false;
  return true;
}

// ---------------------------------------------------------------- Program

const Body& Program::body(int id) const {
  const int t = static_cast<int>(threads.size());
  return id < t ? threads.at(id) : functions.at(id - t);
}
Body& Program::body(int id) {
  const int t = static_cast<int>(threads.size());
  return id < t ? threads.at(id) : functions.at(id - t);
}
const Body* Program::find_function(const std::string& n) const {
  for (const auto& f : functions)
    if (f.name == n) return &f;
  return nullptr;
}
int Program::thread_index(const std::string& n) const {
  for (std::size_t i = 0; i < threads.size(); ++i)
    if (threads[i].name == n) return static_cast<int>(i);
  return -1;
}
const VarDecl* Program::find_var(const std::string& n) const {
  for (const auto& v : vars)
    if (v.name == n) return &v;
  return nullptr;
}
bool Program::uses_start_thread() const {
  for (int b = 0; b < body_count(); ++b)
    for (const auto& ins : body(b).code)
      if (ins.op == Op::StartThread || (ins.body && ins.body->op == Op::StartThread)) return true;
  return false;
}

std::string_view diagnostic_name(Diagnostic::Kind k) {
  using K = Diagnostic::Kind;
  switch (k) {
    case K::SyntaxError: return "SyntaxError";
    case K::UndefinedLabel: return "UndefinedLabel";
    case K::DuplicateLabel: return "DuplicateLabel";
    case K::UndefinedFunction: return "UndefinedFunction";
    case K::RecursiveCall: return "RecursiveCall";
    case K::UnbalancedAtomic: return "UnbalancedAtomic";
    case K::UndefinedThread: return "UndefinedThread";
    case K::RecursiveThreadStart: return "RecursiveThreadStart";
    case K::StartThreadInLoop: return "StartThreadInLoop";
    case K::UnstartedThread: return "UnstartedThread";
    case K::UndeclaredVariable: return "UndeclaredVariable";
    case K::DuplicateDeclaration: return "DuplicateDeclaration";
    case K::BadDependencySource: return "BadDependencySource";
  }
  return "?";
}

std::string format(const Diagnostic& d) {
  std::ostringstream os;
  os << d.pos.line << ":" << d.pos.col << ": " << diagnostic_name(d.kind) << ": " << d.message;
  return os.str();
}

IrError::IrError(Diagnostic d) : std::runtime_error(format(d)), diag_(std::move(d)) {}

// ---------------------------------------------------------------- lexer

namespace {

struct Token {
  enum class Kind { Ident, Number, Punct, End } kind = Kind::End;
  std::string text;
  SourcePos pos;
};

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  static const char* two[] = {"==", "!=", "<=", ">=", "&&", "||", "<<", ">>"};
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.pos = {line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Token::Kind::Ident;
      t.text = src.substr(i, j - i);
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isalnum(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Token::Kind::Number;
      t.text = src.substr(i, j - i);
      advance(j - i);
    } else {
      t.kind = Token::Kind::Punct;
      t.text = std::string(1, c);
      for (const char* op : two)
        if (src.compare(i, 2, op) == 0) t.text = op;
      if (std::string("[](){};:=,!<>+-*/%&|^~").find(c) == std::string::npos)
        throw IrError({Diagnostic::Kind::SyntaxError, std::string("unexpected character '") + c + "'", t.pos});
      advance(t.text.size());
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.pos = {line, col};
  out.push_back(end);
  return out;
}

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = {
      "shared", "local", "volatile", "func", "thread", "end_thread", "end_function", "goto",
      "assume", "assert", "skip", "atomic_begin", "atomic_end", "start_thread", "call",
      "fence", "nondet"};
  return k;
}

// ---------------------------------------------------------------- parser

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  Program program() {
    Program p;
    while (!at_end()) {
      const Token& t = peek();
      if (is("shared") || is("local")) {
        declaration(p);
      } else if (is("func")) {
        p.functions.push_back(body(false));
      } else if (is("thread")) {
        p.threads.push_back(body(true));
      } else {
        fail("expected 'shared', 'local', 'func' or 'thread', got '" + t.text + "'");
      }
    }
    if (p.threads.empty()) fail("program has no thread");
    return p;
  }

 private:
  std::vector<Token> toks_;
  std::size_t at_ = 0;
  int next_site_ = 0;

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(at_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Token::Kind::End; }
  bool is(const char* s, std::size_t k = 0) const {
    const Token& t = peek(k);
    return t.kind != Token::Kind::End && t.text == s;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw IrError({Diagnostic::Kind::SyntaxError, msg, peek().pos});
  }
  Token take() { return toks_[at_ < toks_.size() - 1 ? at_++ : at_]; }
  void expect(const char* s) {
    if (!is(s)) fail(std::string("expected '") + s + "', got '" + (at_end() ? "end of input" : peek().text) + "'");
    ++at_;
  }
  bool accept(const char* s) {
    if (!is(s)) return false;
    ++at_;
    return true;
  }
  std::string ident(const char* what) {
    const Token& t = peek();
    if (t.kind != Token::Kind::Ident || keywords().count(t.text))
      fail(std::string("expected ") + what + ", got '" + (at_end() ? "end of input" : t.text) + "'");
    return take().text;
  }
  std::string label_name() {
    const Token& t = peek();
    if (t.kind == Token::Kind::Number) return take().text;
    return ident("label");
  }

  void declaration(Program& p) {
    const bool shared = is("shared");
    ++at_;
    do {
      VarDecl d;
      d.pos = peek().pos;
      d.name = ident("variable name");
      d.shared = shared;
      if (shared && accept("[")) {
        const Token& n = peek();
        if (n.kind != Token::Kind::Number) fail("expected array size");
        d.is_array = true;
        d.size = std::stoi(take().text);
        expect("]");
      }
      if (shared && accept("volatile")) d.is_volatile = true;
      p.vars.push_back(std::move(d));
    } while (accept(","));
    accept(";");
  }

  Body body(bool thread) {
    Body b;
    b.pos = peek().pos;
    ++at_;
    b.is_thread = thread;
    b.name = ident(thread ? "thread name" : "function name");
    expect("{");
    const char* end = thread ? "end_thread" : "end_function";
    while (!is(end)) {
      if (at_end() || is("}")) fail(std::string("expected '") + end + "'");
      b.code.push_back(instruction(false));
    }
    Instruction fin;
    fin.pos = peek().pos;
    fin.op = thread ? Op::EndThread : Op::EndFunction;
    ++at_;
    accept(";");
    b.code.push_back(fin);
    expect("}");
    return b;
  }

  Instruction instruction(bool guarded) {
    Instruction ins;
    ins.pos = peek().pos;
    if (accept("[")) {
      ins.op = Op::Guard;
      ins.expr = expr();
      expect("]");
      if (is("end_thread") || is("end_function") || is("[") ||
          ((peek().kind == Token::Kind::Ident || peek().kind == Token::Kind::Number) && is(":", 1)))
        fail("a guard must govern a plain instruction");
      ins.body = std::make_shared<Instruction>(instruction(true));
      return ins;
    }
    if (!guarded && (peek().kind == Token::Kind::Ident || peek().kind == Token::Kind::Number) &&
        is(":", 1) && !keywords().count(peek().text)) {
      ins.op = Op::Label;
      ins.name = take().text;
      ++at_;
      return ins;
    }
    if (accept("goto")) {
      ins.op = Op::Goto;
      ins.name = label_name();
    } else if (is("assume") || is("assert")) {
      ins.op = is("assume") ? Op::Assume : Op::Assert;
      ++at_;
      expect("(");
      ins.expr = expr();
      expect(")");
    } else if (accept("skip")) {
      ins.op = Op::Skip;
    } else if (accept("atomic_begin")) {
      ins.op = Op::AtomicBegin;
    } else if (accept("atomic_end")) {
      ins.op = Op::AtomicEnd;
    } else if (accept("start_thread")) {
      ins.op = Op::StartThread;
      ins.name = ident("thread name");
    } else if (accept("call")) {
      ins.op = Op::Call;
      ins.name = ident("function name");
    } else if (accept("fence")) {
      ins.op = Op::Fence;
      expect("(");
      const Token& t = peek();
      auto ft = parse_fence(t.text);
      if (t.kind != Token::Kind::Ident || !ft) fail("expected fence type f, lwf, cf or dp");
      ++at_;
      ins.fence = *ft;
      if (*ft == FenceType::Dependency && accept(",")) ins.name = ident("dependency source local");
      expect(")");
    } else {
      ins.op = Op::Assign;
      ins.lhs = lvalue();
      expect("=");
      ins.expr = expr();
    }
    expect(";");
    return ins;
  }

  ExprPtr lvalue() {
    if (accept("*")) return deref_operand();
    std::string n = ident("assignment target");
    if (accept("[")) {
      ExprPtr idx = expr();
      expect("]");
      return Expr::index(n, idx, next_site_++);
    }
    return Expr::var(n);
  }

  ExprPtr deref_operand() {
    if (accept("(")) {
      ExprPtr e = expr();
      expect(")");
      return Expr::deref(e, next_site_++);
    }
    return Expr::deref(Expr::var(ident("pointer")), next_site_++);
  }

  static int precedence(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "|") return 3;
    if (op == "^") return 4;
    if (op == "&") return 5;
    if (op == "==" || op == "!=") return 6;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 7;
    if (op == "<<" || op == ">>") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*" || op == "/" || op == "%") return 10;
    return 0;
  }

  ExprPtr expr(int min_prec = 1) {
    ExprPtr lhs = unary();
    for (;;) {
      const Token& t = peek();
      const int p = t.kind == Token::Kind::Punct ? precedence(t.text) : 0;
      if (p < min_prec || p == 0) return lhs;
      std::string op = take().text;
      ExprPtr rhs = expr(p + 1);
      lhs = Expr::binary(op, lhs, rhs);
    }
  }

  ExprPtr unary() {
    if (accept("*")) return deref_operand();
    if (accept("&")) return Expr::addr_of(ident("variable"));
    for (const char* op : {"!", "-", "~"})
      if (accept(op)) return Expr::unary(op, unary());
    return primary();
  }

  ExprPtr primary() {
    const Token& t = peek();
    if (t.kind == Token::Kind::Number) return Expr::lit(take().text);
    if (accept("(")) {
      ExprPtr e = expr();
      expect(")");
      return e;
    }
    if (accept("nondet")) {
      expect("(");
      expect(")");
      return Expr::nondet();
    }
    std::string n = ident("expression");
    if (accept("[")) {
      ExprPtr idx = expr();
      expect("]");
      return Expr::index(n, idx, next_site_++);
    }
    return Expr::var(n);
  }
};

// ---------------------------------------------------------------- walkers

void for_each_expr(const Instruction& ins, const std::function<void(const Expr&)>& f) {
  if (ins.lhs) f(*ins.lhs);
  if (ins.expr) f(*ins.expr);
  if (ins.body) for_each_expr(*ins.body, f);
}

void visit(const Expr& e, const std::function<void(const Expr&)>& f) {
  f(e);
  for (const auto& k : e.kids) visit(*k, f);
}

// Innermost instruction (the guarded one for guards).
const Instruction& core(const Instruction& ins) { return ins.body ? *ins.body : ins; }

std::map<std::string, int> label_indices(const Body& b) {
  std::map<std::string, int> m;
  for (std::size_t i = 0; i < b.code.size(); ++i)
    if (b.code[i].op == Op::Label && !m.count(b.code[i].name)) m[b.code[i].name] = static_cast<int>(i);
  return m;
}

}  // namespace

Program parse_unchecked(const std::string& text) {
  Parser ps(text);
  Program p = ps.program();
  annotate_origins(p);
  return p;
}

Program parse_program(const std::string& text) {
  Program p = parse_unchecked(text);
  auto diags = validate(p);
  if (!diags.empty()) throw IrError(diags.front());
  return p;
}

void annotate_origins(Program& p) {
  for (int b = 0; b < p.body_count(); ++b) {
    Body& body = p.body(b);
    auto labels = label_indices(body);
    for (std::size_t i = 0; i < body.code.size(); ++i) {
      Instruction& ins = body.code[i];
      ins.origin = {b, static_cast<int>(i)};
      ins.origin_target = -1;
      const Instruction& c = core(ins);
      if (c.op == Op::Goto) {
        auto it = labels.find(c.name);
        if (it != labels.end()) ins.origin_target = it->second;
      }
    }
  }
}

std::vector<LoopSpan> find_loops(const Body& b) {
  std::vector<LoopSpan> out;
  auto labels = label_indices(b);
  for (std::size_t j = 0; j < b.code.size(); ++j) {
    const Instruction& c = core(b.code[j]);
    if (c.op != Op::Goto) continue;
    auto it = labels.find(c.name);
    if (it != labels.end() && it->second <= static_cast<int>(j))
      out.push_back({it->second, static_cast<int>(j)});
  }
  return out;
}

namespace {

bool expr_touches_shared(const Program& p, const Expr& e) {
  bool hit = false;
  visit(e, [&](const Expr& x) {
    if (x.kind == Expr::Kind::Deref) hit = true;
    if (x.kind == Expr::Kind::Var || x.kind == Expr::Kind::Index) {
      const VarDecl* d = p.find_var(x.name);
      if (d && d->shared) hit = true;
    }
  });
  return hit;
}

}  // namespace

bool touches_shared(const Program& p, const Instruction& ins) {
  bool hit = false;
  for_each_expr(ins, [&](const Expr& e) { hit = hit || expr_touches_shared(p, e); });
  return hit;
}

// ---------------------------------------------------------------- validate

std::vector<Diagnostic> validate(const Program& p) {
  using K = Diagnostic::Kind;
  std::vector<Diagnostic> out;

  std::set<std::string> names;
  for (const auto& v : p.vars)
    if (!names.insert(v.name).second) out.push_back({K::DuplicateDeclaration, "variable '" + v.name + "' declared twice", v.pos});
  std::set<std::string> bodies;
  for (int b = 0; b < p.body_count(); ++b) {
    const Body& body = p.body(b);
    const std::string key = (body.is_thread ? "thread " : "func ") + body.name;
    if (!bodies.insert(key).second) out.push_back({K::DuplicateDeclaration, key + " declared twice", body.pos});
  }

  // Labels, gotos, variables, atomics, per body.
  for (int b = 0; b < p.body_count(); ++b) {
    const Body& body = p.body(b);
    std::set<std::string> labels;
    for (const auto& ins : body.code)
      if (ins.op == Op::Label && !labels.insert(ins.name).second)
        out.push_back({K::DuplicateLabel, "label '" + ins.name + "' defined twice in " + body.name, ins.pos});
    int depth = 0;
    bool unbalanced = false;
    for (const auto& ins : body.code) {
      const Instruction& c = core(ins);
      if (c.op == Op::Goto && !labels.count(c.name))
        out.push_back({K::UndefinedLabel, "no label '" + c.name + "' in " + body.name, ins.pos});
      if (c.op == Op::Call && !p.find_function(c.name))
        out.push_back({K::UndefinedFunction, "call to undefined function '" + c.name + "'", ins.pos});
      if (c.op == Op::StartThread && p.thread_index(c.name) < 0)
        out.push_back({K::UndefinedThread, "start of undefined thread '" + c.name + "'", ins.pos});
      if (c.op == Op::Fence && c.fence == FenceType::Dependency && !c.name.empty()) {
        const VarDecl* d = p.find_var(c.name);
        if (!d || d->shared)
          out.push_back({K::BadDependencySource, "dependency source '" + c.name + "' is not a local", ins.pos});
      }
      if (c.op == Op::AtomicBegin) ++depth;
      if (c.op == Op::AtomicEnd && --depth < 0 && !unbalanced) {
        unbalanced = true;
        out.push_back({K::UnbalancedAtomic, "atomic_end without atomic_begin in " + body.name, ins.pos});
      }
      for_each_expr(ins, [&](const Expr& e) {
        visit(e, [&](const Expr& x) {
          if ((x.kind == Expr::Kind::Var || x.kind == Expr::Kind::Index || x.kind == Expr::Kind::AddrOf) &&
              !p.find_var(x.name))
            out.push_back({K::UndeclaredVariable, "undeclared variable '" + x.name + "'", ins.pos});
        });
      });
    }
    if (depth > 0 && !unbalanced)
      out.push_back({K::UnbalancedAtomic, "atomic_begin without atomic_end in " + body.name, body.pos});
  }

  // Call graph must be acyclic.
  {
    std::map<std::string, int> state;  // 0 new, 1 active, 2 done
    std::set<std::string> reported;
    std::function<void(const Body&)> dfs = [&](const Body& f) {
      state[f.name] = 1;
      for (const auto& ins : f.code) {
        const Instruction& c = core(ins);
        if (c.op != Op::Call) continue;
        const Body* g = p.find_function(c.name);
        if (!g) continue;
        if (state[g->name] == 1) {
          if (reported.insert(g->name).second)
            out.push_back({K::RecursiveCall, "recursive call to '" + g->name + "' from '" + f.name + "'", ins.pos});
        } else if (state[g->name] == 0) {
          dfs(*g);
        }
      }
      state[f.name] = 2;
    };
    for (const auto& f : p.functions)
      if (state[f.name] == 0) dfs(f);
  }

  // Functions that (transitively) start threads; thread start graph.
  std::map<std::string, std::set<std::string>> starts_fn;
  {
    std::function<const std::set<std::string>&(const Body&, std::set<std::string>&)> collect =
        [&](const Body& f, std::set<std::string>& seen) -> const std::set<std::string>& {
      auto it = starts_fn.find(f.name);
      if (it != starts_fn.end()) return it->second;
      std::set<std::string> s;
      seen.insert(f.name);
      for (const auto& ins : f.code) {
        const Instruction& c = core(ins);
        if (c.op == Op::StartThread) s.insert(c.name);
        if (c.op == Op::Call) {
          const Body* g = p.find_function(c.name);
          if (g && !seen.count(g->name)) {
            const auto& sub = collect(*g, seen);
            s.insert(sub.begin(), sub.end());
          }
        }
      }
      return starts_fn[f.name] = std::move(s);
    };
    for (const auto& f : p.functions) {
      std::set<std::string> seen;
      collect(f, seen);
    }
  }
  auto body_starts = [&](const Body& b) {
    std::set<std::string> s;
    for (const auto& ins : b.code) {
      const Instruction& c = core(ins);
      if (c.op == Op::StartThread) s.insert(c.name);
      if (c.op == Op::Call && starts_fn.count(c.name)) s.insert(starts_fn[c.name].begin(), starts_fn[c.name].end());
    }
    return s;
  };

  for (int b = 0; b < p.body_count(); ++b) {
    const Body& body = p.body(b);
    for (const auto& loop : find_loops(body)) {
      for (int i = loop.head; i <= loop.tail; ++i) {
        const Instruction& c = core(body.code[i]);
        const bool starts = c.op == Op::StartThread ||
                            (c.op == Op::Call && starts_fn.count(c.name) && !starts_fn[c.name].empty());
        if (starts)
          out.push_back({K::StartThreadInLoop, "thread started inside a loop in " + body.name, body.code[i].pos});
      }
    }
  }

  if (p.uses_start_thread() && !p.threads.empty()) {
    std::map<std::string, std::set<std::string>> edges;
    for (const auto& t : p.threads) edges[t.name] = body_starts(t);
    std::map<std::string, int> state;
    std::set<std::string> reached;
    std::function<void(const std::string&)> dfs = [&](const std::string& n) {
      state[n] = 1;
      reached.insert(n);
      for (const auto& m : edges[n]) {
        if (p.thread_index(m) < 0) continue;
        if (state[m] == 1)
          out.push_back({K::RecursiveThreadStart, "thread '" + m + "' is started from its own descendants", p.threads[p.thread_index(m)].pos});
        else if (state[m] == 0)
          dfs(m);
      }
      state[n] = 2;
    };
    dfs(p.threads[0].name);
    for (std::size_t i = 1; i < p.threads.size(); ++i)
      if (!reached.count(p.threads[i].name))
        out.push_back({K::UnstartedThread, "thread '" + p.threads[i].name + "' is never started", p.threads[i].pos});
  }
  return out;
}

// ---------------------------------------------------------------- printer

namespace {

std::string print_instruction(const Instruction& ins) {
  switch (ins.op) {
    case Op::Assign: return to_string(*ins.lhs) + " = " + to_string(*ins.expr) + ";";
    case Op::Guard: return "[" + to_string(*ins.expr) + "] " + print_instruction(*ins.body);
    case Op::Goto: return "goto " + ins.name + ";";
    case Op::Label: return ins.name + ":";
    case Op::Assume: return "assume(" + to_string(*ins.expr) + ");";
    case Op::Assert: return "assert(" + to_string(*ins.expr) + ");";
    case Op::Skip: return "skip;";
    case Op::AtomicBegin: return "atomic_begin;";
    case Op::AtomicEnd: return "atomic_end;";
    case Op::StartThread: return "start_thread " + ins.name + ";";
    case Op::EndThread: return "end_thread";
    case Op::Call: return "call " + ins.name + ";";
    case Op::Fence: {
      std::string s = "fence(" + std::string(fence_name(ins.fence));
      if (!ins.name.empty()) s += ", " + ins.name;
      return s + ");";
    }
    case Op::EndFunction: return "end_function";
  }
  return "";
}

}  // namespace

std::string print_program(const Program& p) {
  std::ostringstream os;
  for (const auto& v : p.vars) {
    os << (v.shared ? "shared " : "local ") << v.name;
    if (v.is_array) os << "[" << v.size << "]";
    if (v.is_volatile) os << " volatile";
    os << "\n";
  }
  auto emit = [&](const Body& b) {
    os << "\n" << (b.is_thread ? "thread " : "func ") << b.name << " {\n";
    for (const auto& ins : b.code) os << "  " << print_instruction(ins) << "\n";
    os << "}\n";
  };
  for (const auto& f : p.functions) emit(f);
  for (const auto& t : p.threads) emit(t);
  return os.str();
}

// ---------------------------------------------------------------- normalize

Program normalize_guards(const Program& p) {
  Program q = p;
  for (int b = 0; b < q.body_count(); ++b) {
    Body& body = q.body(b);
    std::set<std::string> used;
    for (const auto& ins : body.code)
      if (ins.op == Op::Label) used.insert(ins.name);
    int counter = 0;
    auto fresh = [&] {
      std::string n;
      do n = "__g" + std::to_string(counter++);
      while (used.count(n));
      used.insert(n);
      return n;
    };
    std::vector<Instruction> code;
    for (const auto& ins : body.code) {
      if (ins.op != Op::Guard || ins.body->op == Op::Goto || !expr_touches_shared(p, *ins.expr)) {
        code.push_back(ins);
        continue;
      }
      const std::string l = fresh();
      Instruction jump;
      jump.op = Op::Guard;
      jump.pos = ins.pos;
      jump.expr = Expr::unary("!", ins.expr);
      auto g = std::make_shared<Instruction>();
      g->op = Op::Goto;
      g->name = l;
      g->pos = ins.pos;
      jump.body = g;
      code.push_back(jump);
      code.push_back(*ins.body);
      Instruction lab;
      lab.op = Op::Label;
      lab.name = l;
      lab.pos = ins.pos;
      code.push_back(lab);
    }
    body.code = std::move(code);
  }
  annotate_origins(q);
  return q;
}

}  // namespace fencer
