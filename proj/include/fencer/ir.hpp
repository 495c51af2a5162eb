// SPDX-License-Identifier: Apache-2.0
//
// Goto-style intermediate representation: declarations, thread bodies and
// inlinable functions made of guard/goto instructions over shared and local
// variables. Expressions are uninterpreted.
#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fencer/types.hpp"

namespace fencer {

struct SourcePos {
  int line = 0;
  int col = 0;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Var, Index, Deref, AddrOf, Lit, Nondet, Unary, Binary };
  Kind kind = Kind::Lit;
  std::string name;  // Var, Index (base), AddrOf; literal text for Lit
  std::string op;    // Unary / Binary operator
  std::vector<ExprPtr> kids;  // Index: {index}; Deref: {pointer}; Unary: {a}; Binary: {a, b}
  int site = -1;              // Index / Deref: access site id, unique per program

  static ExprPtr var(std::string n);
  static ExprPtr lit(std::string text);
  static ExprPtr nondet();
  static ExprPtr addr_of(std::string n);
  static ExprPtr index(std::string base, ExprPtr idx, int site);
  static ExprPtr deref(ExprPtr ptr, int site);
  static ExprPtr unary(std::string op, ExprPtr a);
  static ExprPtr binary(std::string op, ExprPtr a, ExprPtr b);
};

std::string to_string(const Expr& e);
bool same_expr(const Expr& a, const Expr& b);

enum class Op {
  Assign, Guard, Goto, Label, Assume, Assert, Skip, AtomicBegin, AtomicEnd,
  StartThread, EndThread, Call, Fence, EndFunction
};

// Position of an instruction in the program it was parsed from (or the one it
// was copied from by a transformation such as loop duplication).
struct Origin {
  int body = -1;
  int index = -1;
  bool valid() const { return body >= 0; }
  auto operator<=>(const Origin&) const = default;
};

struct Instruction {
  Op op = Op::Skip;
  ExprPtr lhs;   // Assign
  ExprPtr expr;  // Assign rhs; Guard / Assume / Assert condition
  std::shared_ptr<const Instruction> body;  // Guard: governed instruction
  std::string name;  // label, goto target, thread, function, or dp source local
  FenceType fence = FenceType::Full;
  SourcePos pos;
  Origin origin;
  int origin_target = -1;  // for a guarded goto: index of the target label in the origin body

  bool is_branch() const { return op == Op::Guard && body && body->op == Op::Goto; }
};

struct VarDecl {
  std::string name;
  bool shared = false;
  bool is_array = false;
  int size = 0;
  bool is_volatile = false;
  SourcePos pos;
};

struct Body {
  std::string name;
  bool is_thread = true;
  std::vector<Instruction> code;  // last instruction is EndThread / EndFunction
  SourcePos pos;
};

struct Program {
  std::vector<VarDecl> vars;
  std::vector<Body> threads;    // threads[0] is the entry thread
  std::vector<Body> functions;

  // Bodies are numbered threads first, then functions.
  int body_count() const { return static_cast<int>(threads.size() + functions.size()); }
  const Body& body(int id) const;
  Body& body(int id);
  const Body* find_function(const std::string& n) const;
  int thread_index(const std::string& n) const;
  const VarDecl* find_var(const std::string& n) const;
  bool uses_start_thread() const;
};

struct Diagnostic {
  enum class Kind {
    SyntaxError, UndefinedLabel, DuplicateLabel, UndefinedFunction, RecursiveCall,
    UnbalancedAtomic, UndefinedThread, RecursiveThreadStart, StartThreadInLoop,
    UnstartedThread, UndeclaredVariable, DuplicateDeclaration, BadDependencySource
  };
  Kind kind;
  std::string message;
  SourcePos pos;
};

std::string_view diagnostic_name(Diagnostic::Kind k);
std::string format(const Diagnostic& d);

class IrError : public std::runtime_error {
 public:
  explicit IrError(Diagnostic d);
  const Diagnostic& diagnostic() const { return diag_; }

 private:
  Diagnostic diag_;
};

// Syntax only: labels, calls and declarations are not checked.
Program parse_unchecked(const std::string& text);
// Syntax plus validate(); throws IrError carrying the first diagnostic.
Program parse_program(const std::string& text);

std::vector<Diagnostic> validate(const Program& p);

std::string print_program(const Program& p);

// Sets origin/origin_target of every instruction to its own position.
void annotate_origins(Program& p);

// Rewrites "[e] I" where e reads shared memory and I is not a goto into
// "[!(e)] goto L; I; L:" so that a fence can be placed between the condition
// and I. Origins are re-annotated.
Program normalize_guards(const Program& p);

// Loops are spans [label L .. goto L] with the goto after the label.
struct LoopSpan {
  int head = 0;  // index of the label
  int tail = 0;  // index of the backward (possibly guarded) goto
};
std::vector<LoopSpan> find_loops(const Body& b);

// True when the instruction (including a guard condition) may access shared
// memory. Dereferences count as shared.
bool touches_shared(const Program& p, const Instruction& ins);

}  // namespace fencer
