#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "statmodel/frontend/annotation.hpp"
#include "statmodel/frontend/loop_scop.hpp"

namespace statmodel::frontend {

struct SourcePos {
  int line = 0;    // 1-based
  int column = 0;  // 1-based byte column
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Expressions share one node shape; `text` holds the operator, name or
// literal spelling depending on kind.
//   Unary:   text in {-, +, !, ~, *, &, ++, --}, kids {operand}
//   Postfix: text in {++, --}, kids {operand}
//   Binary:  kids {lhs, rhs}
//   Assign:  text in {=, +=, -=, *=, /=, %=}, kids {target, value}
//   Index:   kids {base, subscript}
//   Call:    kids {callee, args...}
//   Member:  text is the member name, `arrow` for ->, kids {object}
//   Ternary: kids {cond, then, else}
//   Cast:    text is the type, kids {operand}
struct Expr {
  enum class Kind { Int, Float, String, Char, Ident, Unary, Postfix, Binary, Assign, Index, Call, Member, Ternary, Cast };

  Kind kind = Kind::Int;
  std::string text;
  bool arrow = false;
  std::vector<ExprPtr> kids;
  SourcePos pos;
};

// How a token in a for-header participates in the loop.
enum class TokenRole { Plain, ForKeyword, ForInit, ForCond, ForStep };

struct OwnToken {
  SourcePos pos;
  TokenRole role = TokenRole::Plain;
};

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

struct Declarator {
  std::string name;
  int pointer_depth = 0;
  bool reference = false;
  std::vector<ExprPtr> dims;  // array extents; null entries for []
  ExprPtr init;               // `= init`
  std::vector<ExprPtr> ctor_args;
  bool has_ctor_call = false;
};

struct Decl {
  std::string type;
  std::vector<Declarator> declarators;
};

struct ForLoop {
  std::variant<std::monostate, Decl, ExprPtr> init;
  ExprPtr cond;
  ExprPtr step;
  StmtPtr body;
  std::variant<LoopSCoP, ScopFailure> scop;
};

struct IfStmt {
  ExprPtr cond;
  StmtPtr then_branch;
  StmtPtr else_branch;  // may be null
};

struct ExprStmt {
  ExprPtr expr;
};

// Expression statement whose outermost expression is a call.
struct CallStmt {
  std::string callee;
  ExprPtr object;  // receiver for member calls
  std::vector<ExprPtr> args;
  ExprPtr expr;
};

struct Block {
  std::vector<StmtPtr> stmts;
};

struct ReturnStmt {
  ExprPtr value;
};

struct Stmt {
  int id = 0;
  std::variant<ForLoop, IfStmt, ExprStmt, CallStmt, Block, Decl, ReturnStmt> node;
  SourcePos begin;
  SourcePos end;
  // Tokens of this statement that are not part of a child statement.
  std::vector<OwnToken> own_tokens;
  std::set<int> lines;
  // `lines` plus the lines of every child statement; filled by the metrics
  // bottom-up pass.
  std::set<int> all_lines;
  std::vector<Annotation> annotations;

  template <typename T>
  const T* as() const { return std::get_if<T>(&node); }
  template <typename T>
  T* as() { return std::get_if<T>(&node); }
};

struct Param {
  std::string name;
  std::string type;
};

struct FunctionDecl {
  std::string name;
  std::optional<std::string> class_name;
  std::vector<Param> params;
  StmtPtr body;  // always a Block
  int arity = 0;
  int line = 0;  // line of the function name

  std::string mangled_name() const;
};

struct SourceUnit {
  std::string file_name;
  std::vector<FunctionDecl> functions;
  std::vector<std::string> globals;
  std::map<int, std::set<int>> line_index;  // statement id -> lines
  int line_count = 0;

  const FunctionDecl* find_function(std::string_view mangled) const;
};

// Calls `fn` for `s` and every statement below it, parents first.
template <typename Fn>
void walk_stmts(const StmtPtr& s, Fn&& fn) {
  if (!s) return;
  fn(s);
  if (auto* f = s->as<ForLoop>()) {
    walk_stmts(f->body, fn);
  } else if (auto* i = s->as<IfStmt>()) {
    walk_stmts(i->then_branch, fn);
    walk_stmts(i->else_branch, fn);
  } else if (auto* b = s->as<Block>()) {
    for (const auto& c : b->stmts) walk_stmts(c, fn);
  }
}

// Calls `fn` for `e` and every sub-expression.
template <typename Fn>
void walk_exprs(const ExprPtr& e, Fn&& fn) {
  if (!e) return;
  fn(*e);
  for (const auto& k : e->kids) walk_exprs(k, fn);
}

SourceUnit parse_source(std::string_view text, std::string file_name);

// Reads the SCoP of a loop. `enclosing` lists the indices of the loops around
// it; any other free variable of a bound becomes a parameter.
std::variant<LoopSCoP, ScopFailure> extract_scop(const ForLoop& loop,
                                                 const std::set<std::string>& enclosing);

struct AffineResult {
  std::optional<poly::AffineExpr> expr;
  std::string why;  // set when expr is empty
};

// Affine form of an integer expression, or the reason it has none.
AffineResult to_affine(const Expr& e);

// Source text that parses back to a structurally identical unit.
std::string print_source(const SourceUnit& unit);
std::string print_expr(const Expr& e);

// Compares shape, names, literals and annotations; ignores positions and ids.
bool same_structure(const SourceUnit& a, const SourceUnit& b);

}  // namespace statmodel::frontend
