#include <charconv>

#include "statmodel/frontend/ast.hpp"

namespace statmodel::frontend {

using poly::AffineExpr;

AffineExpr normalize_upper(Comparison cmp, const AffineExpr& bound) {
  switch (cmp) {
    case Comparison::Less: return bound - AffineExpr(1);
    case Comparison::Greater: return bound + AffineExpr(1);
    case Comparison::LessEqual:
    case Comparison::GreaterEqual: return bound;
  }
  return bound;
}

namespace {

std::optional<std::int64_t> parse_int_literal(std::string_view text) {
  while (!text.empty() && std::string_view("uUlL").find(text.back()) != std::string_view::npos) {
    text.remove_suffix(1);
  }
  int base = 10;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    base = 16;
    text.remove_prefix(2);
  } else if (text.size() > 1 && text[0] == '0') {
    base = 8;
    text.remove_prefix(1);
  }
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v, base);
  if (ec != std::errc() || p != text.data() + text.size()) return std::nullopt;
  return v;
}

bool integral_type(std::string_view t) {
  return t.find('*') == std::string_view::npos && t.find("double") == std::string_view::npos &&
         t.find("float") == std::string_view::npos;
}

AffineResult fail(std::string why) { return AffineResult{std::nullopt, std::move(why)}; }

std::optional<Comparison> comparison_of(std::string_view op) {
  if (op == "<") return Comparison::Less;
  if (op == "<=") return Comparison::LessEqual;
  if (op == ">") return Comparison::Greater;
  if (op == ">=") return Comparison::GreaterEqual;
  return std::nullopt;
}

Comparison mirrored(Comparison c) {
  switch (c) {
    case Comparison::Less: return Comparison::Greater;
    case Comparison::LessEqual: return Comparison::GreaterEqual;
    case Comparison::Greater: return Comparison::Less;
    case Comparison::GreaterEqual: return Comparison::LessEqual;
  }
  return c;
}

bool is_ident(const ExprPtr& e, std::string_view name) {
  return e && e->kind == Expr::Kind::Ident && e->text == name;
}

// Step of `i++`, `i -= 2`, `i = i + 3`, ...; nullopt when not of that shape.
std::optional<std::int64_t> step_of(const Expr& e, const std::string& index) {
  using K = Expr::Kind;
  if ((e.kind == K::Postfix || e.kind == K::Unary) && (e.text == "++" || e.text == "--") &&
      is_ident(e.kids[0], index)) {
    return e.text == "++" ? 1 : -1;
  }
  if (e.kind != K::Assign || !is_ident(e.kids[0], index)) return std::nullopt;
  if (e.text == "+=" || e.text == "-=") {
    auto r = to_affine(*e.kids[1]);
    if (!r.expr || !r.expr->is_constant()) return std::nullopt;
    return e.text == "+=" ? r.expr->constant() : -r.expr->constant();
  }
  if (e.text == "=") {
    auto r = to_affine(*e.kids[1]);
    if (!r.expr) return std::nullopt;
    AffineExpr rest = *r.expr - AffineExpr::variable(index);
    if (!rest.is_constant()) return std::nullopt;
    return rest.constant();
  }
  return std::nullopt;
}

}  // namespace

AffineResult to_affine(const Expr& e) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Int: {
      auto v = parse_int_literal(e.text);
      if (!v) return fail("integer literal '" + e.text + "' out of range");
      return {AffineExpr(*v), {}};
    }
    case K::Ident:
      if (e.text == "true") return {AffineExpr(1), {}};
      if (e.text == "false") return {AffineExpr(0), {}};
      if (e.text.find("::") != std::string::npos) return fail("qualified name '" + e.text + "'");
      return {AffineExpr::variable(e.text), {}};
    case K::Unary:
      if (e.text == "-" || e.text == "+") {
        auto r = to_affine(*e.kids[0]);
        if (r.expr && e.text == "-") r.expr = -*r.expr;
        return r;
      }
      return fail("operator '" + e.text + "'");
    case K::Binary: {
      if (e.text != "+" && e.text != "-" && e.text != "*") return fail("operator '" + e.text + "'");
      auto a = to_affine(*e.kids[0]);
      if (!a.expr) return a;
      auto b = to_affine(*e.kids[1]);
      if (!b.expr) return b;
      if (e.text == "+") return {*a.expr + *b.expr, {}};
      if (e.text == "-") return {*a.expr - *b.expr, {}};
      if (a.expr->is_constant()) return {*b.expr * a.expr->constant(), {}};
      if (b.expr->is_constant()) return {*a.expr * b.expr->constant(), {}};
      return fail("product of two variables");
    }
    case K::Cast:
      if (!integral_type(e.text)) return fail("cast to '" + e.text + "'");
      return to_affine(*e.kids[0]);
    case K::Call: {
      std::string name = e.kids[0]->kind == K::Ident || e.kids[0]->kind == K::Member ? e.kids[0]->text : "";
      return fail(name.empty() ? "function call" : "call to '" + name + "'");
    }
    case K::Index: return fail("array access");
    case K::Member: return fail("member access '" + e.text + "'");
    case K::Float: return fail("floating-point value");
    case K::String:
    case K::Char: return fail("literal '" + e.text + "'");
    case K::Postfix:
    case K::Assign: return fail("side effect");
    case K::Ternary: return fail("conditional expression");
  }
  return fail("unsupported expression");
}

std::variant<LoopSCoP, ScopFailure> extract_scop(const ForLoop& loop,
                                                 const std::set<std::string>& enclosing) {
  ScopFailure f;
  auto failed = [&f](ScopPart part, std::string why) {
    f.part = part;
    f.reason = std::move(why);
    return f;
  };
  auto note_params = [&f, &enclosing](const AffineExpr& e) {
    for (const auto& v : e.variables()) {
      if (!enclosing.count(v) && v != f.index) f.params.insert(v);
    }
  };

  // init
  const Expr* init_value = nullptr;
  if (const auto* d = std::get_if<Decl>(&loop.init)) {
    if (d->declarators.size() != 1 || !d->declarators[0].init) {
      return failed(ScopPart::Init, "init must declare exactly one initialized index");
    }
    f.index = d->declarators[0].name;
    init_value = d->declarators[0].init.get();
  } else if (const auto* e = std::get_if<ExprPtr>(&loop.init)) {
    const Expr& x = **e;
    if (x.kind != Expr::Kind::Assign || x.text != "=" || x.kids[0]->kind != Expr::Kind::Ident) {
      return failed(ScopPart::Init, "init is not an assignment to the index");
    }
    f.index = x.kids[0]->text;
    init_value = x.kids[1].get();
  } else {
    return failed(ScopPart::Init, "missing init");
  }
  if (enclosing.count(f.index)) return failed(ScopPart::Init, "index '" + f.index + "' reused by an enclosing loop");

  // step (read before the bound so failures still report the direction)
  if (loop.step) {
    if (auto s = step_of(*loop.step, f.index)) {
      if (*s != 0) f.step = *s;
    }
  }

  // condition
  std::optional<AffineExpr> bound;
  std::string cond_why;
  if (!loop.cond) {
    cond_why = "missing condition";
  } else if (loop.cond->kind == Expr::Kind::Binary && comparison_of(loop.cond->text)) {
    const ExprPtr& lhs = loop.cond->kids[0];
    const ExprPtr& rhs = loop.cond->kids[1];
    Comparison cmp = *comparison_of(loop.cond->text);
    const ExprPtr* other = nullptr;
    if (is_ident(lhs, f.index)) {
      other = &rhs;
    } else if (is_ident(rhs, f.index)) {
      other = &lhs;
      cmp = mirrored(cmp);
    }
    if (!other) {
      cond_why = "condition does not compare the index directly";
    } else {
      f.comparison = cmp;
      auto r = to_affine(**other);
      if (!r.expr) {
        cond_why = r.why + " in loop bound";
      } else if (r.expr->depends_on(f.index)) {
        cond_why = "bound depends on the index";
      } else {
        bound = r.expr;
      }
    }
  } else {
    cond_why = "condition is not a <, <=, > or >= comparison";
  }
  if (bound) {
    f.upper = normalize_upper(*f.comparison, *bound);
    note_params(*f.upper);
  }

  auto lower = to_affine(*init_value);
  if (lower.expr && lower.expr->depends_on(f.index)) lower = {std::nullopt, "init refers to the index"};
  if (lower.expr) {
    f.lower = lower.expr;
    note_params(*f.lower);
  }

  if (!lower.expr) return failed(ScopPart::Init, lower.why + " in loop init");
  if (!bound) return failed(ScopPart::Condition, cond_why);
  if (!f.step) return failed(ScopPart::Step, "step is not a constant increment of the index");
  bool up = *f.step > 0;
  bool cmp_up = *f.comparison == Comparison::Less || *f.comparison == Comparison::LessEqual;
  if (up != cmp_up) return failed(ScopPart::Condition, "loop steps away from its bound");

  LoopSCoP s;
  s.index = f.index;
  s.lower = *f.lower;
  s.upper = *f.upper;
  s.step = *f.step;
  s.comparison = *f.comparison;
  s.params = f.params;
  return s;
}

}  // namespace statmodel::frontend
