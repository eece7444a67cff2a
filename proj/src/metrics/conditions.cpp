#include <algorithm>

#include "statmodel/error.hpp"
#include "statmodel/metrics/metrics.hpp"

namespace statmodel::metrics {

using frontend::Annotation;
using frontend::AnnotationKind;
using frontend::Expr;

namespace {

CountExpr count_with(const poly::LoopNestDomain& d, const std::vector<const std::vector<AffineExpr>*>& conjs) {
  poly::LoopNestDomain x = d;
  for (const auto* conj : conjs) {
    for (const auto& c : *conj) x = poly::intersect_branch(x, c);
  }
  return poly::count_symbolic(x);
}

CountExpr apply(const Transform& t, const CountExpr& x) {
  using K = Transform::Kind;
  switch (t.kind) {
    case K::Times:
      return t.value * x;
    case K::PctTaken:
    case K::PctNotTaken: {
      CountExpr taken = CountExpr::floor_div(CountExpr::constant(boost::multiprecision::numerator(t.fraction)) * x,
                                             boost::multiprecision::denominator(t.fraction));
      return t.kind == K::PctTaken ? taken : x - taken;
    }
    case K::CapTaken:
      return x - CountExpr::max0(x - t.value);
    case K::CapNotTaken:
      return CountExpr::max0(x - t.value);
  }
  return x;
}

std::optional<std::vector<AffineExpr>> fail(std::string* why, std::string reason) {
  if (why && why->empty()) *why = std::move(reason);
  return std::nullopt;
}

const Annotation* find(const std::vector<Annotation>& anns, AnnotationKind kind) {
  for (const auto& a : anns) {
    if (a.kind == kind) return &a;
  }
  return nullptr;
}

// Rejects constraints over loop indices the domain does not model: those
// would otherwise be mistaken for free parameters.
bool over_modeled_vars(const std::vector<AffineExpr>& conj, const Region& ctx, std::string* why) {
  for (const auto& c : conj) {
    for (const auto& v : c.variables()) {
      bool is_index = std::find(ctx.loop_indices.begin(), ctx.loop_indices.end(), v) != ctx.loop_indices.end();
      if (is_index && !ctx.domain.has_index(v)) {
        if (why && why->empty()) *why = "condition uses index '" + v + "' of a loop without an affine domain";
        return false;
      }
    }
  }
  return true;
}

Region intersect(const Region& ctx, const std::vector<AffineExpr>& conj) {
  Region r = ctx;
  for (const auto& c : conj) r.domain = poly::intersect_branch(r.domain, c);
  return r;
}

Region exclude(const Region& ctx, const std::vector<AffineExpr>& conj) {
  Region r = ctx;
  r.exclusions.push_back(conj);
  return r;
}

}  // namespace

CountExpr multiplier(const Region& region) {
  // Inclusion-exclusion over the removed conjunctions.
  const std::size_t n = region.exclusions.size();
  std::vector<CountExpr> terms;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<const std::vector<AffineExpr>*> picked;
    for (std::size_t k = 0; k < n; ++k) {
      if (mask & (std::size_t{1} << k)) picked.push_back(&region.exclusions[k]);
    }
    CountExpr c = count_with(region.domain, picked);
    terms.push_back(picked.size() % 2 ? CountExpr::constant(-1) * c : c);
  }
  CountExpr x = terms.size() == 1 ? terms[0] : CountExpr::sum(std::move(terms));
  for (const auto& t : region.transforms) x = apply(t, x);
  return x;
}

Region with_transform(Region region, Transform t) {
  region.transforms.push_back(std::move(t));
  return region;
}

std::optional<std::vector<AffineExpr>> affine_conjunction(const Expr& cond, bool negated, std::string* why) {
  using K = Expr::Kind;
  if (cond.kind == K::Unary && cond.text == "!") return affine_conjunction(*cond.kids[0], !negated, why);

  if (cond.kind == K::Binary && (cond.text == "&&" || cond.text == "||")) {
    bool is_and = cond.text == "&&";
    if (is_and == negated) return fail(why, "disjunction");
    auto a = affine_conjunction(*cond.kids[0], negated, why);
    if (!a) return a;
    auto b = affine_conjunction(*cond.kids[1], negated, why);
    if (!b) return b;
    a->insert(a->end(), b->begin(), b->end());
    return a;
  }

  static const std::vector<std::string> kCompare = {"<", "<=", ">", ">=", "==", "!="};
  if (cond.kind == K::Binary && std::count(kCompare.begin(), kCompare.end(), cond.text)) {
    auto l = frontend::to_affine(*cond.kids[0]);
    if (!l.expr) return fail(why, l.why);
    auto r = frontend::to_affine(*cond.kids[1]);
    if (!r.expr) return fail(why, r.why);
    std::string op = cond.text;
    if (negated) {
      static const std::map<std::string, std::string> kNeg = {{"<", ">="}, {"<=", ">"}, {">", "<="},
                                                             {">=", "<"}, {"==", "!="}, {"!=", "=="}};
      op = kNeg.at(op);
    }
    const AffineExpr& a = *l.expr;
    const AffineExpr& b = *r.expr;
    if (op == "<") return std::vector<AffineExpr>{b - a - AffineExpr(1)};
    if (op == "<=") return std::vector<AffineExpr>{b - a};
    if (op == ">") return std::vector<AffineExpr>{a - b - AffineExpr(1)};
    if (op == ">=") return std::vector<AffineExpr>{a - b};
    if (op == "==") return std::vector<AffineExpr>{a - b, b - a};
    return fail(why, "'!=' is a disjunction");
  }

  // Any other expression is tested against zero.
  auto e = frontend::to_affine(cond);
  if (!e.expr) return fail(why, e.why);
  if (e.expr->is_constant()) {
    bool truth = (e.expr->constant() != 0) != negated;
    return std::vector<AffineExpr>{AffineExpr(truth ? 0 : -1)};
  }
  if (!negated) return fail(why, "truth test of '" + e.expr->to_string() + "' is a disjunction");
  return std::vector<AffineExpr>{*e.expr, -*e.expr};
}

BranchSplit handle_branch(const Expr& cond, const std::vector<Annotation>& annotations, const Region& ctx) {
  BranchSplit out;
  if (const auto* pct = find(annotations, AnnotationKind::Percentage)) {
    out.strategy = BranchStrategy::Percentage;
    out.then_region = with_transform(ctx, {Transform::Kind::PctTaken, {}, pct->fraction()});
    out.else_region = with_transform(ctx, {Transform::Kind::PctNotTaken, {}, pct->fraction()});
    return out;
  }
  if (const auto* iters = find(annotations, AnnotationKind::IterationCount)) {
    CountExpr k = CountExpr::constant(iters->count());
    out.strategy = BranchStrategy::IterationCap;
    out.then_region = with_transform(ctx, {Transform::Kind::CapTaken, k, {}});
    out.else_region = with_transform(ctx, {Transform::Kind::CapNotTaken, k, {}});
    return out;
  }

  std::string why;
  auto then_conj = affine_conjunction(cond, false, &why);
  if (then_conj && !over_modeled_vars(*then_conj, ctx, &why)) then_conj.reset();
  auto else_conj = affine_conjunction(cond, true, &why);
  if (else_conj && !over_modeled_vars(*else_conj, ctx, &why)) else_conj.reset();

  if (then_conj) {
    out.then_region = intersect(ctx, *then_conj);
    if (else_conj && else_conj->size() == 1) {
      out.strategy = BranchStrategy::Intersection;
      out.else_region = intersect(ctx, *else_conj);
    } else {
      // Several constraints: the else arm is a union, so count it as the rest.
      out.strategy = BranchStrategy::Complement;
      out.else_region = exclude(ctx, *then_conj);
    }
    return out;
  }
  if (else_conj) {
    out.strategy = BranchStrategy::Complement;
    out.else_region = intersect(ctx, *else_conj);
    out.then_region = exclude(ctx, *else_conj);
    return out;
  }

  out.reason = why.empty() ? "condition is not affine" : why;
  out.then_region = ctx;
  out.else_region = ctx;
  out.strategy = ctx.in_loop() ? BranchStrategy::Gap : BranchStrategy::Unsplit;
  return out;
}

}  // namespace statmodel::metrics
