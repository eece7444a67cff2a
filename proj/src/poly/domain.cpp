#include "statmodel/poly/domain.hpp"

#include <algorithm>

#include "polynomial.hpp"
#include "statmodel/error.hpp"

namespace statmodel::poly {

using detail::Polynomial;

const Level* LoopNestDomain::find_level(std::string_view index) const {
  for (const auto& l : levels) {
    if (l.index == index) return &l;
  }
  return nullptr;
}

std::set<std::string> LoopNestDomain::indices() const {
  std::set<std::string> out;
  for (const auto& l : levels) out.insert(l.index);
  return out;
}

AffineExpr LoopNestDomain::normalize(const AffineExpr& source_expr) const {
  AffineExpr out = source_expr;
  for (const auto& l : levels) {
    if (l.negated && out.depends_on(l.index)) {
      out = out.substitute(l.index, AffineExpr::variable(l.index, -1));
    }
  }
  return out;
}

ConstraintSystem to_constraint_system(const LoopNestDomain& domain) {
  ConstraintSystem cs;
  cs.params = domain.params;
  for (const auto& l : domain.levels) {
    cs.dims.push_back(l.index);
    AffineExpr v = AffineExpr::variable(l.index);
    cs.constraints.push_back(v - l.anchor);
    for (const auto& b : l.lowers) cs.constraints.push_back(v * b.divisor - b.expr);
    for (const auto& b : l.uppers) cs.constraints.push_back(b.expr - v * b.divisor);
    if (l.step > 1) cs.strides.push_back({l.index, l.anchor, l.step});
  }
  for (const auto& g : domain.guards) cs.constraints.push_back(g);
  return cs;
}

void append_level(LoopNestDomain& domain, const frontend::LoopSCoP& scop) {
  auto fail = [&scop](const std::string& why) {
    throw Error(ErrorCode::NonAffineBound, "loop '" + scop.index + "': " + why);
  };
  if (scop.step == 0) fail("zero step");
  if (domain.has_index(scop.index)) fail("index reused by an enclosing loop");

  std::set<std::string> vars = scop.lower.variables();
  for (const auto& v : scop.upper.variables()) vars.insert(v);
  for (const auto& v : vars) {
    if (v == scop.index) fail("bound refers to its own index");
    if (domain.has_index(v)) continue;
    if (scop.params.count(v) == 0) fail("bound refers to index '" + v + "' outside the modeled nest");
  }
  for (const auto& v : vars) {
    if (!domain.has_index(v)) domain.params.insert(v);
  }

  AffineExpr lo = domain.normalize(scop.lower);
  AffineExpr up = domain.normalize(scop.upper);
  Level level;
  level.index = scop.index;
  if (scop.step > 0) {
    level.anchor = lo;
    level.lowers = {{lo, 1}};
    level.uppers = {{up, 1}};
    level.step = scop.step;
  } else {
    level.negated = true;
    level.anchor = -lo;
    level.lowers = {{-lo, 1}};
    level.uppers = {{-up, 1}};
    level.step = -scop.step;
  }
  domain.levels.push_back(std::move(level));
}

LoopNestDomain domain_from_scops(std::span<const frontend::LoopSCoP> scops) {
  LoopNestDomain d;
  for (const auto& s : scops) append_level(d, s);
  return d;
}

namespace {

class Enumerator {
 public:
  Enumerator(const LoopNestDomain& d, ParamBinding env, std::int64_t cap)
      : domain_(d), env_(std::move(env)), cap_(cap) {}

  Int run() {
    for (const auto& g : domain_.guards) {
      if (g.evaluate(env_) < 0) return 0;
    }
    walk(0);
    return count_;
  }

 private:
  void walk(std::size_t k) {
    if (k == domain_.levels.size()) {
      ++count_;
      return;
    }
    const Level& l = domain_.levels[k];
    std::int64_t anchor = l.anchor.evaluate(env_);
    std::int64_t lo = anchor;
    for (const auto& b : l.lowers) lo = std::max(lo, ceil_div(b.expr.evaluate(env_), b.divisor));
    bool bounded = false;
    std::int64_t hi = 0;
    for (const auto& b : l.uppers) {
      std::int64_t u = floor_div(b.expr.evaluate(env_), b.divisor);
      hi = bounded ? std::min(hi, u) : u;
      bounded = true;
    }
    if (!bounded) {
      throw Error(ErrorCode::NonAffineBound, "level '" + l.index + "' has no upper bound");
    }
    std::int64_t start = anchor + ceil_div(lo - anchor, l.step) * l.step;
    auto [slot, inserted] = env_.insert_or_assign(l.index, start);
    for (std::int64_t v = start; v <= hi; v += l.step) {
      if (++visited_ > cap_) {
        throw Error(ErrorCode::EnumerationTooLarge,
                    "enumeration exceeds " + std::to_string(cap_) + " iterations");
      }
      slot->second = v;
      walk(k + 1);
    }
    env_.erase(slot);
  }

  const LoopNestDomain& domain_;
  ParamBinding env_;
  std::int64_t cap_;
  std::int64_t visited_ = 0;
  Int count_ = 0;
};

struct SymbolicState {
  Polynomial poly = Polynomial::constant(1);
  CountExpr opaque = CountExpr::constant(1);
  std::vector<AffineExpr> guards;  // each reads expr >= 0
  bool empty = false;
};

const std::string kStepVar = "$t";
const std::string kExtentVar = "$T";

CountExpr ceil_expr(const Bound& b) {
  if (b.divisor == 1) return CountExpr::from_affine(b.expr);
  return CountExpr::constant(-1) * CountExpr::floor_div(CountExpr::from_affine(-b.expr), b.divisor);
}

CountExpr floor_expr(const Bound& b) {
  return CountExpr::floor_div(CountExpr::from_affine(b.expr), b.divisor);
}

CountExpr max_of(const std::vector<CountExpr>& xs) {
  CountExpr acc = xs.front();
  for (std::size_t i = 1; i < xs.size(); ++i) acc = acc + CountExpr::max0(xs[i] - acc);
  return acc;
}

CountExpr min_of(const std::vector<CountExpr>& xs) {
  CountExpr acc = xs.front();
  for (std::size_t i = 1; i < xs.size(); ++i) acc = acc - CountExpr::max0(acc - xs[i]);
  return acc;
}

// [g >= 0] as an integer 0/1 expression.
CountExpr indicator(const AffineExpr& g) {
  CountExpr e = CountExpr::from_affine(g);
  return CountExpr::max0(e + CountExpr::constant(1)) - CountExpr::max0(e);
}

void absorb_guard(Level& level, const AffineExpr& g) {
  std::int64_t a = g.coeff(level.index);
  AffineExpr rest = g - AffineExpr::variable(level.index, a);
  if (a > 0) {
    level.lowers.push_back({-rest, a});
  } else {
    level.uppers.push_back({rest, -a});
  }
}

// Drops bounds that are implied by another bound of the same side.
void prune_bounds(std::vector<Bound>& bounds, bool lower) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < bounds.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < bounds.size() && !changed; ++j) {
        const Bound& a = bounds[i];
        const Bound& b = bounds[j];
        std::optional<bool> a_tighter;
        if (a.divisor == b.divisor) {
          AffineExpr diff = a.expr - b.expr;
          if (diff.is_constant()) a_tighter = lower ? diff.constant() >= 0 : diff.constant() <= 0;
        } else if (a.expr.is_constant() && b.expr.is_constant()) {
          std::int64_t va = lower ? ceil_div(a.expr.constant(), a.divisor)
                                  : floor_div(a.expr.constant(), a.divisor);
          std::int64_t vb = lower ? ceil_div(b.expr.constant(), b.divisor)
                                  : floor_div(b.expr.constant(), b.divisor);
          a_tighter = lower ? va >= vb : va <= vb;
        }
        if (a_tighter) {
          bounds.erase(bounds.begin() + static_cast<std::ptrdiff_t>(*a_tighter ? j : i));
          changed = true;
        }
      }
    }
  }
}

void apply_level(SymbolicState& s, Level level) {
  const std::string v = level.index;
  if (std::find(level.lowers.begin(), level.lowers.end(), Bound{level.anchor, 1}) ==
      level.lowers.end()) {
    level.lowers.push_back({level.anchor, 1});
  }
  std::vector<AffineExpr> kept;
  for (const auto& g : s.guards) {
    if (g.depends_on(v)) {
      absorb_guard(level, g);
    } else {
      kept.push_back(g);
    }
  }
  s.guards = std::move(kept);
  prune_bounds(level.lowers, true);
  prune_bounds(level.uppers, false);

  const bool opaque_dep = s.opaque.depends_on(v);
  const bool poly_dep = s.poly.depends_on(v);
  const bool simple = level.lowers.size() == 1 && level.uppers.size() == 1 &&
                      level.lowers[0].divisor == 1 && level.uppers[0].divisor == 1 &&
                      (level.step == 1 || level.lowers[0].expr == level.anchor);

  if (simple && !opaque_dep && s.poly.degree_in(v) <= detail::kMaxClosedFormDegree) {
    // Change of variable v = L + step*t, t = 0..T, then power sums in t.
    const AffineExpr& lower = level.lowers[0].expr;
    const AffineExpr extent = level.uppers[0].expr - lower;
    Polynomial body = s.poly.substitute(
        v, Polynomial::from_affine(lower) + Polynomial::variable(kStepVar) * Rational(level.step));
    auto coeffs = body.coefficients_in(kStepVar);
    Polynomial summed;
    for (unsigned k = 0; k < coeffs.size(); ++k) summed += coeffs[k] * detail::power_sum(k, kExtentVar);

    if (extent.is_constant()) {
      if (extent.constant() < 0) {
        s.empty = true;
        return;
      }
      s.poly = summed.substitute(
          kExtentVar, Polynomial::constant(floor_div(extent.constant(), level.step)));
      return;
    }
    if (level.step == 1) {
      s.poly = summed.substitute(kExtentVar, Polynomial::from_affine(extent));
    } else {
      CountExpr last = CountExpr::floor_div(CountExpr::from_affine(extent), level.step);
      s.opaque = s.opaque * summed.to_count_expr({{kExtentVar, last}});
      s.poly = Polynomial::constant(1);
    }
    s.guards.push_back(extent);
    return;
  }

  std::vector<CountExpr> lows, highs;
  for (const auto& b : level.lowers) lows.push_back(ceil_expr(b));
  for (const auto& b : level.uppers) highs.push_back(floor_expr(b));
  if (highs.empty()) {
    throw Error(ErrorCode::NonAffineBound, "level '" + v + "' has no upper bound");
  }
  CountExpr lo = max_of(lows);
  CountExpr hi = min_of(highs);
  CountExpr start = lo;
  if (level.step != 1) {
    CountExpr anchor = CountExpr::from_affine(level.anchor);
    start = anchor + CountExpr::constant(-level.step) * CountExpr::floor_div(anchor - lo, level.step);
  }

  if (!opaque_dep && !poly_dep) {
    s.opaque = s.opaque *
               CountExpr::max0(CountExpr::floor_div(hi - start, level.step) + CountExpr::constant(1));
    return;
  }
  CountExpr body = s.poly.to_count_expr();
  if (opaque_dep) body = body * s.opaque;
  CountExpr lazy = CountExpr::lazy_sum(v, start, hi, level.step, body);
  s.poly = Polynomial::constant(1);
  s.opaque = opaque_dep ? lazy : s.opaque * lazy;
}

}  // namespace

Int count_enumerate(const LoopNestDomain& domain, const ParamBinding& binding, std::int64_t cap) {
  return Enumerator(domain, binding, cap).run();
}

CountExpr count_symbolic(const LoopNestDomain& domain) {
  SymbolicState s;
  s.guards = domain.guards;
  for (auto it = domain.levels.rbegin(); it != domain.levels.rend(); ++it) {
    apply_level(s, *it);
    if (s.empty) return CountExpr::constant(0);
  }

  std::vector<AffineExpr> guards;
  for (const auto& g : s.guards) {
    if (g.is_constant()) {
      if (g.constant() < 0) return CountExpr::constant(0);
      continue;
    }
    if (std::find(guards.begin(), guards.end(), g) == guards.end()) guards.push_back(g);
  }

  std::vector<CountExpr> factors;
  Polynomial poly = s.poly;
  bool folded = false;
  for (const auto& g : guards) {
    if (!folded) {
      // c*(g+1)*[g >= 0] is c*max0(g+1).
      const auto& [var, a] = *g.terms().begin();
      auto coeffs = poly.coefficients_in(var);
      if (coeffs.size() == 2 && coeffs[1].is_constant()) {
        Rational c = coeffs[1].constant_value() / a;
        Polynomial shifted = Polynomial::from_affine(g) + Polynomial::constant(1);
        if (boost::multiprecision::denominator(c) == 1 && poly == shifted * c) {
          factors.push_back(CountExpr::constant(boost::multiprecision::numerator(c)) *
                            CountExpr::max0(CountExpr::from_affine(g) + CountExpr::constant(1)));
          poly = Polynomial::constant(1);
          folded = true;
          continue;
        }
      }
    }
    factors.push_back(indicator(g));
  }
  factors.insert(factors.begin(), {poly.to_count_expr(), s.opaque});
  return CountExpr::product(std::move(factors));
}

LoopNestDomain intersect_branch(const LoopNestDomain& domain, const AffineExpr& cond) {
  LoopNestDomain out = domain;
  AffineExpr c = domain.normalize(cond);
  for (const auto& v : c.variables()) {
    if (!domain.has_index(v)) out.params.insert(v);
  }
  for (auto it = out.levels.rbegin(); it != out.levels.rend(); ++it) {
    if (c.depends_on(it->index)) {
      absorb_guard(*it, c);
      return out;
    }
  }
  if (!c.is_constant() || c.constant() < 0) out.guards.push_back(c);
  return out;
}

AffineExpr negate_condition(const AffineExpr& cond) { return -cond - AffineExpr(1); }

CountExpr complement_count(const CountExpr& total, const CountExpr& false_branch) {
  return CountExpr::max0(total - false_branch);
}

Int eval_count(const CountExpr& expr, const ParamBinding& binding) {
  return expr.evaluate(binding);
}

}  // namespace statmodel::poly
