#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "statmodel/frontend/loop_scop.hpp"
#include "statmodel/poly/affine.hpp"
#include "statmodel/poly/count_expr.hpp"

namespace statmodel::poly {

// One side of a level's range: lower bounds read  v >= ceil(expr / divisor),
// upper bounds read  v <= floor(expr / divisor).  divisor >= 1.
struct Bound {
  AffineExpr expr;
  std::int64_t divisor = 1;

  friend bool operator==(const Bound&, const Bound&) = default;
};

// A loop level iterates  v = anchor, anchor + step, ...  restricted to
// [max(lowers), min(uppers)].  Decreasing source loops are stored negated: the
// level variable then holds -i, and every reference to i elsewhere in the
// domain has been rewritten to -i.
struct Level {
  std::string index;
  AffineExpr anchor;
  std::vector<Bound> lowers;
  std::vector<Bound> uppers;
  std::int64_t step = 1;
  bool negated = false;
};

// Iteration domain of a loop nest, outermost level first. Level k bounds only
// reference indices of levels < k and parameters. `guards` are constraints
// (expr >= 0) over parameters alone, e.g. from a branch on N.
struct LoopNestDomain {
  std::vector<Level> levels;
  std::set<std::string> params;
  std::vector<AffineExpr> guards;

  const Level* find_level(std::string_view index) const;
  bool has_index(std::string_view index) const { return find_level(index) != nullptr; }
  std::set<std::string> indices() const;

  // Rewrites references to negated indices; use on any expression written in
  // source-level terms before combining it with this domain.
  AffineExpr normalize(const AffineExpr& source_expr) const;
};

// Flat constraint form of a domain: every constraint reads expr >= 0, and each
// stride says (var - anchor) is a multiple of step.
struct ConstraintSystem {
  struct Stride {
    std::string var;
    AffineExpr anchor;
    std::int64_t step;
  };
  std::vector<std::string> dims;
  std::set<std::string> params;
  std::vector<AffineExpr> constraints;
  std::vector<Stride> strides;
};

ConstraintSystem to_constraint_system(const LoopNestDomain& domain);

// Appends one loop level. Throws Error(NonAffineBound) when the bounds use an
// index that is neither a level of `domain` nor a declared parameter, or when
// the step is zero.
void append_level(LoopNestDomain& domain, const frontend::LoopSCoP& scop);

LoopNestDomain domain_from_scops(std::span<const frontend::LoopSCoP> scops);

inline constexpr std::int64_t kDefaultEnumerationCap = 100'000'000;

// Exact lattice-point count by walking every point. Throws
// Error(EnumerationTooLarge) when more than `cap` loop iterations would be
// visited, Error(UnboundParameter) when a parameter lacks a value.
Int count_enumerate(const LoopNestDomain& domain, const ParamBinding& binding,
                    std::int64_t cap = kDefaultEnumerationCap);

// Parametric count. Uses power-sum closed forms where the level structure
// allows and lazy summation elsewhere; exact in either case.
CountExpr count_symbolic(const LoopNestDomain& domain);

// Restricts the domain to points satisfying cond >= 0. `cond` is in
// source-level terms (negation is applied here). Variables that are not
// indices of the domain become parameters.
LoopNestDomain intersect_branch(const LoopNestDomain& domain, const AffineExpr& cond);

// Integer negation of  e >= 0,  i.e.  -e - 1 >= 0.
AffineExpr negate_condition(const AffineExpr& cond);

// max(total - false_branch, 0).
CountExpr complement_count(const CountExpr& total, const CountExpr& false_branch);

Int eval_count(const CountExpr& expr, const ParamBinding& binding);

}  // namespace statmodel::poly
