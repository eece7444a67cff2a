#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>

#include "statmodel/poly/affine.hpp"

namespace statmodel::frontend {

enum class Comparison { Less, LessEqual, Greater, GreaterEqual };

// Static control part of a for-loop with bounds normalized to inclusive form.
//
// `lower` is the initial value and `upper` the last value the index may take in
// the direction of travel: `i < U` gives upper U-1, `i > U` (with a negative
// step) gives U+1. For decreasing loops lower >= upper is the non-empty case.
struct LoopSCoP {
  std::string index;
  poly::AffineExpr lower;
  poly::AffineExpr upper;
  std::int64_t step = 1;
  Comparison comparison = Comparison::Less;
  // Free variables of the bounds that are not enclosing loop indices.
  std::set<std::string> params;

  bool increasing() const { return step > 0; }
};

enum class ScopPart { Init, Condition, Step };

// Why a loop could not be described affinely, plus whatever parts were
// recovered so annotations (lp_init / lp_cond) can complete it later.
struct ScopFailure {
  ScopPart part = ScopPart::Init;
  std::string reason;

  std::string index;
  std::optional<poly::AffineExpr> lower;
  std::optional<poly::AffineExpr> upper;
  std::optional<std::int64_t> step;
  std::optional<Comparison> comparison;
  std::set<std::string> params;
};

// Inclusive upper bound for `index <cmp> bound`.
poly::AffineExpr normalize_upper(Comparison cmp, const poly::AffineExpr& bound);

}  // namespace statmodel::frontend
