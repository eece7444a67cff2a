#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "statmodel/poly/count_expr.hpp"

namespace statmodel::frontend {

enum class AnnotationKind { IterationCount, Percentage, LpInit, LpCond, Skip };

// `iters`, `pct`, `lp_init`, `lp_cond`, `skip`.
std::string_view annotation_key(AnnotationKind kind);

struct Annotation {
  AnnotationKind kind = AnnotationKind::Skip;
  // IterationCount: int64 >= 0; Percentage: rational in [0,1];
  // LpInit/LpCond: identifier; Skip: true.
  std::variant<std::int64_t, poly::Rational, std::string, bool> value;
  int line = 0;
  int attach_site = 0;  // statement id, set by the parser

  std::int64_t count() const { return std::get<std::int64_t>(value); }
  const poly::Rational& fraction() const { return std::get<poly::Rational>(value); }
  const std::string& identifier() const { return std::get<std::string>(value); }

  friend bool operator==(const Annotation& a, const Annotation& b) {
    return a.kind == b.kind && a.value == b.value;
  }
};

// Parses "#pragma @Annotation {k:v,...}". Backslash-newline continuations are
// accepted. Throws MalformedAnnotation or UnknownAnnotationKey.
std::vector<Annotation> parse_annotation(std::string_view pragma_text, int line = 0);

// Folds a list so that each kind appears once, later entries winning.
std::vector<Annotation> merge_annotations(const std::vector<Annotation>& in);

std::string format_annotation(const Annotation& a);

}  // namespace statmodel::frontend
