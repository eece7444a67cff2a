#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace statmodel::poly {

// Concrete values for model parameters (and, during enumeration, loop
// indices). Keys are plain identifiers.
using ParamBinding = std::map<std::string, std::int64_t, std::less<>>;

// Integer affine form  c0 + sum(coeff_k * var_k).  Zero coefficients are never
// stored, so two equal forms compare equal structurally.
class AffineExpr {
 public:
  using Terms = std::map<std::string, std::int64_t, std::less<>>;

  AffineExpr() = default;
  explicit AffineExpr(std::int64_t constant) : constant_(constant) {}

  static AffineExpr variable(std::string name, std::int64_t coeff = 1);

  std::int64_t constant() const { return constant_; }
  const Terms& terms() const { return terms_; }
  std::int64_t coeff(std::string_view var) const;

  bool is_constant() const { return terms_.empty(); }
  bool depends_on(std::string_view var) const { return coeff(var) != 0; }
  std::set<std::string> variables() const;

  // Replaces every occurrence of `var` by `value`.
  AffineExpr substitute(std::string_view var, const AffineExpr& value) const;

  // Throws Error(UnboundParameter) when a variable has no binding.
  std::int64_t evaluate(const ParamBinding& binding) const;

  AffineExpr operator-() const;
  AffineExpr& operator+=(const AffineExpr& rhs);
  AffineExpr& operator-=(const AffineExpr& rhs);
  AffineExpr& operator*=(std::int64_t k);

  friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
  friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
  friend AffineExpr operator*(AffineExpr a, std::int64_t k) { return a *= k; }
  friend AffineExpr operator*(std::int64_t k, AffineExpr a) { return a *= k; }
  friend bool operator==(const AffineExpr&, const AffineExpr&) = default;

  // Human-readable form such as "2*i - N + 3".
  std::string to_string() const;

 private:
  void add_term(const std::string& var, std::int64_t coeff);

  Terms terms_;
  std::int64_t constant_ = 0;
};

// floor(a / b) and ceil(a / b) for b > 0 with mathematical (not truncating)
// semantics on negative numerators.
std::int64_t floor_div(std::int64_t a, std::int64_t b);
std::int64_t ceil_div(std::int64_t a, std::int64_t b);

}  // namespace statmodel::poly
