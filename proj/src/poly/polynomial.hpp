#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "statmodel/poly/affine.hpp"
#include "statmodel/poly/count_expr.hpp"

namespace statmodel::poly::detail {

// Multivariate polynomial with exact rational coefficients. Only used while
// building closed-form counts; never exposed in the public interface.
class Polynomial {
 public:
  using Monomial = std::map<std::string, unsigned, std::less<>>;

  Polynomial() = default;
  static Polynomial constant(const Rational& c);
  static Polynomial variable(const std::string& name);
  static Polynomial from_affine(const AffineExpr& e);

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  Rational constant_value() const;
  bool depends_on(std::string_view var) const;
  unsigned degree_in(std::string_view var) const;

  // coefficients_in(v)[k] is the coefficient of v^k.
  std::vector<Polynomial> coefficients_in(std::string_view var) const;
  Polynomial substitute(std::string_view var, const Polynomial& value) const;

  // Renders an integer-valued polynomial as floordiv(D*P, D) where D clears
  // all denominators. Variables listed in `replacements` are rendered as the
  // given expressions instead of parameters.
  CountExpr to_count_expr(const std::map<std::string, CountExpr, std::less<>>& replacements = {}) const;

  Polynomial& operator+=(const Polynomial& rhs);
  Polynomial& operator-=(const Polynomial& rhs);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Rational& k);
  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void add(const Monomial& m, const Rational& c);

  std::map<Monomial, Rational> terms_;
};

// Polynomial in `var` equal to sum_{t=0}^{var} t^k for every integer var >= -1.
Polynomial power_sum(unsigned k, const std::string& var);

inline constexpr unsigned kMaxClosedFormDegree = 6;

}  // namespace statmodel::poly::detail
