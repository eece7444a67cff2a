#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "statmodel/poly/affine.hpp"

namespace statmodel::poly {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Symbolic iteration count over model parameters.
//
// Nodes are immutable and shared, so copies are cheap and a CountExpr may be
// evaluated concurrently from several threads. Intermediate nodes may take
// negative values (e.g. the argument of a Max0); the counts the analysis
// produces are non-negative under every binding.
//
// Canonical text form (used in model files):
//   (int 5) (param N) (add x y ...) (mul x y ...) (pow x 3)
//   (floordiv x 2) (max0 x) (lazysum i LO HI STEP BODY)
// Inside a lazysum body the summation variable is written as (param i) and is
// bound, not free.
class CountExpr {
 public:
  enum class Kind { Int, Param, Add, Mul, Pow, FloorDiv, Max0, LazySum };

  CountExpr();  // the constant 0

  static CountExpr constant(Int value);
  static CountExpr param(std::string name);
  static CountExpr sum(std::vector<CountExpr> terms);
  static CountExpr product(std::vector<CountExpr> factors);
  static CountExpr power(CountExpr base, unsigned exponent);
  static CountExpr floor_div(CountExpr numerator, Int divisor);
  static CountExpr max0(CountExpr arg);
  static CountExpr lazy_sum(std::string var, CountExpr lower, CountExpr upper,
                            std::int64_t step, CountExpr body);
  static CountExpr from_affine(const AffineExpr& e);

  Kind kind() const;
  bool is_constant() const { return kind() == Kind::Int; }
  const Int& value() const;        // Int
  const std::string& name() const; // Param, LazySum
  std::span<const CountExpr> operands() const;
  unsigned exponent() const;       // Pow
  const Int& divisor() const;      // FloorDiv
  std::int64_t step() const;       // LazySum

  std::set<std::string> free_params() const;
  bool depends_on(std::string_view var) const;

  // Throws Error(UnboundParameter) naming the first missing parameter.
  Int evaluate(const ParamBinding& binding) const;

  std::string to_sexpr() const;
  // Throws Error(MalformedModel) on bad syntax.
  static CountExpr parse_sexpr(std::string_view text);

  friend CountExpr operator+(const CountExpr& a, const CountExpr& b) { return sum({a, b}); }
  friend CountExpr operator-(const CountExpr& a, const CountExpr& b) {
    return sum({a, product({constant(-1), b})});
  }
  friend CountExpr operator*(const CountExpr& a, const CountExpr& b) { return product({a, b}); }
  friend bool operator==(const CountExpr& a, const CountExpr& b);

 private:
  struct Node;
  explicit CountExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

// Convert a non-negative count to int64 if it fits.
bool fits_int64(const Int& v);

}  // namespace statmodel::poly
