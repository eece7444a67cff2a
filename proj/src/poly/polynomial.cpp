#include "polynomial.hpp"

#include <boost/integer/common_factor_rt.hpp>

namespace statmodel::poly::detail {

namespace {

using boost::multiprecision::denominator;
using boost::multiprecision::numerator;

Int lcm_int(const Int& a, const Int& b) { return a / boost::multiprecision::gcd(a, b) * b; }

}  // namespace

Polynomial Polynomial::constant(const Rational& c) {
  Polynomial p;
  p.add({}, c);
  return p;
}

Polynomial Polynomial::variable(const std::string& name) {
  Polynomial p;
  p.add(Monomial{{name, 1}}, 1);
  return p;
}

Polynomial Polynomial::from_affine(const AffineExpr& e) {
  Polynomial p = constant(e.constant());
  for (const auto& [name, c] : e.terms()) p.add(Monomial{{name, 1}}, c);
  return p;
}

void Polynomial::add(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

bool Polynomial::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

Rational Polynomial::constant_value() const {
  auto it = terms_.find(Monomial{});
  return it == terms_.end() ? Rational(0) : it->second;
}

bool Polynomial::depends_on(std::string_view var) const { return degree_in(var) > 0; }

unsigned Polynomial::degree_in(std::string_view var) const {
  unsigned d = 0;
  for (const auto& [m, c] : terms_) {
    auto it = m.find(var);
    if (it != m.end()) d = std::max(d, it->second);
  }
  return d;
}

std::vector<Polynomial> Polynomial::coefficients_in(std::string_view var) const {
  std::vector<Polynomial> out(degree_in(var) + 1);
  for (const auto& [m, c] : terms_) {
    Monomial rest = m;
    unsigned k = 0;
    if (auto it = rest.find(var); it != rest.end()) {
      k = it->second;
      rest.erase(it);
    }
    out[k].add(rest, c);
  }
  return out;
}

Polynomial Polynomial::substitute(std::string_view var, const Polynomial& value) const {
  Polynomial out;
  std::vector<Polynomial> powers{constant(1)};
  for (const auto& [m, c] : terms_) {
    Monomial rest = m;
    unsigned k = 0;
    if (auto it = rest.find(var); it != rest.end()) {
      k = it->second;
      rest.erase(it);
    }
    while (powers.size() <= k) powers.push_back(powers.back() * value);
    Polynomial term;
    term.add(rest, c);
    out += term * powers[k];
  }
  return out;
}

CountExpr Polynomial::to_count_expr(
    const std::map<std::string, CountExpr, std::less<>>& replacements) const {
  Int d = 1;
  for (const auto& [m, c] : terms_) d = lcm_int(d, denominator(c));

  std::vector<CountExpr> terms;
  for (const auto& [m, c] : terms_) {
    Int scaled = numerator(c) * (d / denominator(c));
    std::vector<CountExpr> factors{CountExpr::constant(scaled)};
    for (const auto& [var, e] : m) {
      auto it = replacements.find(var);
      CountExpr base = it == replacements.end() ? CountExpr::param(var) : it->second;
      factors.push_back(CountExpr::power(base, e));
    }
    terms.push_back(CountExpr::product(std::move(factors)));
  }
  return CountExpr::floor_div(CountExpr::sum(std::move(terms)), d);
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
  for (const auto& [m, c] : rhs.terms_) add(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& rhs) {
  for (const auto& [m, c] : rhs.terms_) add(m, -c);
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial out;
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) {
      Polynomial::Monomial m = ma;
      for (const auto& [var, e] : mb) m[var] += e;
      out.add(m, ca * cb);
    }
  }
  return out;
}

Polynomial operator*(const Polynomial& a, const Rational& k) {
  return a * Polynomial::constant(k);
}

Polynomial power_sum(unsigned k, const std::string& var) {
  // Newton forward-difference interpolation through F(0..k+1).
  std::vector<Rational> values;
  Int acc = 0;
  for (unsigned t = 0; t <= k + 1; ++t) {
    acc += boost::multiprecision::pow(Int(t), k);
    values.emplace_back(acc);
  }

  Polynomial result;
  Polynomial binomial = Polynomial::constant(1);  // C(var, j)
  Polynomial x = Polynomial::variable(var);
  for (unsigned j = 0; j <= k + 1; ++j) {
    result += binomial * values[0];
    for (std::size_t i = 0; i + 1 < values.size(); ++i) values[i] = values[i + 1] - values[i];
    values.pop_back();
    binomial = binomial * (x - Polynomial::constant(j)) * Rational(1, j + 1);
  }
  return result;
}

}  // namespace statmodel::poly::detail
