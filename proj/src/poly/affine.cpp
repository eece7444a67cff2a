#include "statmodel/poly/affine.hpp"

#include <cstdlib>

#include "statmodel/error.hpp"

namespace statmodel::poly {

AffineExpr AffineExpr::variable(std::string name, std::int64_t coeff) {
  AffineExpr e;
  e.add_term(name, coeff);
  return e;
}

std::int64_t AffineExpr::coeff(std::string_view var) const {
  auto it = terms_.find(var);
  return it == terms_.end() ? 0 : it->second;
}

std::set<std::string> AffineExpr::variables() const {
  std::set<std::string> out;
  for (const auto& [name, c] : terms_) out.insert(name);
  return out;
}

void AffineExpr::add_term(const std::string& var, std::int64_t coeff) {
  if (coeff == 0) return;
  auto [it, inserted] = terms_.try_emplace(var, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0) terms_.erase(it);
  }
}

AffineExpr AffineExpr::substitute(std::string_view var, const AffineExpr& value) const {
  std::int64_t c = coeff(var);
  if (c == 0) return *this;
  AffineExpr out = *this;
  out.terms_.erase(out.terms_.find(var));
  out += value * c;
  return out;
}

std::int64_t AffineExpr::evaluate(const ParamBinding& binding) const {
  std::int64_t v = constant_;
  for (const auto& [name, c] : terms_) {
    auto it = binding.find(name);
    if (it == binding.end()) {
      throw Error(ErrorCode::UnboundParameter, "no value bound for '" + name + "'");
    }
    v += c * it->second;
  }
  return v;
}

AffineExpr AffineExpr::operator-() const { return *this * -1; }

AffineExpr& AffineExpr::operator+=(const AffineExpr& rhs) {
  constant_ += rhs.constant_;
  for (const auto& [name, c] : rhs.terms_) add_term(name, c);
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& rhs) {
  constant_ -= rhs.constant_;
  for (const auto& [name, c] : rhs.terms_) add_term(name, -c);
  return *this;
}

AffineExpr& AffineExpr::operator*=(std::int64_t k) {
  if (k == 0) {
    terms_.clear();
    constant_ = 0;
    return *this;
  }
  constant_ *= k;
  for (auto& [name, c] : terms_) c *= k;
  return *this;
}

std::string AffineExpr::to_string() const {
  std::string out;
  auto append = [&out](std::int64_t c, const std::string& name) {
    bool negative = c < 0;
    std::int64_t mag = negative ? -c : c;
    if (out.empty()) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    if (name.empty()) {
      out += std::to_string(mag);
    } else {
      if (mag != 1) out += std::to_string(mag) + "*";
      out += name;
    }
  };
  for (const auto& [name, c] : terms_) append(c, name);
  if (constant_ != 0 || out.empty()) append(constant_, "");
  return out;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

}  // namespace statmodel::poly
