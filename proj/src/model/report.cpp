#include <algorithm>

#include "statmodel/error.hpp"
#include "statmodel/model/model.hpp"

namespace statmodel::model {

std::string render_decimal(const Rational& value, int places) {
  Int scale = 1;
  for (int i = 0; i < places; ++i) scale *= 10;
  Rational scaled = value < 0 ? Rational(-value * scale) : Rational(value * scale);
  Int q = boost::multiprecision::numerator(scaled) / boost::multiprecision::denominator(scaled);
  Rational frac = scaled - Rational(q);
  if (frac * 2 > 1 || (frac * 2 == 1 && q % 2 == 1)) ++q;

  std::string digits = q.str();
  if (places > 0) {
    if (digits.size() <= static_cast<std::size_t>(places)) digits.insert(0, places + 1 - digits.size(), '0');
    digits.insert(digits.size() - places, ".");
  }
  return (value < 0 && q != 0 ? "-" : "") + digits;
}

std::string format_hundredths(const Int& hundredths) { return render_decimal(Rational(hundredths, 100), 2); }

Distribution distribution(const EvaluationResult& result, const binary::ArchDescription& arch) {
  Distribution d;
  std::vector<std::string> order;
  for (const auto& [id, _] : arch.categories) {
    if (result.per_category.count(id)) order.push_back(id);
  }
  for (const auto& [id, _] : result.per_category) {
    if (!arch.has_category(id)) order.push_back(id);
  }
  for (const auto& id : order) {
    const Int& n = result.per_category.at(id);
    d.rows.push_back({id, arch.has_category(id) ? arch.display_name(id) : id, n, 0});
    d.total += n;
  }
  if (d.total == 0) return d;

  // Largest remainder: floor every share, then hand out the missing
  // hundredths to the largest remainders, earlier rows first on ties.
  const Int whole = 10000;
  std::vector<std::pair<Int, std::size_t>> rem;
  Int assigned = 0;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    Int num = d.rows[i].count * whole;
    d.rows[i].hundredths = num / d.total;
    assigned += d.rows[i].hundredths;
    rem.emplace_back(num % d.total, i);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < whole; ++k, ++assigned) ++d.rows[rem[k].second].hundredths;
  return d;
}

Intensity arithmetic_intensity(const EvaluationResult& result, const binary::ArchDescription& arch) {
  Intensity ai;
  for (const auto& [cat, n] : result.per_category) {
    if (arch.fp_categories.count(cat)) ai.fp += n;
    if (arch.mem_categories.count(cat)) ai.mem += n;
  }
  if (ai.mem == 0) {
    throw Error(ErrorCode::ZeroDenominator, "no memory-movement instructions counted; arithmetic intensity is undefined");
  }
  ai.value = Rational(ai.fp, ai.mem);
  ai.rendered = render_decimal(ai.value, 2);
  return ai;
}

}  // namespace statmodel::model
