#include "statmodel/metrics/metrics.hpp"

namespace statmodel::metrics {

void MetricVector::add(const CategoryId& category, const CountExpr& n) {
  if (n.is_constant() && n.value() == 0) return;
  auto it = counts.find(category);
  if (it == counts.end()) {
    counts.emplace(category, n);
  } else {
    it->second = it->second + n;
  }
}

void MetricVector::add(const MetricVector& other, const CountExpr& times) {
  for (const auto& [c, n] : other.counts) add(c, times * n);
}

MetricVector compose_call(const MetricVector& caller, const MetricVector& callee, const CountExpr& iterations) {
  MetricVector out = caller;
  out.add(callee, iterations);
  return out;
}

std::string_view finding_kind_name(Finding::Kind kind) {
  switch (kind) {
    case Finding::Kind::ModelGap: return "ModelGap";
    case Finding::Kind::OverApprox: return "OVERAPPROX";
    case Finding::Kind::SharedLine: return "SharedLine";
    case Finding::Kind::ExternalCall: return "ExternalCall";
    case Finding::Kind::Unattributed: return "Unattributed";
  }
  return "?";
}

std::optional<Finding::Kind> finding_kind_from_name(std::string_view name) {
  for (auto k : {Finding::Kind::ModelGap, Finding::Kind::OverApprox, Finding::Kind::SharedLine,
                 Finding::Kind::ExternalCall, Finding::Kind::Unattributed}) {
    if (finding_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

}  // namespace statmodel::metrics
