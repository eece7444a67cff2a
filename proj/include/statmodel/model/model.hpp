#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "statmodel/binary/archdesc.hpp"
#include "statmodel/metrics/metrics.hpp"

namespace statmodel::model {

using metrics::Finding;
using metrics::FunctionMetrics;
using metrics::ModelParam;
using poly::CountExpr;
using poly::Int;
using poly::Rational;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct ModelMeta {
  std::string tool_version = kToolVersion;
  std::vector<std::string> sources;
  std::string created;  // ISO-8601 UTC
};

struct Model {
  std::map<std::string, FunctionMetrics> functions;
  std::optional<std::string> entry;
  std::vector<ModelParam> params;
  std::string arch_ref;
  ModelMeta meta;
};

// Validates the call graph and collects the model parameters. Throws
// DuplicateFunction, UnresolvedCallee, or ModelGap on a call cycle.
Model build_model(std::vector<FunctionMetrics> functions, const binary::ArchDescription& arch,
                  ModelMeta meta = {});

using Binding = poly::ParamBinding;

struct EvaluationResult {
  std::map<std::string, Int> per_category;
  // Exclusive contribution of each function to per_category.
  std::map<std::string, std::map<std::string, Int>> per_function;
  std::vector<std::string> flags;
};

// Free parameters reachable from `root`, in the root's parameter order.
std::vector<ModelParam> root_params(const Model& model, const std::string& root);

EvaluationResult evaluate(const Model& model, const std::string& root, const Binding& binding);

std::string serialize(const Model& model);
Model deserialize(std::string_view text);

std::string emit_python(const Model& model);

struct DistributionRow {
  std::string category;
  std::string display_name;
  Int count;
  Int hundredths;  // percentage * 100
};

struct Distribution {
  std::vector<DistributionRow> rows;
  Int total;
};

// Percentages use largest-remainder rounding so rows sum to exactly 100.00
// whenever total > 0.
Distribution distribution(const EvaluationResult& result, const binary::ArchDescription& arch);

struct Intensity {
  Int fp;
  Int mem;
  Rational value;
  std::string rendered;  // 2 decimals, round half to even
};

// Throws ZeroDenominator when no memory-category instructions were counted.
Intensity arithmetic_intensity(const EvaluationResult& result, const binary::ArchDescription& arch);

std::string render_decimal(const Rational& value, int places);
std::string format_hundredths(const Int& hundredths);

}  // namespace statmodel::model
