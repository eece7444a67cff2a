#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "statmodel/binary/archdesc.hpp"
#include "statmodel/binary/line_map.hpp"
#include "statmodel/frontend/ast.hpp"
#include "statmodel/poly/domain.hpp"

namespace statmodel::metrics {

using binary::CategoryId;
using poly::AffineExpr;
using poly::CountExpr;

// Category -> count. Absent categories are zero.
struct MetricVector {
  std::map<CategoryId, CountExpr> counts;

  void add(const CategoryId& category, const CountExpr& n);
  void add(const MetricVector& other, const CountExpr& times);
  bool empty() const { return counts.empty(); }
};

struct ModelParam {
  std::string name;
  int source_line = 0;

  friend bool operator==(const ModelParam&, const ModelParam&) = default;
};

struct CallSite {
  std::string callee;  // mangled name
  int line = 0;
  CountExpr iterations;
  bool external = false;
  // Callee parameter -> value in the caller's parameter space.
  std::map<std::string, CountExpr> args;
};

struct Finding {
  enum class Kind { ModelGap, OverApprox, SharedLine, ExternalCall, Unattributed };
  Kind kind = Kind::ModelGap;
  std::string file;
  int line = 0;
  std::string message;
};

struct FunctionMetrics {
  std::string mangled_name;
  std::string file;
  int line = 0;
  std::vector<ModelParam> params;
  MetricVector body;
  std::vector<CallSite> call_sites;
  std::vector<Finding> notes;  // findings inside this function
};

std::string_view finding_kind_name(Finding::Kind kind);
std::optional<Finding::Kind> finding_kind_from_name(std::string_view name);

// Post-processing applied to a region's lattice count, outermost first.
struct Transform {
  enum class Kind {
    Times,        // x * value
    PctTaken,     // floor(fraction * x)
    PctNotTaken,  // x - floor(fraction * x)
    CapTaken,     // min(value, x)
    CapNotTaken,  // x - min(value, x)
  };
  Kind kind = Kind::Times;
  CountExpr value;
  poly::Rational fraction;
};

// The set of executions of a statement: the affine loop/branch domain around
// it, minus regions removed by complemented conditions, then transformed by
// annotation-driven scaling.
struct Region {
  poly::LoopNestDomain domain;
  std::vector<std::vector<AffineExpr>> exclusions;  // conjunctions, source terms
  std::vector<Transform> transforms;
  std::vector<std::string> loop_indices;  // every enclosing loop index, modeled or not

  bool in_loop() const { return !loop_indices.empty(); }
};

CountExpr multiplier(const Region& region);
Region with_transform(Region region, Transform t);

// Conjunction of constraints (each expr >= 0) equivalent to `cond`, or to
// !cond when `negated`; nullopt when no affine conjunction exists.
std::optional<std::vector<AffineExpr>> affine_conjunction(const frontend::Expr& cond, bool negated,
                                                          std::string* why = nullptr);

enum class BranchStrategy { Intersection, Complement, Percentage, IterationCap, Unsplit, Gap };

struct BranchSplit {
  BranchStrategy strategy = BranchStrategy::Gap;
  Region then_region;
  Region else_region;
  std::string reason;  // for Gap
};

// Splits `ctx` between the arms of an if. Annotations win over the condition;
// an affine condition is intersected, a condition whose negation is affine uses
// the complement. Outside loops an unanalyzable branch keeps `ctx` for both
// arms (Unsplit); inside loops it is a Gap.
BranchSplit handle_branch(const frontend::Expr& cond, const std::vector<frontend::Annotation>& annotations,
                          const Region& ctx);

// Hoists lp_init/lp_cond from non-loop statements to the nearest enclosing
// loop and fills Stmt::all_lines. Throws AnnotationMismatch for annotations
// that cannot apply where they are attached.
void collect_bottom_up(frontend::SourceUnit& unit);

struct TopDownResult {
  std::vector<FunctionMetrics> functions;  // callees before callers
  std::vector<Finding> findings;
};

TopDownResult generate_top_down(const std::vector<frontend::SourceUnit>& units, const binary::LineMap& line_map,
                                const binary::ArchDescription& arch);

// result[c] = caller[c] + iterations * callee[c]
MetricVector compose_call(const MetricVector& caller, const MetricVector& callee, const CountExpr& iterations);

}  // namespace statmodel::metrics
