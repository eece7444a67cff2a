#include "statmodel/error.hpp"
#include "statmodel/metrics/metrics.hpp"

namespace statmodel::metrics {

using frontend::Annotation;
using frontend::AnnotationKind;
using frontend::ForLoop;
using frontend::IfStmt;
using frontend::StmtPtr;

namespace {

[[noreturn]] void mismatch(const std::string& file, const Annotation& a, const std::string& why) {
  throw Error(ErrorCode::AnnotationMismatch, file + ":" + std::to_string(a.line) + ": '" +
                                                 std::string(frontend::annotation_key(a.kind)) + "' " + why);
}

void visit(const std::string& file, const StmtPtr& s, ForLoop* enclosing, StmtPtr enclosing_stmt) {
  s->all_lines = s->lines;
  ForLoop* loop = s->as<ForLoop>();
  bool is_if = s->as<IfStmt>() != nullptr;

  std::vector<Annotation> kept;
  for (const auto& a : s->annotations) {
    switch (a.kind) {
      case AnnotationKind::Percentage:
        if (!is_if) mismatch(file, a, "applies only to if statements");
        kept.push_back(a);
        break;
      case AnnotationKind::IterationCount:
        if (!is_if && !loop) mismatch(file, a, "applies only to loops and if statements");
        kept.push_back(a);
        break;
      case AnnotationKind::LpInit:
      case AnnotationKind::LpCond:
        if (loop) {
          kept.push_back(a);
        } else if (enclosing) {
          // An lp_* pragma inside a loop body completes that loop. The loop's
          // own annotation of the same kind takes precedence.
          bool own = false;
          for (const auto& b : enclosing_stmt->annotations) own = own || b.kind == a.kind;
          if (!own) {
            Annotation h = a;
            h.attach_site = enclosing_stmt->id;
            enclosing_stmt->annotations.push_back(h);
          }
        } else {
          mismatch(file, a, "is not inside a loop");
        }
        break;
      case AnnotationKind::Skip:
        kept.push_back(a);
        break;
    }
  }
  s->annotations = std::move(kept);

  auto child = [&](const StmtPtr& c) {
    if (!c) return;
    visit(file, c, loop ? loop : enclosing, loop ? s : enclosing_stmt);
    s->all_lines.insert(c->all_lines.begin(), c->all_lines.end());
  };
  if (loop) {
    child(loop->body);
  } else if (auto* i = s->as<IfStmt>()) {
    child(i->then_branch);
    child(i->else_branch);
  } else if (auto* b = s->as<frontend::Block>()) {
    for (const auto& c : b->stmts) child(c);
  }
}

}  // namespace

void collect_bottom_up(frontend::SourceUnit& unit) {
  for (auto& fn : unit.functions) visit(unit.file_name, fn.body, nullptr, nullptr);
}

}  // namespace statmodel::metrics
