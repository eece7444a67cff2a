#include <set>
#include <sstream>

#include "statmodel/model/model.hpp"

namespace statmodel::model {

namespace {

const std::set<std::string>& python_reserved() {
  static const std::set<std::string> kWords = {
      "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
      "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
      "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
      "with", "yield", "metrics", "handle_function_call", "sum", "range", "max"};
  return kWords;
}

std::string ident(const std::string& name) {
  return python_reserved().count(name) ? name + "_" : name;
}

std::string py(const CountExpr& e) {
  using K = CountExpr::Kind;
  auto join = [&](const char* op) {
    std::string s = "(";
    bool first = true;
    for (const auto& k : e.operands()) {
      if (!first) s += op;
      s += py(k);
      first = false;
    }
    return s + ")";
  };
  switch (e.kind()) {
    case K::Int:
      return e.value() < 0 ? "(" + e.value().str() + ")" : e.value().str();
    case K::Param:
      return ident(e.name());
    case K::Add:
      return join(" + ");
    case K::Mul:
      return join(" * ");
    case K::Pow:
      return "(" + py(e.operands()[0]) + " ** " + std::to_string(e.exponent()) + ")";
    case K::FloorDiv:
      return "(" + py(e.operands()[0]) + " // " + e.divisor().str() + ")";
    case K::Max0:
      return "max(0, " + py(e.operands()[0]) + ")";
    case K::LazySum: {
      auto ops = e.operands();
      return "sum(" + py(ops[2]) + " for " + ident(e.name()) + " in range(" + py(ops[0]) + ", " + py(ops[1]) +
             " + 1, " + std::to_string(e.step()) + "))";
    }
  }
  return "0";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string emit_python(const Model& model) {
  std::ostringstream out;
  out << "# Instruction-count model generated by statmodel " << model.meta.tool_version << ".\n";
  out << "# Each function returns a dict of category -> count for one call.\n";
  if (!model.arch_ref.empty()) out << "# arch_ref: " << model.arch_ref << "\n";
  if (model.functions.empty()) return out.str();
  out << "\nfrom statmodel_runtime import handle_function_call\n";

  for (const auto& [name, f] : model.functions) {
    std::string sig;
    for (const auto& p : root_params(model, name)) sig += (sig.empty() ? "" : ", ") + ident(p.name);
    out << "\n\ndef " << ident(name) << "(" << sig << "):\n";
    out << "    metrics = {}\n";
    for (const auto& [cat, n] : f.body.counts) out << "    metrics[" << quoted(cat) << "] = " << py(n) << "\n";
    for (const auto& c : f.call_sites) {
      if (c.external) {
        out << "    # line " << c.line << ": " << c.callee << " is external\n";
        continue;
      }
      std::string args;
      for (const auto& p : root_params(model, c.callee)) {
        auto a = c.args.find(p.name);
        args += (args.empty() ? "" : ", ") + (a != c.args.end() ? py(a->second) : ident(p.name));
      }
      out << "    metrics = handle_function_call(metrics, " << ident(c.callee) << "(" << args << "), "
          << py(c.iterations) << ")\n";
    }
    out << "    return metrics\n";
  }
  return out.str();
}

}  // namespace statmodel::model
