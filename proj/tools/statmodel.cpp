// statmodel: build and query parametric instruction-mix models.
//
// Exit codes: 0 ok, 2 model gaps under --strict, 64 usage, 65 bad input data,
// 66 missing input or debug info, 73 output not writable.

#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "default_arch.hpp"
#include "statmodel/error.hpp"
#include "statmodel/pipeline.hpp"

using namespace statmodel;
using nlohmann::json;

namespace {

constexpr int kExitGaps = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitNoInput = 66;
constexpr int kExitCantCreate = 73;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OutputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::vector<std::string> sources;
  std::string elf;
  std::string disasm;
  std::string arch;
  std::string output;
  std::vector<std::string> params;
  std::string function;
  std::string report = "distribution";
  std::string model;
  bool json = false;
  bool strict = false;
  bool reproducible = false;
};

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot write '" + path + "'");
  out << text;
  out.close();
  if (!out) throw OutputError("cannot write '" + path + "'");
}

std::optional<std::string> arch_path(const Config& c) {
  if (!c.arch.empty()) return c.arch;
  if (const char* env = std::getenv("STATMODEL_ARCH"); env && *env) return std::string(env);
  return std::nullopt;
}

binary::ArchDescription report_arch(const Config& c) {
  if (auto p = arch_path(c)) return binary::load_archdesc(*p);
  return binary::parse_archdesc(kDefaultArchText);
}

model::Binding parse_binding(const std::vector<std::string>& items) {
  model::Binding b;
  for (const auto& kv : items) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("parameter '" + kv + "' is not key=value");
    std::string key = kv.substr(0, eq);
    std::string value = kv.substr(eq + 1);
    std::int64_t v = 0;
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (value.empty() || ec != std::errc() || ptr != end) {
      throw UsageError("parameter '" + key + "' needs a 64-bit integer value, got '" + value + "'");
    }
    b[key] = v;
  }
  return b;
}

model::Model load_model(const Config& c) { return model::deserialize(read_file(c.model)); }

std::string pick_root(const model::Model& m, const Config& c) {
  if (!c.function.empty()) return c.function;
  if (!m.entry) throw UsageError("the model has no entry function; pass --function");
  return *m.entry;
}

json big(const poly::Int& v) {
  if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max()) {
    return json(static_cast<std::int64_t>(v));
  }
  return json(v.str());
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string lpad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

void print_flags(const std::vector<std::string>& flags) {
  for (const auto& f : flags) std::cerr << "statmodel: note: " << f << "\n";
}

int cmd_analyze(const Config& c) {
  if (c.sources.empty()) throw UsageError("analyze needs at least one --source");
  if (c.elf.empty()) throw UsageError("analyze needs --elf");
  if (c.disasm.empty()) throw UsageError("analyze needs --disasm");
  auto ap = arch_path(c);
  if (!ap) throw UsageError("analyze needs --arch (or STATMODEL_ARCH)");
  auto arch = binary::load_archdesc(*ap);

  AnalyzeOutput out = analyze({c.sources, c.elf, c.disasm, c.reproducible}, arch);
  for (const auto& issue : out.issues) {
    std::cerr << "statmodel: warning[UnparsableLine]: " << c.disasm << ":" << issue.line << ": " << issue.text << "\n";
  }
  bool gaps = false;
  for (const auto& f : out.findings) {
    gaps = gaps || f.kind == metrics::Finding::Kind::ModelGap;
    std::cerr << "statmodel: warning[" << metrics::finding_kind_name(f.kind) << "]: ";
    if (!f.file.empty()) std::cerr << f.file << ":" << f.line << ": ";
    std::cerr << f.message << "\n";
  }
  write_output(c.output, model::serialize(out.model));
  if (gaps && c.strict) {
    std::cerr << "statmodel: error[ModelGap]: model has gaps and --strict is set\n";
    return kExitGaps;
  }
  return 0;
}

int cmd_eval(const Config& c) {
  auto m = load_model(c);
  auto binding = parse_binding(c.params);
  std::string root = pick_root(m, c);
  auto r = model::evaluate(m, root, binding);
  print_flags(r.flags);
  if (c.json) {
    json doc;
    doc["root"] = root;
    doc["binding"] = json::object();
    for (const auto& [k, v] : binding) doc["binding"][k] = v;
    doc["per_category"] = json::object();
    for (const auto& [k, v] : r.per_category) doc["per_category"][k] = big(v);
    doc["per_function"] = json::object();
    for (const auto& [fn, cats] : r.per_function) {
      doc["per_function"][fn] = json::object();
      for (const auto& [k, v] : cats) doc["per_function"][fn][k] = big(v);
    }
    doc["flags"] = r.flags;
    write_output(c.output, doc.dump(2) + "\n");
    return 0;
  }
  std::string text = "root: " + root + "\n";
  std::size_t width = 8;
  for (const auto& [k, _] : r.per_category) width = std::max(width, k.size());
  poly::Int total = 0;
  for (const auto& [k, v] : r.per_category) {
    text += pad(k, width) + "  " + v.str() + "\n";
    total += v;
  }
  text += pad("total", width) + "  " + total.str() + "\n";
  write_output(c.output, text);
  return 0;
}

int cmd_export(const Config& c) {
  auto m = load_model(c);
  write_output(c.output, model::emit_python(m));
  return 0;
}

int cmd_report(const Config& c) {
  auto m = load_model(c);
  auto arch = report_arch(c);
  if (!m.arch_ref.empty() && m.arch_ref != arch.hash) {
    std::cerr << "statmodel: warning: model was built with architecture " << m.arch_ref << ", reporting with "
              << arch.hash << "\n";
  }
  auto binding = parse_binding(c.params);
  std::string root = pick_root(m, c);
  auto r = model::evaluate(m, root, binding);
  print_flags(r.flags);

  std::string text;
  if (c.report == "ai") {
    auto ai = model::arithmetic_intensity(r, arch);
    if (c.json) {
      json doc = {{"root", root},
                  {"fp", big(ai.fp)},
                  {"mem", big(ai.mem)},
                  {"numerator", big(boost::multiprecision::numerator(ai.value))},
                  {"denominator", big(boost::multiprecision::denominator(ai.value))},
                  {"value", ai.rendered}};
      text = doc.dump(2) + "\n";
    } else {
      text = "arithmetic intensity of " + root + ": " + ai.rendered + " (" + ai.fp.str() + " / " + ai.mem.str() +
             " = " + boost::multiprecision::numerator(ai.value).str() + "/" +
             boost::multiprecision::denominator(ai.value).str() + ")\n";
    }
  } else {
    auto d = model::distribution(r, arch);
    if (c.json) {
      json rows = json::array();
      for (const auto& row : d.rows) {
        rows.push_back({{"category", row.category},
                        {"name", row.display_name},
                        {"count", big(row.count)},
                        {"percent", model::format_hundredths(row.hundredths)}});
      }
      text = json({{"root", root}, {"rows", rows}, {"total", big(d.total)}}).dump(2) + "\n";
    } else {
      std::size_t width = 5;
      for (const auto& row : d.rows) width = std::max(width, row.display_name.size());
      text = "instruction distribution of " + root + "\n";
      poly::Int sum = 0;
      for (const auto& row : d.rows) {
        text += pad(row.display_name, width) + "  " + lpad(row.count.str(), 14) + "  " +
                lpad(model::format_hundredths(row.hundredths), 6) + "%\n";
        sum += row.hundredths;
      }
      text += pad("Total", width) + "  " + lpad(d.total.str(), 14) + "  " +
              lpad(d.total == 0 ? std::string("0.00") : model::format_hundredths(sum), 6) + "%\n";
    }
  }
  write_output(c.output, text);
  return 0;
}

int fail(std::string_view code, const std::string& message, int status) {
  std::string line = message;
  for (auto& ch : line) {
    if (ch == '\n') ch = ' ';
  }
  std::cerr << "statmodel: error[" << code << "]: " << line << "\n";
  return status;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingDebugInfo:
    case ErrorCode::IoError:
      return kExitNoInput;
    default:
      return kExitData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static instruction-mix models from C sources and their binaries"};
  app.require_subcommand(1);
  Config c;

  auto* analyze = app.add_subcommand("analyze", "Build a model from sources, an ELF and its disassembly");
  analyze->add_option("--source", c.sources, "C/C++ source file (repeatable)");
  analyze->add_option("--elf", c.elf, "Binary built with -g");
  analyze->add_option("--disasm", c.disasm, "objdump -d output for the binary");
  analyze->add_option("--arch", c.arch, "Architecture description (default: $STATMODEL_ARCH)");
  analyze->add_option("-o,--output", c.output, "Model JSON path (default: stdout)");
  analyze->add_flag("--strict", c.strict, "Exit 2 when the model has gaps");
  analyze->add_flag("--reproducible", c.reproducible, "Fixed creation timestamp");

  auto* eval = app.add_subcommand("eval", "Evaluate a model for concrete parameters");
  auto* exp = app.add_subcommand("export", "Write the model as a Python module");
  auto* report = app.add_subcommand("report", "Instruction distribution or arithmetic intensity");
  for (auto* sub : {eval, exp, report}) {
    sub->add_option("model", c.model, "Model JSON")->required();
    sub->add_option("-o,--output", c.output, "Output path (default: stdout)");
  }
  for (auto* sub : {eval, report}) {
    sub->add_option("-p,--param", c.params, "Parameter binding key=value (repeatable)");
    sub->add_option("--function", c.function, "Root function (default: the model entry)");
    sub->add_flag("--json", c.json, "Machine-readable output");
  }
  report->add_option("--report", c.report, "Report kind")->check(CLI::IsMember({"distribution", "ai"}));
  report->add_option("--arch", c.arch, "Architecture description (default: $STATMODEL_ARCH, then built-in)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("Usage", e.what(), kExitUsage);
  }

  try {
    if (analyze->parsed()) return cmd_analyze(c);
    if (eval->parsed()) return cmd_eval(c);
    if (exp->parsed()) return cmd_export(c);
    return cmd_report(c);
  } catch (const UsageError& e) {
    return fail("Usage", e.what(), kExitUsage);
  } catch (const OutputError& e) {
    return fail("IoError", e.what(), kExitCantCreate);
  } catch (const Error& e) {
    return fail(error_code_name(e.code()), e.what(), exit_code(e.code()));
  }
}
