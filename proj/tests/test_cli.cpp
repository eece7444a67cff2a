#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#ifndef STATMODEL_FIXTURE_DIR
#define STATMODEL_FIXTURE_DIR "tests/fixtures"
#endif
#ifndef STATMODEL_DATA_DIR
#define STATMODEL_DATA_DIR "data"
#endif
#ifndef STATMODEL_CLI
#define STATMODEL_CLI "build/statmodel"
#endif
#ifndef STATMODEL_SCRATCH_DIR
#define STATMODEL_SCRATCH_DIR "/tmp/statmodel_test_cli"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kFix = STATMODEL_FIXTURE_DIR;
const std::string kArch = std::string(STATMODEL_DATA_DIR) + "/x86_64.arch";

std::string scratch(const std::string& name) {
  fs::create_directories(STATMODEL_SCRATCH_DIR);
  return std::string(STATMODEL_SCRATCH_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

// `args` is pasted into a shell command line; `env` goes in front of it.
Run run(const std::string& args, const std::string& env = "env -u STATMODEL_ARCH") {
  std::string out = scratch("stdout.txt"), err = scratch("stderr.txt");
  std::string cmd = env + " '" STATMODEL_CLI "' " + args + " >'" + out + "' 2>'" + err + "'";
  int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string analyze_args(const std::string& src, const std::string& elf, const std::string& dis) {
  return "analyze --source '" + kFix + "/" + src + "' --elf '" + kFix + "/" + elf + "' --disasm '" + kFix + "/" +
         dis + "'";
}

std::string triad_model() {
  std::string path = scratch("triad.json");
  Run r = run(analyze_args("triad.c", "tiny.elf", "tiny.dis") + " --arch '" + kArch + "' --reproducible -o '" +
              path + "'");
  REQUIRE(r.status == 0);
  return path;
}

bool single_error_line(const std::string& err, const std::string& code) {
  std::string want = "statmodel: error[" + code + "]: ";
  auto pos = err.find(want);
  if (pos == std::string::npos) return false;
  auto end = err.find('\n', pos);
  return end != std::string::npos && end > pos + want.size();
}

}  // namespace

TEST_CASE("analyze writes a model with sse2 counts") {
  std::string path = scratch("fig6.json");
  Run r = run(analyze_args("fig6.cpp", "fig6.elf", "fig6.dis") + " --arch '" + kArch + "' -o '" + path + "'");
  REQUIRE(r.status == 0);
  json m = json::parse(slurp(path));
  CHECK(m["schema_version"] == 1);
  CHECK(m["entry"] == "main_0");
  CHECK(m["params"][0]["name"] == "y_16");
  CHECK(m["functions"].contains("A_foo_2"));
  CHECK(m["functions"]["A_foo_2"]["body"].contains("sse2_packed_arithmetic"));
  CHECK(m["functions"]["A_foo_2"]["body"].contains("sse2_data_movement"));
}

TEST_CASE("analyze falls back to STATMODEL_ARCH") {
  Run r = run(analyze_args("triad.c", "tiny.elf", "tiny.dis"), "STATMODEL_ARCH='" + kArch + "'");
  CHECK(r.status == 0);
  CHECK(json::parse(r.out)["entry"] == "main_2");
}

TEST_CASE("analyze usage and input errors") {
  Run no_arch = run(analyze_args("triad.c", "tiny.elf", "tiny.dis"));
  CHECK(no_arch.status == 64);
  CHECK(single_error_line(no_arch.err, "Usage"));

  Run stripped = run(analyze_args("triad.c", "tiny_stripped.elf", "tiny.dis") + " --arch '" + kArch + "'");
  CHECK(stripped.status == 66);
  CHECK(single_error_line(stripped.err, "MissingDebugInfo"));
  CHECK(stripped.err.find("-g") != std::string::npos);

  Run missing = run(analyze_args("nope.c", "tiny.elf", "tiny.dis") + " --arch '" + kArch + "'");
  CHECK(missing.status == 66);
  CHECK(single_error_line(missing.err, "IoError"));

  Run bad_flag = run("analyze --bogus");
  CHECK(bad_flag.status == 64);
  CHECK(run("").status == 64);
}

TEST_CASE("strict mode fails on model gaps") {
  // fig6 without its lp_cond annotation: the inner bound reads an array.
  std::string dir = scratch("gap");
  fs::create_directories(dir);
  std::string src = slurp(kFix + "/fig6.cpp");
  auto pos = src.find("#pragma @Annotation {lp_cond:y}");
  REQUIRE(pos != std::string::npos);
  src.replace(pos, std::string("#pragma @Annotation {lp_cond:y}").size(), "// no annotation");
  std::ofstream(dir + "/fig6.cpp") << src;
  std::string args = "analyze --source '" + dir + "/fig6.cpp' --elf '" + kFix + "/fig6.elf' --disasm '" + kFix +
                     "/fig6.dis' --arch '" + kArch + "' -o '" + dir + "/m.json'";
  Run lax = run(args);
  CHECK(lax.status == 0);
  CHECK(lax.err.find("warning[ModelGap]: fig6.cpp:9:") != std::string::npos);
  Run strict = run(args + " --strict");
  CHECK(strict.status == 2);
  CHECK(single_error_line(strict.err, "ModelGap"));
}

TEST_CASE("eval prints category totals") {
  std::string model = triad_model();
  Run r = run("eval '" + model + "' -p N=2000000 --json");
  REQUIRE(r.status == 0);
  json j = json::parse(r.out);
  CHECK(j["per_category"]["sse2_packed_arithmetic"] == 4000000);
  CHECK(j["root"] == "main_2");

  Run zero = run("eval '" + model + "' -p N=0 --json --function triad_5");
  REQUIRE(zero.status == 0);
  json z = json::parse(zero.out);
  CHECK(z["per_category"]["sse2_packed_arithmetic"] == 0);
  CHECK(z["per_category"]["mode_64bit"] == 0);

  Run text = run("eval '" + model + "' -p N=10");
  CHECK(text.status == 0);
  CHECK(text.out.find("sse2_packed_arithmetic") != std::string::npos);
  CHECK(text.out.find(" 20\n") != std::string::npos);
}

TEST_CASE("eval errors") {
  std::string model = triad_model();
  Run unbound = run("eval '" + model + "'");
  CHECK(unbound.status == 65);
  CHECK(single_error_line(unbound.err, "UnboundParameter"));
  CHECK(unbound.err.find("N") != std::string::npos);

  CHECK(run("eval '" + model + "' -p N=abc").status == 64);
  CHECK(run("eval '" + model + "' -p N=1 --function nope_0").status == 65);

  std::string bad = scratch("v99.json");
  std::string text = slurp(model);
  text.replace(text.find("\"schema_version\": 1"), 19, "\"schema_version\": 99");
  std::ofstream(bad) << text;
  Run v99 = run("eval '" + bad + "' -p N=1");
  CHECK(v99.status == 65);
  CHECK(single_error_line(v99.err, "SchemaVersionMismatch"));
}

TEST_CASE("eval of a parameter-free model needs no bindings") {
  Run r = run("eval '" + kFix + "/cg_solve_model.json' --function cg_solve_0");
  CHECK(r.status == 0);
  CHECK(r.out.find("4422000000") != std::string::npos);
}

TEST_CASE("export matches the golden module") {
  std::string model = scratch("fig6_export.json");
  REQUIRE(run(analyze_args("fig6.cpp", "fig6.elf", "fig6.dis") + " --arch '" + kArch + "' --reproducible -o '" +
              model + "'")
              .status == 0);
  Run r = run("export '" + model + "'");
  REQUIRE(r.status == 0);
  CHECK(r.out == slurp(kFix + "/fig6.py.golden"));

  Run unwritable = run("export '" + model + "' -o '" + scratch("no/such/dir/out.py") + "'");
  CHECK(unwritable.status == 73);
  CHECK(single_error_line(unwritable.err, "IoError"));
}

TEST_CASE("export of an empty model is header-only") {
  std::string path = scratch("empty.json");
  std::ofstream(path) << R"({"schema_version":1,"arch_ref":"","params":[],"functions":{},"entry":null,"meta":{}})";
  Run r = run("export '" + path + "'");
  REQUIRE(r.status == 0);
  std::istringstream lines(r.out);
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty()) CHECK(line[0] == '#');
  }
}

TEST_CASE("report on the cg_solve fixture") {
  std::string model = kFix + "/cg_solve_model.json";
  Run ai = run("report '" + model + "' --function cg_solve_0 --report ai");
  REQUIRE(ai.status == 0);
  CHECK(ai.out.find(": 0.53 ") != std::string::npos);

  Run ai_json = run("report '" + model + "' --function cg_solve_0 --report ai --json");
  json j = json::parse(ai_json.out);
  CHECK(j["value"] == "0.53");
  CHECK(j["numerator"] == 193);
  CHECK(j["denominator"] == 367);

  Run dist = run("report '" + model + "' --function cg_solve_0 --report distribution --json");
  REQUIRE(dist.status == 0);
  json d = json::parse(dist.out);
  CHECK(d["rows"].size() == 7);
  long hundredths = 0;
  for (const auto& row : d["rows"]) {
    std::string p = row["percent"];
    hundredths += std::stol(p.substr(0, p.find('.'))) * 100 + std::stol(p.substr(p.find('.') + 1));
  }
  CHECK(hundredths == 10000);

  Run text = run("report '" + model + "' --function cg_solve_0", "STATMODEL_ARCH='" + kArch + "'");
  CHECK(text.status == 0);
  CHECK(text.out.find("100.00%") != std::string::npos);

  Run unknown = run("report '" + model + "' --function cg_solve_9");
  CHECK(unknown.status == 65);
  CHECK(single_error_line(unknown.err, "UnknownFunction"));

  CHECK(run("report '" + model + "' --function cg_solve_0 --report pie").status == 64);
}

TEST_CASE("reproducible analyze is byte-identical") {
  std::string args = analyze_args("fig6.cpp", "fig6.elf", "fig6.dis") + " --arch '" + kArch + "' --reproducible";
  Run a = run(args);
  Run b = run(args);
  REQUIRE(a.status == 0);
  CHECK(a.out == b.out);
  CHECK(json::parse(a.out)["meta"]["created"] == "1970-01-01T00:00:00Z");
}
