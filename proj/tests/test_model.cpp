#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "statmodel/binary/elf.hpp"
#include "statmodel/binary/line_map.hpp"
#include "statmodel/binary/line_table.hpp"
#include "statmodel/error.hpp"
#include "statmodel/model/model.hpp"
#include "statmodel/pipeline.hpp"

#ifndef STATMODEL_FIXTURE_DIR
#define STATMODEL_FIXTURE_DIR "tests/fixtures"
#endif
#ifndef STATMODEL_DATA_DIR
#define STATMODEL_DATA_DIR "data"
#endif

using namespace statmodel;
using namespace statmodel::model;
using metrics::CallSite;

namespace {

std::string fixture(const std::string& name) { return std::string(STATMODEL_FIXTURE_DIR) + "/" + name; }

const binary::ArchDescription& arch() {
  static const auto a = binary::load_archdesc(std::string(STATMODEL_DATA_DIR) + "/x86_64.arch");
  return a;
}

const Model& fig6() {
  static const Model m =
      analyze({{fixture("fig6.cpp")}, fixture("fig6.elf"), fixture("fig6.dis"), true}, arch()).model;
  return m;
}

const Model& triad() {
  static const Model m =
      analyze({{fixture("triad.c")}, fixture("tiny.elf"), fixture("tiny.dis"), true}, arch()).model;
  return m;
}

// Instructions of `category` the line map attributes to file:line.
std::int64_t per_line(const std::string& elf, const std::string& dis, const std::string& file, unsigned line,
                      const std::string& category) {
  auto table = binary::decode_line_program(binary::load_elf(fixture(elf)));
  auto d = binary::parse_disassembly(read_file(fixture(dis)));
  auto map = binary::map_lines(table, d.instructions);
  std::int64_t k = 0;
  for (const auto& mi : map[binary::LineKey{file, line}]) k += binary::categorize(mi.instr.mnemonic, arch()) == category;
  return k;
}

FunctionMetrics fn(const std::string& name, std::vector<CallSite> calls = {}) {
  FunctionMetrics f;
  f.mangled_name = name;
  f.call_sites = std::move(calls);
  return f;
}

CallSite call(const std::string& callee, int line, CountExpr iterations = CountExpr::constant(1)) {
  CallSite c;
  c.callee = callee;
  c.line = line;
  c.iterations = std::move(iterations);
  return c;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::IoError;
}

const std::string kFp = "sse2_packed_arithmetic";

}  // namespace

TEST_CASE("single main without calls") {
  Model m = build_model({fn("main_0")}, arch());
  REQUIRE(m.entry);
  CHECK(*m.entry == "main_0");
  CHECK(m.params.empty());
  CHECK(m.arch_ref == arch().hash);
  auto r = evaluate(m, "main_0", {});
  CHECK(r.per_category.empty());
}

TEST_CASE("call graph validation") {
  CHECK(code_of([] { build_model({fn("f_0"), fn("f_0")}, arch()); }) == ErrorCode::DuplicateFunction);
  CHECK(code_of([] { build_model({fn("f_0", {call("g_0", 3)})}, arch()); }) == ErrorCode::UnresolvedCallee);
  auto ext = call("g_0", 3);
  ext.external = true;
  CHECK_NOTHROW(build_model({fn("f_0", {ext})}, arch()));
  CHECK(code_of([] { build_model({fn("a_0", {call("b_0", 2)}), fn("b_0", {call("a_0", 5)})}, arch()); }) ==
        ErrorCode::ModelGap);
}

TEST_CASE("fig6 model: functions, parameters and annotation-driven counts") {
  const Model& m = fig6();
  CHECK(m.functions.size() == 2);
  CHECK(m.functions.count("A_foo_2"));
  REQUIRE(m.entry);
  CHECK(*m.entry == "main_0");
  REQUIRE(m.params.size() == 1);
  CHECK(m.params[0].name == "y_16");
  CHECK(m.params[0].source_line == 16);
  REQUIRE(m.functions.at("A_foo_2").params.size() == 1);
  CHECK(m.functions.at("A_foo_2").params[0].name == "y");

  // Oracle: per-iteration FP instructions on line 10, times the enumerated
  // iteration domain i in [0,10), j in [0,y).
  std::int64_t k = per_line("fig6.elf", "fig6.dis", "fig6.cpp", 10, kFp);
  CHECK(k == 2);
  for (std::int64_t y : {0, 1, 10, 37}) {
    std::int64_t iterations = 0;
    for (int i = 0; i < 10; ++i) {
      for (std::int64_t j = 0; j < y; ++j) ++iterations;
    }
    auto r = evaluate(m, "main_0", {{"y_16", y}});
    CHECK(r.per_category[kFp] == k * iterations);
    CHECK(r.per_function.at("A_foo_2").at(kFp) == k * iterations);
  }
}

TEST_CASE("triad FP total is k * N") {
  const Model& m = triad();
  std::int64_t k = per_line("tiny.elf", "tiny.dis", "triad.c", 6, kFp);
  CHECK(k == 2);
  for (std::int64_t n : {0, 10, 2000000}) {
    auto r = evaluate(m, *m.entry, {{"N", n}});
    CHECK(r.per_category[kFp] == k * n);
  }
}

TEST_CASE("loop-linear categories are affine in the extent") {
  const Model& m = triad();
  auto at = [&](std::int64_t n) { return evaluate(m, "triad_5", {{"N", n}}).per_category; };
  auto zero = at(0);
  for (auto [a, b] : std::vector<std::pair<std::int64_t, std::int64_t>>{{1, 1}, {3, 9}, {100, 2500}}) {
    auto sum = at(a + b), x = at(a), y = at(b);
    for (const auto& [cat, v] : sum) CHECK(v == x[cat] + y[cat] - zero[cat]);
  }
}

TEST_CASE("evaluation errors") {
  const Model& m = fig6();
  CHECK(code_of([&] { evaluate(m, "nope_0", {}); }) == ErrorCode::UnknownFunction);
  try {
    Model two = build_model({[] {
                               auto f = fn("f_0");
                               f.body.add("misc", CountExpr::param("a") + CountExpr::param("b"));
                               f.params = {{"a", 1}, {"b", 2}};
                               return f;
                             }()},
                            arch());
    evaluate(two, "f_0", {});
    FAIL("expected UnboundParameter");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnboundParameter);
    CHECK(std::string(e.what()).find("a, b") != std::string::npos);
  }
}

TEST_CASE("callee parameters are bound from call arguments") {
  auto callee = fn("g_1");
  callee.body.add("misc", CountExpr::param("n"));
  callee.params = {{"n", 2}};
  auto site = call("g_1", 9, CountExpr::param("m"));
  site.args["n"] = CountExpr::constant(3) * CountExpr::param("m");
  auto caller = fn("main_0", {site});
  caller.params = {{"m", 9}};
  Model m = build_model({callee, caller}, arch());
  auto r = evaluate(m, "main_0", {{"m", 4}});
  CHECK(r.per_category["misc"] == 4 * 12);
  CHECK(evaluate(m, "g_1", {{"n", 5}}).per_category["misc"] == 5);
}

TEST_CASE("external calls are flagged and contribute nothing") {
  const Model& m = triad();
  auto r = evaluate(m, *m.entry, {{"N", 3}});
  bool atoi = false;
  for (const auto& f : r.flags) atoi = atoi || f.find("atoi_1") != std::string::npos;
  CHECK(atoi);
  CHECK_FALSE(r.per_function.count("atoi_1"));
}

TEST_CASE("serialization round-trips") {
  for (const Model* m : {&fig6(), &triad()}) {
    std::string text = serialize(*m);
    Model back = deserialize(text);
    CHECK(serialize(back) == text);
    std::string root = *m->entry;
    std::string p = m->params.at(0).name;
    for (std::int64_t v : {0, 5, 123}) {
      CHECK(evaluate(*m, root, {{p, v}}).per_category == evaluate(back, root, {{p, v}}).per_category);
    }
  }
}

TEST_CASE("deserialize rejects bad input") {
  std::string good = read_file(fixture("cg_solve_model.json"));
  CHECK_NOTHROW(deserialize(good));
  auto with = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
  };
  CHECK(code_of([&] { deserialize(with("\"schema_version\": 1", "\"schema_version\": 99")); }) ==
        ErrorCode::SchemaVersionMismatch);
  CHECK(code_of([&] { deserialize(with("(int 680000000)", "(int -5)")); }) == ErrorCode::MalformedModel);
  CHECK(code_of([&] { deserialize(with("(int 680000000)", "(int")); }) == ErrorCode::MalformedModel);
  CHECK(code_of([&] { deserialize(with("\"calls\": []", "\"calls\": [{\"callee\": \"x_0\"}]")); }) ==
        ErrorCode::MalformedModel);
  CHECK(code_of([] { deserialize("{not json"); }) == ErrorCode::MalformedModel);
  CHECK(code_of([] { deserialize("[]"); }) == ErrorCode::MalformedModel);
}

TEST_CASE("python export") {
  Model empty;
  std::string text = emit_python(empty);
  CHECK(text.rfind("# ", 0) == 0);
  CHECK(text.find("def ") == std::string::npos);

  std::string py = emit_python(fig6());
  CHECK(py.find("from statmodel_runtime import handle_function_call\n") != std::string::npos);
  CHECK(py.find("def A_foo_2(y):") != std::string::npos);
  CHECK(py.find("def main_0(y_16):") != std::string::npos);
  CHECK(py.find("handle_function_call(metrics, A_foo_2(y_16), 1)") != std::string::npos);
  CHECK(emit_python(fig6()) == py);
}

TEST_CASE("cg_solve distribution and arithmetic intensity") {
  Model m = deserialize(read_file(fixture("cg_solve_model.json")));
  auto r = evaluate(m, "cg_solve_0", {});
  auto d = distribution(r, arch());
  REQUIRE(d.rows.size() == 7);
  CHECK(d.rows[0].display_name == "Integer arithmetic instruction");
  CHECK(d.total == Int("4422000000"));
  Int hundredths = 0;
  for (const auto& row : d.rows) hundredths += row.hundredths;
  CHECK(hundredths == 10000);
  CHECK(format_hundredths(d.rows[2].hundredths) == "54.73");

  auto ai = arithmetic_intensity(r, arch());
  CHECK(ai.value == Rational(193, 367));
  CHECK(ai.rendered == "0.53");
}

TEST_CASE("arithmetic intensity needs memory instructions") {
  EvaluationResult r;
  r.per_category[kFp] = 10;
  CHECK(code_of([&] { arithmetic_intensity(r, arch()); }) == ErrorCode::ZeroDenominator);
}

TEST_CASE("largest remainder keeps percentages at 100") {
  EvaluationResult r;
  r.per_category["misc"] = 1;
  r.per_category["mode_64bit"] = 1;
  r.per_category["integer_arithmetic"] = 1;
  auto d = distribution(r, arch());
  Int sum = 0;
  for (const auto& row : d.rows) sum += row.hundredths;
  CHECK(sum == 10000);
  CHECK(format_hundredths(d.rows[0].hundredths) == "33.34");
  CHECK(distribution(EvaluationResult{}, arch()).rows.empty());
}

TEST_CASE("decimal rendering rounds half to even") {
  CHECK(render_decimal(Rational(1, 8), 2) == "0.12");
  CHECK(render_decimal(Rational(3, 8), 2) == "0.38");
  CHECK(render_decimal(Rational(27, 200), 2) == "0.14");
  CHECK(render_decimal(Rational(1, 2), 2) == "0.50");
  CHECK(render_decimal(Rational(-1, 3), 2) == "-0.33");
  CHECK(render_decimal(Rational(7, 1), 0) == "7");
  CHECK(render_decimal(Rational(5, 2), 0) == "2");
}
