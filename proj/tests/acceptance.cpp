// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <sys/wait.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <regex>
#include <sstream>

#include "nest_gen.hpp"
#include "statmodel/binary/elf.hpp"
#include "statmodel/binary/line_table.hpp"
#include "statmodel/error.hpp"
#include "statmodel/metrics/metrics.hpp"
#include "statmodel/model/model.hpp"
#include "statmodel/pipeline.hpp"
#include "statmodel/poly/domain.hpp"

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
#define STATMODEL_SCRATCH_DIR "/tmp/statmodel_acceptance"
#endif

using namespace statmodel;
using namespace statmodel::poly;
using frontend::Comparison;
using frontend::LoopSCoP;

namespace {

const std::string kFix = STATMODEL_FIXTURE_DIR;

std::string fixture(const std::string& name) { return kFix + "/" + name; }

struct Failure {
  std::string why;
};

void expect(bool ok, const std::string& why) {
  if (!ok) throw Failure{why};
}

LoopSCoP scop(std::string idx, AffineExpr lo, AffineExpr hi) {
  LoopSCoP s;
  s.index = std::move(idx);
  s.lower = std::move(lo);
  s.upper = std::move(hi);
  s.step = 1;
  s.comparison = Comparison::LessEqual;
  return s;
}

AffineExpr var(const std::string& n) { return AffineExpr::variable(n, 1); }

std::string str(const Int& v) { return v.str(); }

// 200 nests, 5 bindings each, 60 of them with a branch constraint. Every
// count is checked against a literal simulation of the loops.
void oracle_suite() {
  auto start = std::chrono::steady_clock::now();
  testgen::NestGenerator gen(7001);
  int branches = 0;
  for (int n = 0; n < 200; ++n) {
    bool with_branch = n % 10 < 3;
    testgen::Nest nest = gen.nest(with_branch);
    branches += with_branch;
    LoopNestDomain d = domain_from_scops(testgen::to_scops(nest));
    CountExpr total = count_symbolic(d);
    std::optional<CountExpr> taken;
    if (nest.branch) taken = count_symbolic(intersect_branch(d, *nest.branch));
    for (int b = 0; b < 5; ++b) {
      ParamBinding binding = gen.binding();
      Int want = testgen::simulate(nest, binding, std::nullopt);
      expect(total.evaluate(binding) == want, "nest " + std::to_string(n) + ": symbolic " +
                                                  str(total.evaluate(binding)) + " vs enumerated " + str(want));
      expect(count_enumerate(d, binding) == want, "nest " + std::to_string(n) + ": enumerator disagrees");
      if (taken) {
        Int t = testgen::simulate(nest, binding, true);
        expect(taken->evaluate(binding) == t, "nest " + std::to_string(n) + ": branch count mismatch");
      }
    }
  }
  expect(branches == 60, "expected 60 nests with a branch");
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  expect(secs < 10.0, "took " + std::to_string(secs) + " s");
}

void reference_nest_counts() {
  LoopNestDomain l1 = domain_from_scops(std::vector<LoopSCoP>{scop("i", AffineExpr(0), AffineExpr(9))});
  std::vector<LoopSCoP> l2s{scop("i", AffineExpr(1), AffineExpr(4)), scop("j", var("i") + AffineExpr(1), AffineExpr(6))};
  LoopNestDomain l2 = domain_from_scops(l2s);
  AffineExpr j_gt_4 = var("j") - AffineExpr(5);  // j > 4  <=>  j - 5 >= 0
  CountExpr total = count_symbolic(l2);
  CountExpr then_count = count_symbolic(intersect_branch(l2, j_gt_4));
  CountExpr else_count = count_symbolic(intersect_branch(l2, negate_condition(j_gt_4)));
  expect(count_symbolic(l1).evaluate({}) == 10, "basic loop count " + str(count_symbolic(l1).evaluate({})));
  expect(total.evaluate({}) == 14, "dependent nest count " + str(total.evaluate({})));
  expect(then_count.evaluate({}) == 8, "j > 4 arm count " + str(then_count.evaluate({})));
  expect(else_count.evaluate({}) == 6, "j <= 4 arm count " + str(else_count.evaluate({})));
  expect(complement_count(total, then_count).evaluate({}) == 6, "complement of the j > 4 arm");
  expect(count_enumerate(l2, {}) == 14, "dependent nest enumeration");
}

// then + else == total for every branched suite nest, under intersection,
// complement (inclusion-exclusion) and pct floor/remainder splits.
void branch_conservation() {
  testgen::NestGenerator gen(7001);
  std::mt19937_64 rng(99);
  const std::vector<Rational> fractions = {Rational(1, 4), Rational(1, 3), Rational(2, 5), Rational(0), Rational(1),
                                           Rational(7, 9)};
  int checked = 0;
  for (int n = 0; n < 200; ++n) {
    testgen::Nest nest = gen.nest(n % 10 < 3);
    std::vector<ParamBinding> bindings;
    for (int b = 0; b < 5; ++b) bindings.push_back(gen.binding());
    if (!nest.branch) continue;

    metrics::Region ctx;
    ctx.domain = domain_from_scops(testgen::to_scops(nest));
    for (const auto& l : nest.loops) ctx.loop_indices.push_back(l.index);
    metrics::Region then_r = ctx;
    then_r.domain = intersect_branch(ctx.domain, *nest.branch);
    metrics::Region else_r = ctx;
    else_r.exclusions.push_back({*nest.branch});
    const Rational& f = fractions[rng() % fractions.size()];
    metrics::Region pct_then = metrics::with_transform(ctx, {metrics::Transform::Kind::PctTaken, {}, f});
    metrics::Region pct_else = metrics::with_transform(ctx, {metrics::Transform::Kind::PctNotTaken, {}, f});

    CountExpr total = metrics::multiplier(ctx);
    CountExpr t = metrics::multiplier(then_r), e = metrics::multiplier(else_r);
    CountExpr pt = metrics::multiplier(pct_then), pe = metrics::multiplier(pct_else);
    for (const auto& b : bindings) {
      Int all = testgen::simulate(nest, b, std::nullopt);
      std::string at = "nest " + std::to_string(n);
      expect(total.evaluate(b) == all, at + ": total");
      expect(t.evaluate(b) + e.evaluate(b) == all, at + ": then + else != total");
      expect(e.evaluate(b) == testgen::simulate(nest, b, false), at + ": complement arm");
      Int floor_part = numerator(f) * all / denominator(f);
      expect(pt.evaluate(b) == floor_part, at + ": pct taken is not floor(p * total)");
      expect(pt.evaluate(b) + pe.evaluate(b) == all, at + ": pct arms do not sum to total");
      ++checked;
    }
  }
  expect(checked == 300, "checked " + std::to_string(checked) + " nest/binding pairs");
}

std::string render(const binary::LineTable& t) {
  std::ostringstream ss;
  for (const auto& r : t.rows) {
    ss << "0x" << std::hex << r.address << std::dec << ' ' << r.file << ' ' << r.line << ' ' << r.column << ' '
       << r.is_stmt << ' ' << r.end_sequence << '\n';
  }
  return ss.str();
}

void dwarf_golden() {
  for (const char* stem : {"tiny", "tiny_dwarf4", "tiny_dwarf3"}) {
    std::string got = render(binary::decode_line_program(binary::load_elf(fixture(std::string(stem) + ".elf"))));
    std::string want = read_file(fixture(std::string(stem) + ".lines.golden"));
    expect(got == want, std::string(stem) + ": decoded rows differ from the golden table");
  }
}

// Per-iteration FP instructions of the triad loop body, read from the golden
// line table and the disassembly text without the library's line mapping.
std::int64_t triad_k() {
  std::vector<std::pair<std::uint64_t, unsigned>> rows;
  std::istringstream golden(read_file(fixture("tiny.lines.golden")));
  for (std::string line; std::getline(golden, line);) {
    std::istringstream ls(line);
    std::string addr, file;
    unsigned ln = 0;
    ls >> addr >> file >> ln;
    rows.emplace_back(std::stoull(addr, nullptr, 16), file == "triad.c" ? ln : 0);
  }
  std::sort(rows.begin(), rows.end());
  auto line_of = [&](std::uint64_t a) {
    unsigned ln = 0;
    for (const auto& [addr, l] : rows) {
      if (addr > a) break;
      ln = l;
    }
    return ln;
  };
  static const std::regex insn(R"(^\s*([0-9a-f]+):\t[0-9a-f ]+\t(\S+))");
  static const std::set<std::string> fp = {"addsd", "subsd", "mulsd", "divsd", "addpd", "subpd", "mulpd", "divpd"};
  std::int64_t k = 0;
  std::istringstream dis(read_file(fixture("tiny.dis")));
  for (std::string line; std::getline(dis, line);) {
    std::smatch m;
    if (std::regex_search(line, m, insn) && fp.count(m[2]) && line_of(std::stoull(m[1], nullptr, 16)) == 6) ++k;
  }
  return k;
}

void triad_kn() {
  auto arch = binary::load_archdesc(std::string(STATMODEL_DATA_DIR) + "/x86_64.arch");
  auto out = analyze({{fixture("triad.c")}, fixture("tiny.elf"), fixture("tiny.dis"), true}, arch);
  std::int64_t k = triad_k();
  expect(k == 2, "fixture loop body has " + std::to_string(k) + " FP instructions, expected 2");
  expect(out.model.entry.has_value(), "no entry function");
  for (std::int64_t n : {std::int64_t{10}, std::int64_t{2000000}}) {
    auto r = model::evaluate(out.model, *out.model.entry, {{"N", n}});
    Int fp = 0;
    for (const auto& [cat, v] : r.per_category) {
      if (arch.fp_categories.count(cat)) fp += v;
    }
    expect(fp == Int(k) * n, "N=" + std::to_string(n) + ": FP total " + str(fp));
  }
}

void arithmetic_intensity() {
  auto arch = binary::load_archdesc(std::string(STATMODEL_DATA_DIR) + "/x86_64.arch");
  auto m = model::deserialize(read_file(fixture("cg_solve_model.json")));
  auto ai = model::arithmetic_intensity(model::evaluate(m, "cg_solve_0", {}), arch);
  expect(ai.value == Rational(193, 367), "ratio " + ai.value.str());
  expect(ai.rendered == "0.53", "rendered " + ai.rendered);
}

std::string run_analyze(const std::string& out) {
  std::string cmd = std::string("'") + STATMODEL_CLI + "' analyze --source '" + fixture("fig6.cpp") + "' --elf '" +
                    fixture("fig6.elf") + "' --disasm '" + fixture("fig6.dis") + "' --arch '" + STATMODEL_DATA_DIR +
                    "/x86_64.arch' --reproducible -o '" + out + "' 2>/dev/null";
  int raw = std::system(cmd.c_str());
  expect(WIFEXITED(raw) && WEXITSTATUS(raw) == 0, "analyze failed");
  return read_file(out);
}

void determinism() {
  std::filesystem::create_directories(STATMODEL_SCRATCH_DIR);
  std::string a = run_analyze(std::string(STATMODEL_SCRATCH_DIR) + "/run1.json");
  std::string b = run_analyze(std::string(STATMODEL_SCRATCH_DIR) + "/run2.json");
  expect(!a.empty(), "empty model");
  expect(a == b, "model JSON differs between runs");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
      {"polyhedral oracle suite (200 nests x 5 bindings, < 10 s)", oracle_suite},
      {"reference nest counts 10 / 14 / 8 / complement 6", reference_nest_counts},
      {"branch conservation incl. pct floor/remainder", branch_conservation},
      {"DWARF line table matches golden row for row", dwarf_golden},
      {"triad FP total = k*N at N=10 and N=2e6", triad_kn},
      {"arithmetic intensity 193/367 renders 0.53", arithmetic_intensity},
      {"reproducible analyze is byte-identical", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    try {
      check();
      std::cout << "PASS " << name << "\n";
    } catch (const Failure& f) {
      std::cout << "FAIL " << name << ": " << f.why << "\n";
      ++failed;
    } catch (const std::exception& e) {
      std::cout << "FAIL " << name << ": " << e.what() << "\n";
      ++failed;
    }
  }
  return failed ? 1 : 0;
}
