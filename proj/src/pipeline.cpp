#include "statmodel/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "statmodel/binary/elf.hpp"
#include "statmodel/binary/line_map.hpp"
#include "statmodel/binary/line_table.hpp"
#include "statmodel/error.hpp"

namespace statmodel {

namespace {

std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
  return s.str();
}

AnalyzeOutput analyze(const AnalyzeInputs& in, const binary::ArchDescription& arch) {
  std::vector<frontend::SourceUnit> units;
  model::ModelMeta meta;
  for (const auto& path : in.sources) {
    units.push_back(frontend::parse_source(read_file(path), binary::path_basename(path)));
    metrics::collect_bottom_up(units.back());
    meta.sources.push_back(binary::path_basename(path));
  }
  meta.created = in.reproducible ? kReproducibleTimestamp : utc_now();

  auto table = binary::decode_line_program(binary::load_elf(in.elf));
  auto dis = binary::parse_disassembly(read_file(in.disassembly));
  auto map = binary::map_lines(table, dis.instructions);
  auto td = metrics::generate_top_down(units, map, arch);

  AnalyzeOutput out;
  out.model = model::build_model(std::move(td.functions), arch, std::move(meta));
  out.findings = std::move(td.findings);
  out.issues = std::move(dis.issues);
  return out;
}

}  // namespace statmodel
