#pragma once

#include <string>
#include <vector>

#include "statmodel/binary/archdesc.hpp"
#include "statmodel/binary/disassembly.hpp"
#include "statmodel/metrics/metrics.hpp"
#include "statmodel/model/model.hpp"

namespace statmodel {

struct AnalyzeInputs {
  std::vector<std::string> sources;
  std::string elf;
  std::string disassembly;
  bool reproducible = false;
};

struct AnalyzeOutput {
  model::Model model;
  std::vector<metrics::Finding> findings;
  std::vector<binary::DisassemblyIssue> issues;
};

// Sources + binary -> model. Throws the first module error.
AnalyzeOutput analyze(const AnalyzeInputs& in, const binary::ArchDescription& arch);

// Whole file contents; throws IoError.
std::string read_file(const std::string& path);

// Timestamp written to meta.created under --reproducible.
inline constexpr const char* kReproducibleTimestamp = "1970-01-01T00:00:00Z";

}  // namespace statmodel
