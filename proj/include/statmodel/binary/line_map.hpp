#pragma once

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "statmodel/binary/disassembly.hpp"
#include "statmodel/binary/line_table.hpp"

namespace statmodel::binary {

struct LineKey {
  std::string file;  // basename only
  unsigned line = 0;

  friend auto operator<=>(const LineKey&, const LineKey&) = default;
};

// Key for instructions no sequence covers.
inline const LineKey kUnattributed{"", 0};

struct MappedInstruction {
  InstructionRecord instr;
  unsigned column = 0;
};

using LineMap = std::map<LineKey, std::vector<MappedInstruction>>;

// Each instruction goes to the last row at or below its address within a
// sequence covering it ([first row, end_sequence)). Later sequences win on
// overlap.
LineMap map_lines(const LineTable& table, const std::vector<InstructionRecord>& instrs);

std::string path_basename(const std::string& path);

}  // namespace statmodel::binary
