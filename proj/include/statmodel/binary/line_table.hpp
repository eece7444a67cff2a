#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "statmodel/binary/elf.hpp"

namespace statmodel::binary {

struct LineRow {
  std::uint64_t address = 0;
  std::string file;       // file name as recorded in the line program header
  std::string directory;  // its include directory, possibly empty
  unsigned line = 0;
  unsigned column = 0;
  bool is_stmt = false;
  bool end_sequence = false;

  friend bool operator==(const LineRow&, const LineRow&) = default;
};

struct LineTable {
  std::vector<LineRow> rows;
};

// String sections a DWARF 5 line header may refer to.
struct DwarfStrings {
  std::span<const std::uint8_t> line_str;  // .debug_line_str
  std::span<const std::uint8_t> str;       // .debug_str
};

// Runs every line-number program in a .debug_line section. Throws
// UnsupportedDwarfVersion for versions outside 3..5 and CorruptLineProgram
// (with the section offset) on malformed input.
LineTable decode_line_section(std::span<const std::uint8_t> section, bool big_endian,
                              std::uint8_t address_size = 8, const DwarfStrings& strings = {});

LineTable decode_line_program(const ElfImage& elf);

}  // namespace statmodel::binary
