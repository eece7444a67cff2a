#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace statmodel::binary {

struct InstructionRecord {
  std::uint64_t address = 0;
  std::string mnemonic;  // lowercase, prefixes such as `rep` or `lock` removed
  std::string operands;
  std::optional<std::string> function_symbol;
  std::optional<std::string> category;
};

struct DisassemblyIssue {
  int line = 0;
  std::string text;
};

struct Disassembly {
  std::vector<InstructionRecord> instructions;
  std::vector<DisassemblyIssue> issues;  // lines that could not be parsed
};

// Reads `objdump -d` text (with or without raw bytes). Unparsable lines are
// collected as issues; if they exceed 10% of the candidate lines the whole
// input is rejected with UnparsableLine.
Disassembly parse_disassembly(std::string_view text);

}  // namespace statmodel::binary
