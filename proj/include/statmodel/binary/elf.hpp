#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace statmodel::binary {

enum class Endian { Little, Big };

struct Section {
  std::string name;
  std::uint32_t type = 0;
  std::uint64_t flags = 0;
  std::uint64_t addr = 0;
  std::uint64_t offset = 0;
  std::uint64_t size = 0;
  std::vector<std::uint8_t> data;  // empty for SHT_NOBITS
};

struct ElfImage {
  std::string path;
  bool is_64bit = true;
  Endian endianness = Endian::Little;
  std::uint16_t machine = 0;
  std::vector<Section> sections;

  const Section* find(std::string_view name) const;
};

inline constexpr std::uint64_t kShfCompressed = 0x800;

// Parses the ELF header and section table. Throws NotAnElf on bad magic or a
// truncated/inconsistent header, and MissingDebugInfo when `require_debug_line`
// is set and the image has no .debug_line section.
ElfImage parse_elf(std::span<const std::uint8_t> bytes, std::string path, bool require_debug_line = true);

// Reads the file and calls parse_elf. Throws IoError when unreadable.
ElfImage load_elf(const std::string& path);

}  // namespace statmodel::binary
