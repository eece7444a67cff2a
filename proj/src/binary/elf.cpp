#include "statmodel/binary/elf.hpp"

#include <fstream>
#include <iterator>
#include <utility>

#include "bytes.hpp"

namespace statmodel::binary {

const Section* ElfImage::find(std::string_view name) const {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

namespace {

constexpr std::uint32_t kShtNobits = 8;
constexpr std::uint16_t kShnXindex = 0xffff;

[[noreturn]] void not_elf(const std::string& path, const std::string& why) {
  throw Error(ErrorCode::NotAnElf, path + ": " + why);
}

}  // namespace

ElfImage parse_elf(std::span<const std::uint8_t> bytes, std::string path, bool require_debug_line) {
  ElfImage img;
  img.path = std::move(path);
  if (bytes.size() < 16 || bytes[0] != 0x7f || bytes[1] != 'E' || bytes[2] != 'L' || bytes[3] != 'F') {
    not_elf(img.path, "bad ELF magic");
  }
  if (bytes[4] != 1 && bytes[4] != 2) not_elf(img.path, "unknown ELF class");
  if (bytes[5] != 1 && bytes[5] != 2) not_elf(img.path, "unknown ELF data encoding");
  img.is_64bit = bytes[4] == 2;
  img.endianness = bytes[5] == 2 ? Endian::Big : Endian::Little;

  detail::ByteReader r(bytes, img.endianness == Endian::Big, ErrorCode::NotAnElf);
  const std::size_t word = img.is_64bit ? 8 : 4;
  std::uint64_t shoff = 0;
  std::uint16_t shentsize = 0, shnum = 0, shstrndx = 0;
  try {
    r.seek(16);
    r.u16();  // e_type
    img.machine = r.u16();
    r.u32();        // e_version
    r.uint(word);   // e_entry
    r.uint(word);   // e_phoff
    shoff = r.uint(word);
    r.u32();  // e_flags
    r.u16();  // e_ehsize
    r.u16();  // e_phentsize
    r.u16();  // e_phnum
    shentsize = r.u16();
    shnum = r.u16();
    shstrndx = r.u16();
  } catch (const Error&) {
    not_elf(img.path, "truncated ELF header");
  }
  if (shoff == 0) {
    if (require_debug_line) {
      throw Error(ErrorCode::MissingDebugInfo,
                  img.path + ": no section table, so no .debug_line; rebuild with -g");
    }
    return img;
  }

  const std::size_t want_entsize = img.is_64bit ? 64 : 40;
  if (shentsize < want_entsize) not_elf(img.path, "section header entries too small");

  // Returns the section with its name-table offset; names are resolved once
  // the name table itself has been read.
  auto read_header = [&](std::uint64_t index) {
    Section s;
    std::uint64_t off = shoff + index * shentsize;
    if (off > bytes.size() || bytes.size() - off < shentsize) not_elf(img.path, "section table out of range");
    detail::ByteReader h(bytes, img.endianness == Endian::Big, ErrorCode::NotAnElf);
    h.seek(static_cast<std::size_t>(off));
    std::uint32_t name_off = h.u32();
    s.type = h.u32();
    s.flags = h.uint(word);
    s.addr = h.uint(word);
    s.offset = h.uint(word);
    s.size = h.uint(word);
    return std::pair{s, name_off};
  };

  std::uint64_t count = shnum;
  std::uint64_t strndx = shstrndx;
  if (count == 0 || strndx == kShnXindex) {
    // Extended numbering keeps the real values in section 0.
    Section zero = read_header(0).first;
    detail::ByteReader h(bytes, img.endianness == Endian::Big, ErrorCode::NotAnElf);
    h.seek(static_cast<std::size_t>(shoff + (img.is_64bit ? 40 : 24)));
    std::uint32_t link = h.u32();
    if (count == 0) count = zero.size;
    if (strndx == kShnXindex) strndx = link;
  }
  if (count > bytes.size() / want_entsize) not_elf(img.path, "implausible section count");

  std::vector<std::uint32_t> name_offsets;
  for (std::uint64_t i = 0; i < count; ++i) {
    auto [s, name_off] = read_header(i);
    name_offsets.push_back(name_off);
    if (s.type != kShtNobits && s.size > 0) {
      if (s.offset > bytes.size() || bytes.size() - s.offset < s.size) {
        not_elf(img.path, "section " + std::to_string(i) + " extends past end of file");
      }
      s.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(s.offset),
                    bytes.begin() + static_cast<std::ptrdiff_t>(s.offset + s.size));
    }
    img.sections.push_back(std::move(s));
  }
  if (strndx >= img.sections.size()) {
    if (!img.sections.empty()) not_elf(img.path, "section name table index out of range");
  } else {
    const auto& strtab = img.sections[strndx].data;
    for (std::size_t i = 0; i < img.sections.size(); ++i) {
      img.sections[i].name = detail::string_at(strtab, name_offsets[i]);
    }
  }

  if (require_debug_line && !img.find(".debug_line")) {
    throw Error(ErrorCode::MissingDebugInfo,
                img.path + ": no .debug_line section; rebuild the program with -g to keep line information");
  }
  return img;
}

ElfImage load_elf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
  return parse_elf(bytes, path);
}

}  // namespace statmodel::binary
