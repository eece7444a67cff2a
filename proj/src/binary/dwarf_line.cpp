#include <optional>

#include "bytes.hpp"
#include "statmodel/binary/line_table.hpp"

namespace statmodel::binary {

namespace {

using detail::ByteReader;

// DWARF constants
constexpr std::uint8_t kLnsCopy = 1, kLnsAdvancePc = 2, kLnsAdvanceLine = 3, kLnsSetFile = 4,
                       kLnsSetColumn = 5, kLnsNegateStmt = 6, kLnsSetBasicBlock = 7, kLnsConstAddPc = 8,
                       kLnsFixedAdvancePc = 9, kLnsSetPrologueEnd = 10, kLnsSetEpilogueBegin = 11,
                       kLnsSetIsa = 12;
constexpr std::uint8_t kLneEndSequence = 1, kLneSetAddress = 2, kLneDefineFile = 3,
                       kLneSetDiscriminator = 4;
constexpr std::uint64_t kLnctPath = 1, kLnctDirectoryIndex = 2;
constexpr std::uint64_t kFormBlock = 0x09, kFormData1 = 0x0b, kFormData2 = 0x05, kFormData4 = 0x06,
                        kFormData8 = 0x07, kFormData16 = 0x1e, kFormString = 0x08, kFormStrp = 0x0e,
                        kFormLineStrp = 0x1f, kFormUdata = 0x0f, kFormSdata = 0x0d;

struct FileEntry {
  std::string name;
  std::uint64_t dir = 0;
};

struct Header {
  std::uint16_t version = 0;
  bool dwarf64 = false;
  std::uint8_t address_size = 8;
  std::uint8_t min_inst_length = 1;
  std::uint8_t max_ops = 1;
  bool default_is_stmt = true;
  std::int8_t line_base = 0;
  std::uint8_t line_range = 1;
  std::uint8_t opcode_base = 1;
  std::vector<std::uint8_t> opcode_lengths;
  std::vector<std::string> dirs;
  std::vector<FileEntry> files;
};

// Reads one attribute value of a v5 entry; strings are returned, numbers set
// `number`.
std::optional<std::string> read_form(ByteReader& r, std::uint64_t form, const Header& h,
                                     const DwarfStrings& strings, std::uint64_t& number) {
  const std::size_t offset_size = h.dwarf64 ? 8 : 4;
  switch (form) {
    case kFormString: return r.cstr();
    case kFormLineStrp: return detail::string_at(strings.line_str, r.uint(offset_size));
    case kFormStrp: return detail::string_at(strings.str, r.uint(offset_size));
    case kFormUdata: number = r.uleb(); return std::nullopt;
    case kFormSdata: number = static_cast<std::uint64_t>(r.sleb()); return std::nullopt;
    case kFormData1: number = r.u8(); return std::nullopt;
    case kFormData2: number = r.u16(); return std::nullopt;
    case kFormData4: number = r.u32(); return std::nullopt;
    case kFormData8: number = r.u64(); return std::nullopt;
    case kFormData16: r.skip(16); return std::nullopt;
    case kFormBlock: r.skip(r.uleb()); return std::nullopt;
    default: {
      char buf[16];
      std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(form));
      r.fail(r.offset(), std::string("unsupported attribute form ") + buf + " in line header");
    }
  }
}

template <typename Fn>
void read_entry_list(ByteReader& r, const Header& h, const DwarfStrings& strings, Fn&& on_entry) {
  std::uint8_t format_count = r.u8();
  std::vector<std::pair<std::uint64_t, std::uint64_t>> format;
  for (std::uint8_t i = 0; i < format_count; ++i) {
    std::uint64_t type = r.uleb();
    std::uint64_t form = r.uleb();
    format.emplace_back(type, form);
  }
  std::uint64_t count = r.uleb();
  if (count > r.size()) r.fail(r.offset(), "implausible entry count");
  for (std::uint64_t i = 0; i < count; ++i) {
    FileEntry e;
    for (const auto& [type, form] : format) {
      std::uint64_t number = 0;
      auto s = read_form(r, form, h, strings, number);
      if (type == kLnctPath) {
        if (!s) r.fail(r.offset(), "path attribute is not a string");
        e.name = *s;
      } else if (type == kLnctDirectoryIndex) {
        e.dir = number;
      }
    }
    on_entry(std::move(e));
  }
}

class Unit {
 public:
  Unit(ByteReader& r, std::uint8_t default_address_size, const DwarfStrings& strings, LineTable& out)
      : r_(r), strings_(strings), out_(out) {
    h_.address_size = default_address_size;
  }

  void run() {
    std::size_t unit_start = r_.offset();
    std::uint64_t length = r_.u32();
    if (length == 0xffffffffu) {
      h_.dwarf64 = true;
      length = r_.u64();
    } else if (length >= 0xfffffff0u) {
      r_.fail(unit_start, "reserved unit length");
    }
    std::size_t body = r_.offset();
    if (length > r_.size() - body) r_.fail(unit_start, "unit length exceeds section");
    std::size_t unit_end = body + static_cast<std::size_t>(length);

    h_.version = r_.u16();
    if (h_.version < 3 || h_.version > 5) {
      throw Error(ErrorCode::UnsupportedDwarfVersion,
                  "line program at offset " + std::to_string(unit_start) + " has DWARF version " +
                      std::to_string(h_.version) + "; versions 3 to 5 are supported");
    }
    if (h_.version >= 5) {
      h_.address_size = r_.u8();
      r_.u8();  // segment selector size
    }
    std::uint64_t header_length = r_.uint(h_.dwarf64 ? 8 : 4);
    std::size_t program_start = r_.offset();
    if (header_length > unit_end - program_start) r_.fail(program_start, "header length exceeds unit");
    program_start += static_cast<std::size_t>(header_length);

    h_.min_inst_length = r_.u8();
    if (h_.version >= 4) h_.max_ops = r_.u8();
    if (h_.max_ops == 0) r_.fail(r_.offset() - 1, "maximum_operations_per_instruction is zero");
    h_.default_is_stmt = r_.u8() != 0;
    h_.line_base = r_.s8();
    h_.line_range = r_.u8();
    if (h_.line_range == 0) r_.fail(r_.offset() - 1, "line_range is zero");
    h_.opcode_base = r_.u8();
    if (h_.opcode_base == 0) r_.fail(r_.offset() - 1, "opcode_base is zero");
    for (int i = 1; i < h_.opcode_base; ++i) h_.opcode_lengths.push_back(r_.u8());

    if (h_.version >= 5) {
      read_entry_list(r_, h_, strings_, [this](FileEntry e) { h_.dirs.push_back(e.name); });
      read_entry_list(r_, h_, strings_, [this](FileEntry e) { h_.files.push_back(std::move(e)); });
    } else {
      while (true) {
        std::string d = r_.cstr();
        if (d.empty()) break;
        h_.dirs.push_back(d);
      }
      while (true) {
        FileEntry e;
        e.name = r_.cstr();
        if (e.name.empty()) break;
        e.dir = r_.uleb();
        r_.uleb();
        r_.uleb();
        h_.files.push_back(std::move(e));
      }
    }
    if (r_.offset() > program_start) r_.fail(program_start, "line header overruns header_length");

    r_.seek(program_start);
    execute(unit_end);
    r_.seek(unit_end);
  }

 private:
  void reset() {
    address_ = 0;
    op_index_ = 0;
    file_ = 1;
    line_ = 1;
    column_ = 0;
    is_stmt_ = h_.default_is_stmt;
  }

  void emit(bool end_sequence) {
    LineRow row;
    row.address = address_;
    // v5 file indices are 0-based; earlier versions count from 1.
    std::uint64_t idx = h_.version >= 5 ? file_ : file_ - 1;
    if (file_ == 0 && h_.version < 5) idx = h_.files.size();
    if (idx < h_.files.size()) {
      row.file = h_.files[idx].name;
      std::uint64_t d = h_.files[idx].dir;
      if (h_.version >= 5) {
        if (d < h_.dirs.size()) row.directory = h_.dirs[d];
      } else if (d > 0 && d - 1 < h_.dirs.size()) {
        row.directory = h_.dirs[d - 1];
      }
    } else {
      row.file = "?";
    }
    row.line = line_;
    row.column = column_;
    // The end row addresses the byte past the sequence, not a statement.
    row.is_stmt = is_stmt_ && !end_sequence;
    row.end_sequence = end_sequence;
    out_.rows.push_back(std::move(row));
  }

  void advance(std::uint64_t operation_advance) {
    if (h_.max_ops == 1) {
      address_ += h_.min_inst_length * operation_advance;
    } else {
      std::uint64_t total = op_index_ + operation_advance;
      address_ += h_.min_inst_length * (total / h_.max_ops);
      op_index_ = total % h_.max_ops;
    }
  }

  void execute(std::size_t end) {
    reset();
    while (r_.offset() < end) {
      std::size_t at = r_.offset();
      std::uint8_t op = r_.u8();
      if (op >= h_.opcode_base) {
        std::uint8_t adjusted = op - h_.opcode_base;
        advance(adjusted / h_.line_range);
        line_ = static_cast<unsigned>(static_cast<std::int64_t>(line_) + h_.line_base + adjusted % h_.line_range);
        emit(false);
        continue;
      }
      switch (op) {
        case 0: extended(at, end); break;
        case kLnsCopy: emit(false); break;
        case kLnsAdvancePc: advance(r_.uleb()); break;
        case kLnsAdvanceLine: line_ = static_cast<unsigned>(static_cast<std::int64_t>(line_) + r_.sleb()); break;
        case kLnsSetFile: file_ = r_.uleb(); break;
        case kLnsSetColumn: column_ = static_cast<unsigned>(r_.uleb()); break;
        case kLnsNegateStmt: is_stmt_ = !is_stmt_; break;
        case kLnsSetBasicBlock:
        case kLnsSetPrologueEnd:
        case kLnsSetEpilogueBegin: break;
        case kLnsConstAddPc: advance((255 - h_.opcode_base) / h_.line_range); break;
        case kLnsFixedAdvancePc:
          address_ += r_.u16();
          op_index_ = 0;
          break;
        case kLnsSetIsa: r_.uleb(); break;
        default:
          // Unknown standard opcode: skip its operands as the header describes.
          for (std::uint8_t i = 0; i < h_.opcode_lengths[op - 1]; ++i) r_.uleb();
          break;
      }
      if (r_.offset() > end) r_.fail(at, "opcode runs past end of unit");
    }
  }

  void extended(std::size_t at, std::size_t end) {
    std::uint64_t len = r_.uleb();
    if (len == 0 || len > end - r_.offset()) r_.fail(at, "bad extended opcode length");
    std::size_t next = r_.offset() + static_cast<std::size_t>(len);
    std::uint8_t sub = r_.u8();
    switch (sub) {
      case kLneEndSequence:
        emit(true);
        reset();
        break;
      case kLneSetAddress: {
        std::size_t width = static_cast<std::size_t>(len - 1);
        if (width == 0 || width > 8) r_.fail(at, "bad DW_LNE_set_address operand size");
        address_ = r_.uint(width);
        op_index_ = 0;
        break;
      }
      case kLneDefineFile: {
        FileEntry e;
        e.name = r_.cstr();
        e.dir = r_.uleb();
        r_.uleb();
        r_.uleb();
        h_.files.push_back(std::move(e));
        break;
      }
      case kLneSetDiscriminator: r_.uleb(); break;
      default: break;
    }
    if (r_.offset() > next) r_.fail(at, "extended opcode overruns its length");
    r_.seek(next);
  }

  ByteReader& r_;
  const DwarfStrings& strings_;
  LineTable& out_;
  Header h_;

  std::uint64_t address_ = 0;
  std::uint64_t op_index_ = 0;
  std::uint64_t file_ = 1;
  unsigned line_ = 1;
  unsigned column_ = 0;
  bool is_stmt_ = true;
};

}  // namespace

LineTable decode_line_section(std::span<const std::uint8_t> section, bool big_endian, std::uint8_t address_size,
                              const DwarfStrings& strings) {
  LineTable out;
  ByteReader r(section, big_endian, ErrorCode::CorruptLineProgram);
  while (!r.at_end()) Unit(r, address_size, strings, out).run();
  return out;
}

LineTable decode_line_program(const ElfImage& elf) {
  const Section* line = elf.find(".debug_line");
  if (!line) {
    throw Error(ErrorCode::MissingDebugInfo, elf.path + ": no .debug_line section; rebuild with -g");
  }
  if (line->flags & kShfCompressed) {
    throw Error(ErrorCode::CorruptLineProgram,
                elf.path + ": compressed .debug_line is not supported; rebuild with -gz=none");
  }
  DwarfStrings strings;
  if (const Section* s = elf.find(".debug_line_str")) strings.line_str = s->data;
  if (const Section* s = elf.find(".debug_str")) strings.str = s->data;
  return decode_line_section(line->data, elf.endianness == Endian::Big, elf.is_64bit ? 8 : 4, strings);
}

}  // namespace statmodel::binary
