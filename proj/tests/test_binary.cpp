#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "statmodel/binary/archdesc.hpp"
#include "statmodel/binary/disassembly.hpp"
#include "statmodel/binary/elf.hpp"
#include "statmodel/binary/line_map.hpp"
#include "statmodel/binary/line_table.hpp"
#include "statmodel/error.hpp"

#ifndef STATMODEL_FIXTURE_DIR
#define STATMODEL_FIXTURE_DIR "tests/fixtures"
#endif
#ifndef STATMODEL_DATA_DIR
#define STATMODEL_DATA_DIR "data"
#endif

using namespace statmodel;
using namespace statmodel::binary;

namespace {

std::string fixture(const std::string& name) { return std::string(STATMODEL_FIXTURE_DIR) + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing fixture " << path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    if (!l.empty()) out.push_back(l);
  }
  return out;
}

std::string hex(std::uint64_t v) {
  std::ostringstream ss;
  ss << "0x" << std::hex << v;
  return ss.str();
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

const ArchDescription& default_arch() {
  static const ArchDescription arch = load_archdesc(std::string(STATMODEL_DATA_DIR) + "/x86_64.arch");
  return arch;
}

// Byte sink with selectable byte order.
struct Writer {
  std::vector<std::uint8_t> b;
  bool big = false;

  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) {
      int shift = big ? 8 * (n - 1 - i) : 8 * i;
      b.push_back(static_cast<std::uint8_t>(v >> shift));
    }
  }
  void u8(std::uint64_t v) { put(v, 1); }
  void uleb(std::uint64_t v) {
    do {
      std::uint8_t c = v & 0x7f;
      v >>= 7;
      if (v) c |= 0x80;
      b.push_back(c);
    } while (v);
  }
  void sleb(std::int64_t v) {
    bool more = true;
    while (more) {
      std::uint8_t c = v & 0x7f;
      v >>= 7;
      if ((v == 0 && !(c & 0x40)) || (v == -1 && (c & 0x40))) {
        more = false;
      } else {
        c |= 0x80;
      }
      b.push_back(c);
    }
  }
  void str(const std::string& s) {
    b.insert(b.end(), s.begin(), s.end());
    b.push_back(0);
  }
  void patch(std::size_t at, std::uint64_t v, int n) {
    Writer w{{}, big};
    w.put(v, n);
    std::copy(w.b.begin(), w.b.end(), b.begin() + static_cast<std::ptrdiff_t>(at));
  }
};

// Test-only encoder: one DWARF 3/4 unit whose program reproduces `rows`.
// Uses special opcodes where they fit and standard ones otherwise.
std::vector<std::uint8_t> encode_line_unit(const std::vector<LineRow>& rows, const std::vector<std::string>& files,
                                           int version, bool big, int addr_size) {
  constexpr int line_base = -5, line_range = 14, opcode_base = 13;
  Writer w{{}, big};
  w.put(0, 4);  // unit_length, patched below
  w.put(static_cast<std::uint64_t>(version), 2);
  std::size_t hl_at = w.b.size();
  w.put(0, 4);  // header_length
  std::size_t hdr_start = w.b.size();
  w.u8(1);  // minimum_instruction_length
  if (version >= 4) w.u8(1);
  w.u8(1);  // default_is_stmt
  w.u8(static_cast<std::uint8_t>(line_base));
  w.u8(line_range);
  w.u8(opcode_base);
  for (int n : {0, 1, 1, 1, 1, 0, 0, 0, 1, 0, 0, 1}) w.u8(static_cast<std::uint64_t>(n));
  w.u8(0);  // no include directories
  for (const auto& f : files) {
    w.str(f);
    w.uleb(0);
    w.uleb(0);
    w.uleb(0);
  }
  w.u8(0);
  w.patch(hl_at, w.b.size() - hdr_start, 4);

  auto index_of = [&](const std::string& f) {
    return static_cast<std::uint64_t>(std::find(files.begin(), files.end(), f) - files.begin()) + 1;
  };
  bool fresh = true;
  std::uint64_t addr = 0, file = 1;
  std::int64_t line = 1;
  unsigned col = 0;
  bool stmt = true;
  for (const auto& r : rows) {
    if (fresh) {
      w.u8(0);
      w.uleb(static_cast<std::uint64_t>(1 + addr_size));
      w.u8(2);  // DW_LNE_set_address
      w.put(r.address, addr_size);
      addr = r.address;
      fresh = false;
    }
    if (r.end_sequence) {
      if (r.address != addr) {
        w.u8(2);
        w.uleb(r.address - addr);
      }
      w.u8(0);
      w.uleb(1);
      w.u8(1);  // DW_LNE_end_sequence
      fresh = true;
      file = 1;
      line = 1;
      col = 0;
      stmt = true;
      continue;
    }
    if (index_of(r.file) != file) {
      file = index_of(r.file);
      w.u8(4);
      w.uleb(file);
    }
    if (r.column != col) {
      col = r.column;
      w.u8(5);
      w.uleb(col);
    }
    if (r.is_stmt != stmt) {
      stmt = r.is_stmt;
      w.u8(6);
    }
    std::int64_t dl = static_cast<std::int64_t>(r.line) - line;
    std::uint64_t da = r.address - addr;
    std::int64_t special = (dl - line_base) + line_range * static_cast<std::int64_t>(da) + opcode_base;
    if (dl >= line_base && dl < line_base + line_range && special <= 255) {
      w.u8(static_cast<std::uint64_t>(special));
    } else {
      if (da) {
        w.u8(2);
        w.uleb(da);
      }
      if (dl) {
        w.u8(3);
        w.sleb(dl);
      }
      w.u8(1);  // DW_LNS_copy
    }
    addr = r.address;
    line = r.line;
  }
  w.patch(0, w.b.size() - 4, 4);
  return w.b;
}

// Test-only ELF writer: null, .shstrtab, and optionally .debug_line.
std::vector<std::uint8_t> build_elf(bool is64, bool big, const std::vector<std::uint8_t>* debug_line) {
  Writer w{{}, big};
  const int word = is64 ? 8 : 4;
  const std::size_t ehsize = is64 ? 64 : 52, shentsize = is64 ? 64 : 40;
  std::string shstr = std::string("\0.shstrtab\0.debug_line\0", 23);
  const std::uint64_t nsec = debug_line ? 3 : 2;

  for (int c : {0x7f, int('E'), int('L'), int('F')}) w.u8(static_cast<std::uint64_t>(c));
  w.u8(is64 ? 2 : 1);
  w.u8(big ? 2 : 1);
  w.u8(1);
  while (w.b.size() < 16) w.u8(0);
  w.put(1, 2);                          // e_type
  w.put(big ? 2 : (is64 ? 62 : 3), 2);  // e_machine
  w.put(1, 4);
  w.put(0, word);
  w.put(0, word);
  std::size_t shoff_at = w.b.size();
  w.put(0, word);
  w.put(0, 4);
  w.put(ehsize, 2);
  w.put(0, 2);
  w.put(0, 2);
  w.put(shentsize, 2);
  w.put(nsec, 2);
  w.put(1, 2);  // e_shstrndx
  REQUIRE(w.b.size() == ehsize);

  std::size_t str_off = w.b.size();
  w.b.insert(w.b.end(), shstr.begin(), shstr.end());
  std::size_t dl_off = w.b.size();
  if (debug_line) w.b.insert(w.b.end(), debug_line->begin(), debug_line->end());
  std::size_t shoff = w.b.size();
  w.patch(shoff_at, shoff, word);

  auto header = [&](std::uint32_t name, std::uint32_t type, std::uint64_t off, std::uint64_t size) {
    w.put(name, 4);
    w.put(type, 4);
    w.put(0, word);  // flags
    w.put(0, word);  // addr
    w.put(off, word);
    w.put(size, word);
    w.put(0, 4);
    w.put(0, 4);
    w.put(1, word);
    w.put(0, word);
  };
  header(0, 0, 0, 0);
  header(1, 3, str_off, shstr.size());
  if (debug_line) header(11, 1, dl_off, debug_line->size());
  return w.b;
}

std::vector<LineRow> sample_rows() {
  auto row = [](std::uint64_t a, const char* f, unsigned l, unsigned c, bool s, bool e) {
    LineRow r;
    r.address = a;
    r.file = f;
    r.line = l;
    r.column = c;
    r.is_stmt = s;
    r.end_sequence = e;
    return r;
  };
  return {
      row(0x1000, "k.c", 3, 1, true, false),   row(0x1004, "k.c", 4, 12, true, false),
      row(0x1004, "k.c", 4, 3, true, false),   row(0x1010, "k.c", 5, 0, false, false),
      row(0x1400, "k.c", 90, 7, true, false),  row(0x1402, "k.h", 2, 7, true, false),
      row(0x1402, "k.c", 1, 0, true, false),   row(0x1500, "k.c", 1, 0, false, true),
      row(0x2000, "k.h", 40, 2, true, false),  row(0x2001, "k.h", 39, 2, true, false),
      row(0x2002, "k.h", 39, 2, false, true),
  };
}

std::string render(const LineTable& t) {
  std::ostringstream ss;
  for (const auto& r : t.rows) {
    ss << hex(r.address) << ' ' << r.file << ' ' << r.line << ' ' << r.column << ' ' << r.is_stmt << ' '
       << r.end_sequence << '\n';
  }
  return ss.str();
}

std::vector<std::uint8_t> minimal_program(std::uint16_t version) {
  // DWARF 3 unit, file "a.c": set_file 1, set_address 0x1000, advance_line 4,
  // copy, advance_pc 4, end_sequence.
  std::vector<std::uint8_t> header_body = {1, 1, 0xfb, 14, 13, 0, 1, 1, 1, 1, 0, 0, 0, 1, 0, 0, 1,
                                           0, 'a', '.', 'c', 0, 0, 0, 0, 0};
  std::vector<std::uint8_t> program = {0x04, 0x01, 0x00, 0x09, 0x02, 0x00, 0x10, 0, 0, 0, 0, 0, 0,
                                       0x03, 0x04, 0x01, 0x02, 0x04, 0x00, 0x01, 0x01};
  std::uint32_t hl = static_cast<std::uint32_t>(header_body.size());
  std::uint32_t len = 2 + 4 + hl + static_cast<std::uint32_t>(program.size());
  std::vector<std::uint8_t> out = {static_cast<std::uint8_t>(len), 0, 0, 0, static_cast<std::uint8_t>(version), 0,
                                   static_cast<std::uint8_t>(hl), 0, 0, 0};
  out.insert(out.end(), header_body.begin(), header_body.end());
  out.insert(out.end(), program.begin(), program.end());
  return out;
}

}  // namespace

TEST_CASE("tiny.elf loads with text and line sections") {
  ElfImage img = load_elf(fixture("tiny.elf"));
  CHECK(img.is_64bit);
  CHECK(img.endianness == Endian::Little);
  CHECK(img.find(".text") != nullptr);
  REQUIRE(img.find(".debug_line") != nullptr);
  CHECK(!img.find(".debug_line")->data.empty());
}

TEST_CASE("DWARF 5, 4 and 3 decodes match the reference dumps row for row") {
  for (const char* stem : {"tiny", "tiny_dwarf4", "tiny_dwarf3"}) {
    CAPTURE(stem);
    auto got = lines_of(render(decode_line_program(load_elf(fixture(std::string(stem) + ".elf")))));
    auto want = lines_of(slurp(fixture(std::string(stem) + ".lines.golden")));
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CAPTURE(i);
      CHECK(got[i] == want[i]);
    }
  }
}

TEST_CASE("hand-assembled minimal line program") {
  auto bytes = minimal_program(3);
  LineTable t = decode_line_section(bytes, false);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].address == 0x1000);
  CHECK(t.rows[0].file == "a.c");
  CHECK(t.rows[0].line == 5);
  CHECK(t.rows[0].column == 0);
  CHECK(t.rows[0].is_stmt);
  CHECK(!t.rows[0].end_sequence);
  CHECK(t.rows[1].address == 0x1004);
  CHECK(t.rows[1].end_sequence);
}

TEST_CASE("DWARF 2 and unknown versions are rejected") {
  for (std::uint16_t v : {2, 6}) {
    auto bytes = minimal_program(v);
    CHECK(code_of([&] { decode_line_section(bytes, false); }) == ErrorCode::UnsupportedDwarfVersion);
  }
}

TEST_CASE("truncated line program reports corruption with an offset") {
  auto bytes = minimal_program(3);
  bytes.resize(bytes.size() - 5);
  try {
    decode_line_section(bytes, false);
    FAIL("expected CorruptLineProgram");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CorruptLineProgram);
    CHECK(std::string(e.what()).find("0x") != std::string::npos);
  }
}

TEST_CASE("empty .debug_line yields an empty table") {
  std::vector<std::uint8_t> empty;
  CHECK(decode_line_section(empty, false).rows.empty());
  auto elf = build_elf(true, false, &empty);
  CHECK(decode_line_program(parse_elf(elf, "empty.elf")).rows.empty());
}

TEST_CASE("encoder round trip for DWARF 3 and 4, both byte orders and address sizes") {
  const auto rows = sample_rows();
  for (int version : {3, 4}) {
    for (bool big : {false, true}) {
      for (bool is64 : {true, false}) {
        CAPTURE(version);
        CAPTURE(big);
        CAPTURE(is64);
        auto unit = encode_line_unit(rows, {"k.c", "k.h"}, version, big, is64 ? 8 : 4);
        auto elf = build_elf(is64, big, &unit);
        ElfImage img = parse_elf(elf, "synthetic.elf");
        CHECK(img.is_64bit == is64);
        CHECK((img.endianness == Endian::Big) == big);
        LineTable t = decode_line_program(img);
        CHECK(render(t) == render(LineTable{rows}));
      }
    }
  }
}

TEST_CASE("encoder round trip on random row sets") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LineRow> rows;
    std::uint64_t addr = 0x400000 + (rng() % 0x1000);
    int nseq = 1 + static_cast<int>(rng() % 3);
    for (int s = 0; s < nseq; ++s) {
      int n = 1 + static_cast<int>(rng() % 30);
      for (int i = 0; i < n; ++i) {
        LineRow r;
        r.address = addr;
        r.file = rng() % 4 ? "a.c" : "b.h";
        r.line = 1 + static_cast<unsigned>(rng() % 500);
        r.column = static_cast<unsigned>(rng() % 40);
        r.is_stmt = rng() % 5 != 0;
        rows.push_back(r);
        addr += rng() % 3 == 0 ? 0 : rng() % (i % 7 == 0 ? 5000 : 20);
      }
      LineRow end = rows.back();
      end.address = addr + 1 + rng() % 10;
      end.is_stmt = false;
      end.end_sequence = true;
      rows.push_back(end);
      addr = end.address + rng() % 100;
    }
    auto unit = encode_line_unit(rows, {"a.c", "b.h"}, 4, false, 8);
    CHECK(render(decode_line_section(unit, false)) == render(LineTable{rows}));
  }
}

TEST_CASE("ELF rejection paths") {
  auto bytes = slurp(fixture("tiny.elf"));
  std::vector<std::uint8_t> head(bytes.begin(), bytes.begin() + 3);
  CHECK(code_of([&] { parse_elf(head, "t"); }) == ErrorCode::NotAnElf);
  std::vector<std::uint8_t> text = {'#', '!', '/', 'b', 'i', 'n', '/', 's', 'h', '\n', 0, 0, 0, 0, 0, 0, 0, 0};
  CHECK(code_of([&] { parse_elf(text, "t"); }) == ErrorCode::NotAnElf);
  std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + 40);
  CHECK(code_of([&] { parse_elf(cut, "t"); }) == ErrorCode::NotAnElf);

  try {
    load_elf(fixture("tiny_stripped.elf"));
    FAIL("expected MissingDebugInfo");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingDebugInfo);
    CHECK(std::string(e.what()).find("-g") != std::string::npos);
  }
  auto no_debug = build_elf(false, true, nullptr);
  CHECK(code_of([&] { parse_elf(no_debug, "t"); }) == ErrorCode::MissingDebugInfo);
  CHECK(code_of([&] { load_elf(fixture("does_not_exist.elf")); }) == ErrorCode::IoError);
}

TEST_CASE("disassembly record from the objdump format") {
  auto d = parse_disassembly("0000000000401120 <main>:\n  401126:\t48 89 e5\tmov %rsp,%rbp\n");
  REQUIRE(d.instructions.size() == 1);
  const auto& r = d.instructions[0];
  CHECK(r.address == 0x401126);
  CHECK(r.mnemonic == "mov");
  CHECK(r.operands == "%rsp,%rbp");
  CHECK(r.function_symbol == std::optional<std::string>("main"));
  CHECK(d.issues.empty());
}

TEST_CASE("disassembly skips blanks and ellipses") {
  auto d = parse_disassembly("\n\t...\n\n   ...\n");
  CHECK(d.instructions.empty());
  CHECK(d.issues.empty());
}

TEST_CASE("disassembly prefixes, case, continuation bytes and no-raw form") {
  const char* text =
      "\nx:     file format elf64-x86-64\n\nDisassembly of section .text:\n\n"
      "0000000000001000 <f>:\n"
      "    1000:\tf3 48 ab             \trep stos %rax,%es:(%rdi)\n"
      "    1003:\tf0 0f b1 0a          \tLOCK CMPXCHG %ecx,(%rdx)\n"
      "    1007:\t48 b8 00 00 00 00 00 \tmovabs $0x0,%rax\n"
      "    100e:\t00 00 00 \n"
      "    1011:\tc3                   \tret    \n"
      "0000000000001020 <g>:\n"
      "    1020:\tnop\n";
  auto d = parse_disassembly(text);
  CHECK(d.issues.empty());
  REQUIRE(d.instructions.size() == 5);
  CHECK(d.instructions[0].mnemonic == "stos");
  CHECK(d.instructions[1].mnemonic == "cmpxchg");
  CHECK(d.instructions[2].mnemonic == "movabs");
  CHECK(d.instructions[3].mnemonic == "ret");
  CHECK(d.instructions[3].operands.empty());
  CHECK(d.instructions[4].function_symbol == std::optional<std::string>("g"));
}

TEST_CASE("data-in-text lines are issues, and too many are fatal") {
  std::string good = "0000000000001000 <f>:\n";
  for (int i = 0; i < 20; ++i) good += "    " + hex(0x1000 + i).substr(2) + ":\t90\tnop\n";
  auto d = parse_disassembly(good + "    2000:\t00 00 00 00\n");
  CHECK(d.instructions.size() == 20);
  REQUIRE(d.issues.size() == 1);
  CHECK(d.issues[0].line == 22);

  std::string bad = "0000000000001000 <f>:\n    1000:\t90\tnop\n    2000:\t00 00\n    3000:\t00 00\n";
  CHECK(code_of([&] { parse_disassembly(bad); }) == ErrorCode::UnparsableLine);
  CHECK(code_of([&] { parse_disassembly("    1000:\t90\tnop\n    1000:\t90\tnop\n"); }) ==
        ErrorCode::UnparsableLine);
}

TEST_CASE("default archdesc categories") {
  const auto& arch = default_arch();
  CHECK(arch.categories.size() == 7);
  CHECK(categorize("addsd", arch) == "sse2_packed_arithmetic");
  CHECK(categorize("mulsd", arch) == "sse2_packed_arithmetic");
  CHECK(categorize("movsd", arch) == "sse2_data_movement");
  CHECK(categorize("xyzzy", arch) == "misc");
  CHECK(categorize("addss", arch) == "misc");
  CHECK(categorize("add", arch) == "integer_arithmetic");
  CHECK(categorize("addl", arch) == "integer_arithmetic");
  CHECK(categorize("mov", arch) == "integer_data_transfer");
  CHECK(categorize("movzbl", arch) == "integer_data_transfer");
  CHECK(categorize("cmpxchg", arch) == "integer_data_transfer");
  CHECK(categorize("cmpl", arch) == "integer_arithmetic");
  CHECK(categorize("jle", arch) == "integer_control_transfer");
  CHECK(categorize("cltq", arch) == "mode_64bit");
  CHECK(arch.fp_categories == std::set<CategoryId, std::less<>>{"sse2_packed_arithmetic"});
  CHECK(arch.mem_categories == std::set<CategoryId, std::less<>>{"sse2_data_movement"});
  CHECK(arch.machine.at("cores") == 8);
  CHECK(arch.hash.size() == 16);
}

TEST_CASE("exact matches are independent of rule order") {
  ArchDescription arch = default_arch();
  ArchDescription shuffled = arch;
  std::mt19937 rng(3);
  std::vector<std::string> mnemonics;
  for (const auto& r : arch.rules) {
    mnemonics.push_back(r.pattern);
    mnemonics.push_back(r.pattern + "q");
  }
  for (int i = 0; i < 20; ++i) {
    std::shuffle(shuffled.rules.begin(), shuffled.rules.end(), rng);
    // keep the relative order of prefix rules
    std::stable_partition(shuffled.rules.begin(), shuffled.rules.end(),
                          [](const CategoryRule& r) { return r.kind == MatchKind::Exact; });
    std::vector<CategoryRule> prefixes;
    for (const auto& r : arch.rules) {
      if (r.kind == MatchKind::Prefix) prefixes.push_back(r);
    }
    std::copy(prefixes.begin(), prefixes.end(), shuffled.rules.end() - static_cast<std::ptrdiff_t>(prefixes.size()));
    for (const auto& m : mnemonics) CHECK(categorize(m, arch) == categorize(m, shuffled));
  }
  // interleaving exact rules after prefixes never changes their result
  ArchDescription reversed = arch;
  std::reverse(reversed.rules.begin(), reversed.rules.end());
  for (const auto& r : arch.rules) {
    if (r.kind == MatchKind::Exact) CHECK(categorize(r.pattern, reversed) == r.category);
  }
}

TEST_CASE("malformed archdesc files") {
  auto code = [](const std::string& t) { return code_of([&] { parse_archdesc(t); }); };
  CHECK(code("[categories]\nfoo = Foo\n") == ErrorCode::MalformedArchDescription);
  CHECK(code("[categories]\nmisc = M\n[rules]\nexact add = nope\n") == ErrorCode::MalformedArchDescription);
  CHECK(code("[categories]\nmisc = M\n[rules]\nfuzzy add = misc\n") == ErrorCode::MalformedArchDescription);
  CHECK(code("[categories]\nmisc = M\n[machine]\ncores = many\n") == ErrorCode::MalformedArchDescription);
  CHECK(code("[bogus]\n") == ErrorCode::MalformedArchDescription);
  CHECK(code("misc = M\n") == ErrorCode::MalformedArchDescription);
  CHECK(code("[categories]\nmisc = M\n[roles]\nfp = other\n") == ErrorCode::MalformedArchDescription);
  auto ok = parse_archdesc("[categories]\nmisc = M  # trailing comment\n");
  CHECK(ok.display_name("misc") == "M");
  CHECK(ok.hash != parse_archdesc("[categories]\nmisc = M\n").hash);
}

TEST_CASE("interval attribution") {
  LineTable t;
  auto add = [&](std::uint64_t a, unsigned l, bool end) {
    LineRow r;
    r.address = a;
    r.file = "/src/k.c";
    r.line = l;
    r.end_sequence = end;
    t.rows.push_back(r);
  };
  add(0x10, 3, false);
  add(0x20, 4, false);
  add(0x30, 4, true);
  std::vector<InstructionRecord> ins(4);
  ins[0].address = 0x18;
  ins[1].address = 0x08;
  ins[2].address = 0x20;
  ins[3].address = 0x30;
  auto m = map_lines(t, ins);
  REQUIRE(m.count(LineKey{"k.c", 3}));
  CHECK(m.at(LineKey{"k.c", 3}).size() == 1);
  CHECK(m.at(LineKey{"k.c", 3})[0].instr.address == 0x18);
  CHECK(m.at(LineKey{"k.c", 4}).size() == 1);
  CHECK(m.at(kUnattributed).size() == 2);
}

TEST_CASE("tiny.elf attribution matches the reference mapping") {
  auto table = decode_line_program(load_elf(fixture("tiny.elf")));
  auto dis = parse_disassembly(slurp(fixture("tiny.dis")));
  CHECK(dis.issues.empty());
  auto m = map_lines(table, dis.instructions);
  std::map<std::uint64_t, std::string> where;
  std::size_t total = 0;
  for (const auto& [key, list] : m) {
    for (const auto& mi : list) {
      where[mi.instr.address] = key == kUnattributed ? "- 0" : key.file + " " + std::to_string(key.line);
      ++total;
    }
  }
  CHECK(total == dis.instructions.size());
  std::vector<std::string> got;
  for (const auto& ins : dis.instructions) got.push_back(hex(ins.address) + " " + where.at(ins.address));
  auto want = lines_of(slurp(fixture("tiny.map.golden")));
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);
  CHECK(m.count(LineKey{"triad.c", 6}));
}

TEST_CASE("category counts partition each function's instructions") {
  const auto& arch = default_arch();
  for (const char* dis_name : {"tiny.dis", "fig6.dis"}) {
    auto dis = parse_disassembly(slurp(fixture(dis_name)));
    std::map<std::string, std::map<CategoryId, int>> by_fn;
    std::map<std::string, int> totals;
    for (const auto& ins : dis.instructions) {
      std::string fn = ins.function_symbol.value_or("");
      by_fn[fn][categorize(ins.mnemonic, arch)]++;
      totals[fn]++;
    }
    for (const auto& [fn, cats] : by_fn) {
      int sum = 0;
      for (const auto& [c, n] : cats) {
        CHECK(arch.has_category(c));
        sum += n;
      }
      CHECK(sum == totals[fn]);
    }
  }
}

TEST_CASE("triad body holds two double-precision arithmetic instructions") {
  const auto& arch = default_arch();
  auto table = decode_line_program(load_elf(fixture("tiny.elf")));
  auto dis = parse_disassembly(slurp(fixture("tiny.dis")));
  auto m = map_lines(table, dis.instructions);
  int fp = 0;
  for (const auto& mi : m.at(LineKey{"triad.c", 6})) {
    if (arch.fp_categories.count(categorize(mi.instr.mnemonic, arch))) ++fp;
  }
  CHECK(fp == 2);
}
