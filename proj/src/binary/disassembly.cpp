#include "statmodel/binary/disassembly.hpp"

#include <cctype>
#include <charconv>
#include <set>

#include "statmodel/error.hpp"

namespace statmodel::binary {

namespace {

const std::set<std::string, std::less<>> kPrefixes{
    "rep",  "repe",   "repz",   "repne", "repnz", "lock", "bnd", "notrack", "data16", "data32",
    "addr32", "cs",   "ds",     "es",    "fs",    "gs",   "ss",  "rex",     "rex.w",  "rex.b",
    "rex.x", "rex.r", "rex.wb", "rex.wr", "rex.wx", "rex.rb", "rex.rx", "rex.wrb", "rex.wxb", "rex.wrx",
    "rex.xb", "rex.rxb", "rex.wrxb", "xacquire", "xrelease"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<std::uint64_t> parse_hex(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

// Number of bytes in a field like "48 89 e5", or nullopt if it is not one.
std::optional<std::size_t> byte_field(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    if (i + 2 > s.size() || !std::isxdigit(static_cast<unsigned char>(s[i])) ||
        !std::isxdigit(static_cast<unsigned char>(s[i + 1]))) {
      return std::nullopt;
    }
    ++n;
    i += 2;
    if (i < s.size()) {
      if (s[i] != ' ') return std::nullopt;
      ++i;
    }
  }
  return n;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

Disassembly parse_disassembly(std::string_view text) {
  Disassembly out;
  std::optional<std::string> symbol;
  std::uint64_t next_expected = 0;  // address just past the previous instruction
  bool have_next = false;
  std::set<std::uint64_t> seen;
  std::size_t candidates = 0;
  int lineno = 0;

  auto issue = [&](std::string_view line, const std::string& why) {
    out.issues.push_back({lineno, why + ": '" + std::string(trim(line)) + "'"});
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    std::string_view t = trim(line);
    if (t.empty() || t == "...") continue;
    if (t.find("file format") != std::string_view::npos || t.rfind("Disassembly of section", 0) == 0) {
      continue;
    }

    // Symbol header: "0000000000401120 <main>:"
    if (t.back() == ':' && t.find('<') != std::string_view::npos && t[t.size() - 2] == '>') {
      auto sp = t.find(' ');
      auto open = t.find('<');
      if (sp != std::string_view::npos && parse_hex(t.substr(0, sp)) && open > sp) {
        symbol = std::string(t.substr(open + 1, t.size() - open - 3));
        have_next = false;
        continue;
      }
    }

    ++candidates;
    auto colon = t.find(':');
    auto addr = colon == std::string_view::npos ? std::nullopt : parse_hex(t.substr(0, colon));
    if (!addr) {
      issue(line, "not an instruction line");
      continue;
    }
    std::string_view rest = t.substr(colon + 1);
    if (rest.empty() || (rest[0] != '\t' && rest[0] != ' ')) {
      issue(line, "missing tab after address");
      continue;
    }
    // Fields are tab separated: [bytes] \t mnemonic operands
    std::vector<std::string_view> fields;
    std::size_t f = 0;
    rest = rest.substr(1);
    while (true) {
      auto tab = rest.find('\t', f);
      fields.push_back(rest.substr(f, tab == std::string_view::npos ? std::string_view::npos : tab - f));
      if (tab == std::string_view::npos) break;
      f = tab + 1;
    }

    std::string_view insn;
    std::optional<std::size_t> nbytes = byte_field(fields[0]);
    if (nbytes) {
      if (fields.size() < 2 || trim(fields[1]).empty()) {
        // Raw bytes only: the tail of a long instruction, or data.
        if (have_next && *addr == next_expected) {
          --candidates;
          next_expected += *nbytes;
          continue;
        }
        issue(line, "bytes without a mnemonic");
        continue;
      }
      insn = trim(fields[1]);
      for (std::size_t k = 2; k < fields.size(); ++k) {
        // Anything after another tab belongs to the operands.
        insn = std::string_view(insn.data(), static_cast<std::size_t>(fields[k].data() + fields[k].size() - insn.data()));
      }
    } else {
      insn = trim(rest);
    }

    // Split off prefixes and the mnemonic.
    std::string mnemonic;
    std::string_view operands = insn;
    while (true) {
      operands = trim(operands);
      auto sp = operands.find_first_of(" \t");
      std::string word = lower(operands.substr(0, sp));
      operands = sp == std::string_view::npos ? std::string_view{} : operands.substr(sp);
      if (kPrefixes.count(word) && !trim(operands).empty()) continue;
      mnemonic = word;
      break;
    }
    if (mnemonic.empty() || !(std::isalpha(static_cast<unsigned char>(mnemonic[0])) || mnemonic[0] == '(')) {
      issue(line, "no mnemonic");
      continue;
    }
    if (!seen.insert(*addr).second) {
      issue(line, "duplicate address");
      continue;
    }

    InstructionRecord rec;
    rec.address = *addr;
    rec.mnemonic = std::move(mnemonic);
    rec.operands = std::string(trim(operands));
    rec.function_symbol = symbol;
    out.instructions.push_back(std::move(rec));
    have_next = nbytes.has_value();
    if (nbytes) next_expected = *addr + *nbytes;
  }

  if (!out.issues.empty() && out.issues.size() * 10 > candidates) {
    const auto& first = out.issues.front();
    throw Error(ErrorCode::UnparsableLine, std::to_string(out.issues.size()) + " of " + std::to_string(candidates) +
                                               " disassembly lines unparsable; first at line " +
                                               std::to_string(first.line) + ": " + first.text);
  }
  return out;
}

}  // namespace statmodel::binary
