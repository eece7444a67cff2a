#include "statmodel/binary/archdesc.hpp"

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "statmodel/error.hpp"

namespace statmodel::binary {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_id(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

[[noreturn]] void bad(int line, const std::string& msg) {
  throw Error(ErrorCode::MalformedArchDescription, "archdesc line " + std::to_string(line) + ": " + msg);
}

}  // namespace

bool ArchDescription::has_category(std::string_view id) const {
  for (const auto& [cid, name] : categories) {
    if (cid == id) return true;
  }
  return false;
}

std::string ArchDescription::display_name(std::string_view id) const {
  for (const auto& [cid, name] : categories) {
    if (cid == id) return name;
  }
  return std::string(id);
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

ArchDescription parse_archdesc(std::string_view text) {
  ArchDescription arch;
  arch.hash = fnv1a_hex(text);
  std::string section;
  struct PendingRef {
    int line;
    std::string id;
  };
  std::vector<PendingRef> refs;

  int lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') bad(lineno, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "categories" && section != "rules" && section != "machine" && section != "roles") {
        bad(lineno, "unknown section [" + section + "]");
      }
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) bad(lineno, "expected 'key = value'");
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));

    if (section.empty()) {
      bad(lineno, "entry outside any section");
    } else if (section == "categories") {
      if (!valid_id(key)) bad(lineno, "invalid category id '" + std::string(key) + "'");
      if (arch.has_category(key)) bad(lineno, "duplicate category '" + std::string(key) + "'");
      arch.categories.emplace_back(std::string(key), value.empty() ? std::string(key) : std::string(value));
    } else if (section == "rules") {
      auto sp = key.find_first_of(" \t");
      if (sp == std::string_view::npos) bad(lineno, "rule needs 'exact' or 'prefix' and a pattern");
      std::string_view kind = key.substr(0, sp);
      std::string_view pattern = trim(key.substr(sp));
      CategoryRule rule;
      if (kind == "exact") {
        rule.kind = MatchKind::Exact;
      } else if (kind == "prefix") {
        rule.kind = MatchKind::Prefix;
      } else {
        bad(lineno, "unknown match kind '" + std::string(kind) + "'");
      }
      if (pattern.empty() || pattern.find_first_of(" \t") != std::string_view::npos) {
        bad(lineno, "rule pattern must be a single word");
      }
      for (char c : pattern) {
        rule.pattern += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
      rule.category = std::string(value);
      refs.push_back({lineno, rule.category});
      arch.rules.push_back(std::move(rule));
    } else if (section == "machine") {
      double v = 0;
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || p != value.data() + value.size()) {
        bad(lineno, "machine value for '" + std::string(key) + "' is not a number");
      }
      arch.machine[std::string(key)] = v;
    } else {
      std::set<CategoryId, std::less<>>* target = nullptr;
      if (key == "fp") {
        target = &arch.fp_categories;
      } else if (key == "mem") {
        target = &arch.mem_categories;
      } else {
        bad(lineno, "unknown role '" + std::string(key) + "'");
      }
      std::string_view rest = value;
      while (!rest.empty()) {
        auto comma = rest.find(',');
        std::string_view id = trim(rest.substr(0, comma));
        if (!id.empty()) {
          target->insert(std::string(id));
          refs.push_back({lineno, std::string(id)});
        }
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
    }
  }

  for (const auto& r : refs) {
    if (!arch.has_category(r.id)) bad(r.line, "undeclared category '" + r.id + "'");
  }
  if (!arch.has_category(kMiscCategory)) {
    throw Error(ErrorCode::MalformedArchDescription, "archdesc declares no 'misc' category");
  }
  return arch;
}

ArchDescription load_archdesc(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open architecture description '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_archdesc(ss.str());
}

CategoryId categorize(std::string_view mnemonic, const ArchDescription& arch) {
  for (const auto& r : arch.rules) {
    if (r.kind == MatchKind::Exact && r.pattern == mnemonic) return r.category;
  }
  for (const auto& r : arch.rules) {
    if (r.kind == MatchKind::Prefix && mnemonic.substr(0, r.pattern.size()) == r.pattern) return r.category;
  }
  return std::string(kMiscCategory);
}

}  // namespace statmodel::binary
