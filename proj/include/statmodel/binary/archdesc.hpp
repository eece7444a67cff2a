#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace statmodel::binary {

using CategoryId = std::string;

enum class MatchKind { Exact, Prefix };

struct CategoryRule {
  MatchKind kind = MatchKind::Exact;
  std::string pattern;
  CategoryId category;
};

struct ArchDescription {
  std::vector<std::pair<CategoryId, std::string>> categories;  // id, display name
  std::vector<CategoryRule> rules;
  std::map<std::string, double, std::less<>> machine;
  std::set<CategoryId, std::less<>> fp_categories;
  std::set<CategoryId, std::less<>> mem_categories;
  std::string hash;  // FNV-1a 64 of the file bytes, lowercase hex

  bool has_category(std::string_view id) const;
  std::string display_name(std::string_view id) const;
};

inline constexpr std::string_view kMiscCategory = "misc";

// Format:
//   [categories]   id = Display name
//   [rules]        exact|prefix <mnemonic> = <category id>
//   [machine]      key = number
//   [roles]        fp = id, id ...   /   mem = id, ...
// '#' starts a comment. Throws MalformedArchDescription with the line number.
ArchDescription parse_archdesc(std::string_view text);
ArchDescription load_archdesc(const std::string& path);

// Exact rules win over prefix rules; prefix rules are tried in file order.
// Unmatched mnemonics fall into misc.
CategoryId categorize(std::string_view mnemonic, const ArchDescription& arch);

std::string fnv1a_hex(std::string_view bytes);

}  // namespace statmodel::binary
