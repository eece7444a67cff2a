#include "statmodel/binary/line_map.hpp"

#include <algorithm>

namespace statmodel::binary {

std::string path_basename(const std::string& path) {
  auto slash = path.find_last_of("/\\");
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

LineMap map_lines(const LineTable& table, const std::vector<InstructionRecord>& instrs) {
  struct Sequence {
    std::vector<const LineRow*> rows;  // without the end_sequence row
    std::uint64_t end = 0;
  };
  std::vector<Sequence> seqs;
  Sequence cur;
  for (const auto& r : table.rows) {
    if (r.end_sequence) {
      if (!cur.rows.empty()) {
        cur.end = r.address;
        seqs.push_back(std::move(cur));
      }
      cur = {};
    } else {
      cur.rows.push_back(&r);
    }
  }

  LineMap out;
  for (const auto& ins : instrs) {
    const LineRow* hit = nullptr;
    for (const auto& s : seqs) {
      if (ins.address < s.rows.front()->address || ins.address >= s.end) continue;
      auto it = std::upper_bound(s.rows.begin(), s.rows.end(), ins.address,
                                 [](std::uint64_t a, const LineRow* r) { return a < r->address; });
      hit = *(it - 1);
    }
    if (hit) {
      out[LineKey{path_basename(hit->file), hit->line}].push_back({ins, hit->column});
    } else {
      out[kUnattributed].push_back({ins, 0});
    }
  }
  return out;
}

}  // namespace statmodel::binary
