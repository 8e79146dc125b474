#include "webcp/miner/fuzzy.hpp"

#include <algorithm>
#include <tuple>

namespace webcp::miner {
namespace {

// Longest common substring of a[alo,ahi) and b[blo,bhi). Scans rows of `a` in
// order and only replaces the best on a strictly longer run, which yields the
// block starting earliest in a, then earliest in b.
MatchingBlock longest_match(std::string_view a, std::string_view b, std::size_t alo,
                            std::size_t ahi, std::size_t blo, std::size_t bhi) {
  MatchingBlock best{alo, blo, 0};
  const std::size_t width = bhi - blo;
  std::vector<std::size_t> prev(width + 1, 0), cur(width + 1, 0);
  for (std::size_t i = alo; i < ahi; ++i) {
    for (std::size_t j = blo; j < bhi; ++j) {
      const std::size_t col = j - blo + 1;
      if (a[i] == b[j]) {
        const std::size_t k = prev[col - 1] + 1;
        cur[col] = k;
        if (k > best.size) best = {i + 1 - k, j + 1 - k, k};
      } else {
        cur[col] = 0;
      }
    }
    std::swap(prev, cur);
  }
  return best;
}

}  // namespace

std::vector<MatchingBlock> matching_blocks(std::string_view a, std::string_view b) {
  std::vector<MatchingBlock> blocks;
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> pending{
      {0, a.size(), 0, b.size()}};
  while (!pending.empty()) {
    const auto [alo, ahi, blo, bhi] = pending.back();
    pending.pop_back();
    if (alo >= ahi || blo >= bhi) continue;
    const MatchingBlock m = longest_match(a, b, alo, ahi, blo, bhi);
    if (m.size == 0) continue;
    blocks.push_back(m);
    pending.emplace_back(alo, m.a, blo, m.b);
    pending.emplace_back(m.a + m.size, ahi, m.b + m.size, bhi);
  }
  std::sort(blocks.begin(), blocks.end(),
            [](const MatchingBlock& x, const MatchingBlock& y) { return x.a < y.a; });
  return blocks;
}

double fuzzy_ratio(std::string_view a, std::string_view b) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 1.0;
  std::size_t matched = 0;
  for (const auto& m : matching_blocks(a, b)) matched += m.size;
  return 2.0 * static_cast<double>(matched) / static_cast<double>(total);
}

}  // namespace webcp::miner
