#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace webcp::miner {

struct MatchingBlock {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t size = 0;

  bool operator==(const MatchingBlock&) const = default;
};

/// Ratcliff/Obershelp matching blocks: recursively take the longest common
/// substring (earliest in `a`, then earliest in `b` on ties) and recurse on
/// both sides. No junk heuristics. Blocks are returned in ascending order.
std::vector<MatchingBlock> matching_blocks(std::string_view a, std::string_view b);

/// 2 * matched / (|a| + |b|); 1.0 when both strings are empty.
double fuzzy_ratio(std::string_view a, std::string_view b);

}  // namespace webcp::miner
