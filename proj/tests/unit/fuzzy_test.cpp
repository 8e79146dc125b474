#include <gtest/gtest.h>

#include <string>
#include <tuple>

#include "test_support.hpp"
#include "webcp/common/philox.hpp"
#include "webcp/miner/fuzzy.hpp"

namespace {

using webcp::miner::fuzzy_ratio;
using webcp::miner::matching_blocks;
using webcp::miner::MatchingBlock;

// Values from Python's difflib.SequenceMatcher(None, a, b, autojunk=False).
TEST(FuzzyRatio, MatchesDifflib) {
  const std::tuple<const char*, const char*, double> cases[] = {
      {"photo_01.jpg", "photo_02.jpg", 0.9166666666666666},
      {"diagram.png", "photo_01.jpg", 0.08695652173913043},
      {"abc", "xyz", 0.0},
      {"img_melanoma_01.jpg", "img_melanoma_01.jpg", 1.0},
      {"abxcd", "abcd", 0.8888888888888888},
      {"aaaa", "aa", 0.6666666666666666},
      {"banana", "ananas", 0.8333333333333334},
      {"qabxcdq", "abycdf", 0.6153846153846154},
      {"skin-lesion-large.jpeg", "skin_lesion_small.jpeg", 0.7272727272727273},
      {"", "abc", 0.0},
      {"a", "", 0.0},
  };
  for (const auto& [a, b, expected] : cases) {
    EXPECT_EQ(fuzzy_ratio(a, b), expected) << a << " vs " << b;
  }
}

TEST(FuzzyRatio, BothEmptyIsOne) { EXPECT_EQ(fuzzy_ratio("", ""), 1.0); }

TEST(FuzzyRatio, Symmetric) {
  EXPECT_EQ(fuzzy_ratio("photo_01.jpg", "photo_02.jpg"), fuzzy_ratio("photo_02.jpg", "photo_01.jpg"));
}

TEST(MatchingBlocks, DifflibBlocks) {
  EXPECT_EQ(matching_blocks("qabxcdq", "abycdf"),
            (std::vector<MatchingBlock>{{1, 0, 2}, {4, 3, 2}}));
  EXPECT_EQ(matching_blocks("banana", "ananas"), (std::vector<MatchingBlock>{{1, 0, 5}}));
  EXPECT_EQ(matching_blocks("skin-lesion-large.jpeg", "skin_lesion_small.jpeg"),
            (std::vector<MatchingBlock>{{0, 0, 4}, {5, 5, 6}, {12, 15, 1}, {17, 17, 5}}));
  EXPECT_TRUE(matching_blocks("abc", "xyz").empty());
}

TEST(MatchingBlocks, EarliestLongestWins) {
  // "ab" occurs twice in a; the earliest occurrence is taken.
  EXPECT_EQ(matching_blocks("abab", "ab"), (std::vector<MatchingBlock>{{0, 0, 2}}));
}

std::string random_string(webcp::RandomStream& rng, std::size_t max_len, std::size_t alphabet) {
  const std::size_t len = rng.below(max_len + 1);
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s.push_back(static_cast<char>('a' + rng.below(alphabet)));
  return s;
}

TEST(FuzzyRatio, AgreesWithBruteForceOn1000Pairs) {
  webcp::RandomStream rng(2024, 0);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t alphabet = 2 + rng.below(6);
    const auto a = random_string(rng, 24, alphabet);
    const auto b = random_string(rng, 24, alphabet);
    ASSERT_EQ(fuzzy_ratio(a, b), webcp::testing::reference_ratio(a, b)) << a << " / " << b;
  }
}

TEST(MatchingBlocks, BlocksAreOrderedDisjointAndEqual) {
  webcp::RandomStream rng(7, 0);
  for (int i = 0; i < 300; ++i) {
    const auto a = random_string(rng, 30, 3);
    const auto b = random_string(rng, 30, 3);
    const auto blocks = matching_blocks(a, b);
    std::size_t a_end = 0, b_end = 0;
    for (const auto& m : blocks) {
      ASSERT_GT(m.size, 0u);
      ASSERT_GE(m.a, a_end);
      ASSERT_GE(m.b, b_end);
      ASSERT_EQ(a.substr(m.a, m.size), b.substr(m.b, m.size));
      a_end = m.a + m.size;
      b_end = m.b + m.size;
    }
  }
}

}  // namespace
