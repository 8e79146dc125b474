#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "test_support.hpp"
#include "webcp/common/error.hpp"
#include "webcp/common/json_io.hpp"
#include "webcp/common/log.hpp"
#include "webcp/common/philox.hpp"
#include "webcp/common/sha256.hpp"

namespace {

using webcp::Philox4x32;
using webcp::RandomStream;

// Known-answer vectors published with Random123 (kat_vectors, philox4x32_10).
TEST(Philox, KnownAnswerZero) {
  const auto out = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = Philox4x32::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                                     {0xffffffff, 0xffffffff});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
  const auto out = Philox4x32::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                     {0xa4093822, 0x299f31d0});
  EXPECT_EQ(out[0], 0xd16cfe09u);
  EXPECT_EQ(out[1], 0x94fdccebu);
  EXPECT_EQ(out[2], 0x5001e420u);
  EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(RandomStream, SameSeedAndStreamRepeat) {
  RandomStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RandomStream, StreamsDiffer) {
  RandomStream a(42, 7), b(42, 8), c(43, 7);
  int same_b = 0, same_c = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    same_b += x == b.next_u64();
    same_c += x == c.next_u64();
  }
  EXPECT_EQ(same_b, 0);
  EXPECT_EQ(same_c, 0);
}

TEST(RandomStream, UniformMoments) {
  RandomStream rng(1, 0);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(RandomStream, NormalMoments) {
  RandomStream rng(2, 0);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    ASSERT_TRUE(std::isfinite(z));
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.015);
}

TEST(RandomStream, BelowIsUniform) {
  RandomStream rng(3, 0);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = rng.below(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, n / 7, 400);
}

TEST(Sha256, KnownDigests) {
  EXPECT_EQ(webcp::sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(webcp::sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Sha256, FileMatchesString) {
  webcp::testing::TempDir dir;
  webcp::io::write_file(dir / "x.bin", "hello world");
  EXPECT_EQ(webcp::sha256_file(dir / "x.bin"), webcp::sha256_hex("hello world"));
}

TEST(JsonIo, RoundTripAndParents) {
  webcp::testing::TempDir dir;
  const auto path = dir / "a/b/c.json";
  webcp::io::write_json(path, {{"k", 1.5}, {"s", "x"}});
  EXPECT_EQ(webcp::io::read_json(path)["k"], 1.5);
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
}

TEST(JsonIo, JsonlRoundTrip) {
  webcp::testing::TempDir dir;
  std::vector<nlohmann::json> rows{{{"a", 1}}, {{"a", 2}}, {{"a", 3}}};
  webcp::io::write_jsonl(dir / "r.jsonl", rows);
  EXPECT_EQ(webcp::io::read_jsonl(dir / "r.jsonl"), rows);
}

TEST(JsonIo, MalformedReportsOffset) {
  webcp::testing::TempDir dir;
  webcp::io::write_file(dir / "bad.json", "{\"a\": [1, 2,, 3]}");
  try {
    webcp::io::read_json(dir / "bad.json");
    FAIL() << "expected FormatError";
  } catch (const webcp::FormatError& e) {
    EXPECT_GT(e.offset(), 0u);
  }
}

TEST(JsonIo, MissingFile) {
  EXPECT_THROW(webcp::io::read_file("/nonexistent/file"), webcp::Error);
}

TEST(Log, EventsAreJsonLines) {
  std::vector<std::string> lines;
  auto previous = webcp::log::set_sink([&](const std::string& l) { lines.push_back(l); });
  webcp::log::set_min_level(webcp::log::Level::kInfo);
  webcp::log::info("calibrate", "done", {{"gamma", 0.5}});
  webcp::log::event(webcp::log::Level::kDebug, "calibrate", "hidden");
  webcp::log::set_sink(previous);
  ASSERT_EQ(lines.size(), 1u);
  const auto j = nlohmann::json::parse(lines[0]);
  EXPECT_EQ(j["stage"], "calibrate");
  EXPECT_EQ(j["event"], "done");
  EXPECT_EQ(j["gamma"], 0.5);
  EXPECT_TRUE(j.contains("ts_ms"));
}

}  // namespace
