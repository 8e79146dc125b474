#include <gtest/gtest.h>

#include <set>

#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "webcp/common/error.hpp"
#include "webcp/common/json_io.hpp"
#include "webcp/common/sha256.hpp"
#include "webcp/miner/miner.hpp"

namespace {

using namespace webcp;
using namespace webcp::miner;
using webcp::testing::TempDir;

/// Writes a search + fetch fixture: `n` ranked entries for class `cls`,
/// entries whose rank is in `timeouts` fail with a timeout.
void write_fixture(const std::filesystem::path& dir, const std::string& cls, int n,
                   const std::set<int>& timeouts = {}) {
  nlohmann::json results = nlohmann::json::array();
  const auto index_path = dir / "web" / "fetch_index.json";
  nlohmann::json index = std::filesystem::exists(index_path)
                             ? io::read_json(index_path)
                             : nlohmann::json{{"fetched_at", "2024-05-01T12:00:00Z"},
                                              {"resources", nlohmann::json::object()}};
  auto& resources = index["resources"];
  for (int rank = 1; rank <= n; ++rank) {
    const std::string tag = cls + "_" + std::to_string(rank);
    const std::string image = "https://cdn.x/" + tag + ".jpg";
    const std::string page = "https://site.x/" + tag + ".html";
    results.push_back({{"image_url", image}, {"context_url", page}, {"rank", rank}});
    if (timeouts.contains(rank)) {
      resources[page] = {{"status", "timeout"}};
      continue;
    }
    io::write_file(dir / "web" / (tag + ".html"),
                   "<p>First about " + cls + ". Second line.</p><img src=\"" + tag +
                       ".jpg\" alt=\"" + cls + " photo\"><p>After it.</p>");
    io::write_file(dir / "web" / (tag + ".jpg"), "jpeg bytes " + tag);
    resources[page] = {{"file", tag + ".html"}};
    resources[image] = {{"file", tag + ".jpg"}};
  }
  io::write_file(dir / "search" / (cls + ".json"), results.dump());
  io::write_json(dir / "web" / "fetch_index.json", index);
}

CorpusManifest mine(const std::filesystem::path& fixture, const std::filesystem::path& out,
                    std::vector<ClassLabel> classes, std::size_t k, std::size_t depth = 0,
                    std::size_t in_flight = 8) {
  MineOptions opt;
  opt.classes = std::move(classes);
  opt.per_class = k;
  opt.search_depth = depth;
  opt.max_in_flight = in_flight;
  FixtureSearchProvider search(fixture / "search");
  FixtureFetcher fetch(fixture / "web");
  return mine_corpus(opt, search, fetch, out);
}

std::string corpus_digest(const std::filesystem::path& dir) {
  return sha256_hex(io::read_file(dir / "manifest.json")) +
         sha256_hex(io::read_file(dir / "metadata.jsonl"));
}

class MinerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::filesystem::create_directories(fixture_ / "search");
    std::filesystem::create_directories(fixture_ / "web");
  }
  TempDir fixture_{"webcp-mine-fixture"};
  TempDir out_{"webcp-mine-out"};
};

TEST_F(MinerTest, StopsAtK) {
  write_fixture(fixture_.path(), "cat", 60);
  const auto m = mine(fixture_.path(), out_.path(), {{"cat", "cat"}}, 50, 60);
  EXPECT_EQ(m.examples.size(), 50u);
  EXPECT_EQ(m.stats.at("cat").accepted, 50u);
  EXPECT_EQ(m.examples.front().example_id, "cat-0001");
  EXPECT_EQ(m.examples.back().example_id, "cat-0050");
}

TEST_F(MinerTest, TimeoutsSkippedAndCounted) {
  std::set<int> timeouts;
  for (int r = 3; r <= 57; r += 6) timeouts.insert(r);
  ASSERT_EQ(timeouts.size(), 10u);
  write_fixture(fixture_.path(), "cat", 60, timeouts);
  const auto m = mine(fixture_.path(), out_.path(), {{"cat", "cat"}}, 50, 60);
  EXPECT_EQ(m.stats.at("cat").accepted, 50u);
  EXPECT_EQ(m.stats.at("cat").skipped.at("timeout"), 10u);
  for (const auto& e : m.examples) {
    const int rank = std::stoi(e.example_id.substr(4));
    EXPECT_FALSE(timeouts.contains(rank)) << e.example_id;
  }
}

TEST_F(MinerTest, EmptyClassWarnsAndOthersProceed) {
  write_fixture(fixture_.path(), "cat", 5);
  io::write_file(fixture_ / "search/dog.json", "[]");
  const auto m = mine(fixture_.path(), out_.path(), {{"cat", "cat"}, {"dog", "dog"}}, 3);
  EXPECT_EQ(m.stats.at("cat").accepted, 3u);
  EXPECT_EQ(m.stats.at("dog").accepted, 0u);
  ASSERT_EQ(m.warnings.size(), 1u);
  EXPECT_NE(m.warnings[0].find("dog"), std::string::npos);
}

TEST_F(MinerTest, DeterministicAcrossConcurrency) {
  std::set<int> timeouts{2, 9, 17};
  write_fixture(fixture_.path(), "cat", 30, timeouts);
  write_fixture(fixture_.path(), "dog", 30);
  std::string first;
  for (std::size_t in_flight : {1u, 4u, 16u}) {
    TempDir out;
    const auto m = mine(fixture_.path(), out.path(), {{"cat", "cat"}, {"dog", "dog"}}, 20, 0,
                        in_flight);
    write_corpus(m, out.path());
    const std::string digest = corpus_digest(out.path());
    if (first.empty()) first = digest;
    EXPECT_EQ(digest, first) << "in_flight=" << in_flight;
  }
}

TEST_F(MinerTest, CorpusRoundTripAndChecks) {
  write_fixture(fixture_.path(), "cat", 8);
  const auto m = mine(fixture_.path(), out_.path(), {{"cat", "cat"}}, 5);
  write_corpus(m, out_.path());
  const auto loaded = load_corpus(out_.path());
  EXPECT_EQ(nlohmann::json(loaded), nlohmann::json(m));
  EXPECT_TRUE(check_corpus(loaded, out_.path()).empty());

  auto broken = loaded;
  broken.examples.push_back(broken.examples.front());
  broken.examples.back().alt_text.clear();
  broken.examples.back().pre_text.clear();
  broken.examples.back().post_text.clear();
  broken.examples.back().image_bytes_path = "images/none.jpg";
  const auto problems = check_corpus(broken, out_.path());
  EXPECT_EQ(problems.size(), 4u);  // duplicate id, no context, missing image, exceeds K
}

TEST_F(MinerTest, InvalidInputsRejected) {
  write_fixture(fixture_.path(), "cat", 3);
  EXPECT_THROW(mine(fixture_.path(), out_.path(), {{"cat", "cat"}}, 0), DomainError);
  EXPECT_THROW(mine(fixture_.path(), out_.path(), {{"cat", "cat"}, {"cat", "x"}}, 1), ConfigError);
}

TEST(MinerFixture, Web3Bounds) {
  const auto fx = webcp::testing::fixture_dir() / "web3";
  TempDir out;
  MineOptions opt;
  opt.classes = load_classes(fx / "classes.json");
  opt.per_class = 10;
  FixtureSearchProvider search(fx / "search");
  FixtureFetcher fetch(fx / "web");
  const auto m = mine_corpus(opt, search, fetch, out.path());
  write_corpus(m, out.path());
  EXPECT_TRUE(check_corpus(m, out.path()).empty());
  for (const auto& c : opt.classes) {
    const auto& s = m.stats.at(c.id);
    EXPECT_EQ(s.accepted, 10u) << c.id;
    EXPECT_EQ(s.skipped.at("timeout"), 1u);
    EXPECT_EQ(s.skipped.at("lazy_load"), 1u);
    EXPECT_EQ(s.skipped.at("no_match"), 1u);
    EXPECT_EQ(s.skipped.at("not_found"), 1u);
  }
  std::set<std::string> ids;
  for (const auto& e : m.examples) {
    ids.insert(e.example_id);
    EXPECT_LE(count_tokens(e.pre_text), kMaxContextTokens);
    EXPECT_LE(count_tokens(e.post_text), kMaxContextTokens);
    EXPECT_LE(stored_sentences(e.post_text).size(), kMaxContextSentences);
    EXPECT_EQ(e.fetched_at, "2024-05-01T12:00:00Z");
  }
  EXPECT_EQ(ids.size(), m.examples.size());
  const auto find = [&](const std::string& id) {
    for (const auto& e : m.examples) {
      if (e.example_id == id) return e;
    }
    ADD_FAILURE() << id;
    return MinedExample{};
  };
  EXPECT_EQ(count_tokens(find("melanoma-0004").pre_text), 256u);
  EXPECT_EQ(find("acne-0005").alt_text, "");
  EXPECT_EQ(stored_sentences(find("psoriasis-0006").post_text).size(), 10u);
}

}  // namespace
