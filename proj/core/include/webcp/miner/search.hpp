#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "webcp/common/http.hpp"
#include "webcp/miner/types.hpp"

namespace webcp::miner {

/// Source of ranked image search results.
class SearchProvider {
 public:
  virtual ~SearchProvider() = default;

  /// Raw provider output, possibly unordered or with duplicates.
  virtual std::vector<SearchEntry> query(const ClassLabel& label, const std::string& query,
                                         std::size_t want) = 0;
};

/// GET <endpoint>?q=<query>&n=<want>, expecting a JSON array of
/// {"image_url", "context_url", "rank"}. 401/403/429 are terminal denials.
class HttpSearchProvider final : public SearchProvider {
 public:
  explicit HttpSearchProvider(std::string endpoint, http::RequestOptions options = {},
                              http::RetryPolicy retry = {})
      : endpoint_(std::move(endpoint)), options_(std::move(options)), retry_(retry) {}

  std::vector<SearchEntry> query(const ClassLabel& label, const std::string& query,
                                 std::size_t want) override;

 private:
  std::string endpoint_;
  http::RequestOptions options_;
  http::RetryPolicy retry_;
};

/// Reads `<dir>/<class id>.json` holding the same JSON array the HTTP
/// provider returns. A missing file means no results; a JSON object with an
/// "error" key simulates a denial.
class FixtureSearchProvider final : public SearchProvider {
 public:
  explicit FixtureSearchProvider(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::vector<SearchEntry> query(const ClassLabel& label, const std::string& query,
                                 std::size_t want) override;

 private:
  std::filesystem::path dir_;
};

/// http(s) URLs select the HTTP provider, anything else is a fixture directory.
std::unique_ptr<SearchProvider> make_search_provider(const std::string& spec);

/// Drops malformed entries, orders by rank, removes duplicate image URLs
/// (lowest rank wins) and truncates to `want`.
std::vector<SearchEntry> normalize_results(std::vector<SearchEntry> raw, std::size_t want);

/// Fills the template for `label`, queries `provider` and normalises.
std::vector<SearchEntry> search_images(SearchProvider& provider, const ClassLabel& label,
                                       const std::string& query_template, std::size_t want);

std::vector<SearchEntry> parse_search_results(const std::string& json_text);

}  // namespace webcp::miner
