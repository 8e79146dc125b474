#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "webcp/common/http.hpp"

namespace webcp::miner {

struct FetchResult {
  enum class Status { kOk, kTimeout, kBlocked, kNotFound, kError };

  Status status = Status::kError;
  std::string body;
  std::string content_type;
  std::string fetched_at;  // ISO-8601 UTC
  std::string detail;

  bool ok() const noexcept { return status == Status::kOk; }
};

std::string_view status_name(FetchResult::Status status);

class PageFetcher {
 public:
  virtual ~PageFetcher() = default;

  /// Never throws for per-URL failures; they are reported in the status.
  virtual FetchResult fetch(const std::string& url) = 0;
};

struct FetchPolicy {
  std::chrono::milliseconds timeout{15000};
  int retries = 2;
  std::chrono::milliseconds initial_backoff{500};
  std::string user_agent = "webcp/0.1 (+calibration corpus miner)";
  bool respect_robots = true;
  std::size_t max_in_flight_per_host = 2;
};

/// robots.txt rules for one user agent: longest matching prefix wins,
/// Allow wins ties.
class RobotsRules {
 public:
  static RobotsRules parse(std::string_view text, std::string_view user_agent);

  bool allowed(std::string_view path) const;

 private:
  std::vector<std::pair<std::string, bool>> rules_;  // prefix, allow
};

class HttpFetcher final : public PageFetcher {
 public:
  explicit HttpFetcher(FetchPolicy policy = {}) : policy_(std::move(policy)) {}

  FetchResult fetch(const std::string& url) override;

 private:
  bool robots_allow(const std::string& scheme_host, const std::string& path);
  void acquire(const std::string& host);
  void release(const std::string& host);

  FetchPolicy policy_;
  std::mutex mutex_;
  std::condition_variable slot_freed_;
  std::map<std::string, std::size_t> in_flight_;
  std::map<std::string, RobotsRules> robots_;
};

/// Serves URLs from `<dir>/fetch_index.json`:
///   {"fetched_at": "...", "resources": {url: {"file": "..."} | {"status": "timeout"}}}
/// Unknown URLs are reported as not found.
class FixtureFetcher final : public PageFetcher {
 public:
  explicit FixtureFetcher(std::filesystem::path dir);

  FetchResult fetch(const std::string& url) override;

 private:
  struct Resource {
    std::string file;
    std::string status;
    std::string content_type;
  };

  std::filesystem::path dir_;
  std::string fetched_at_;
  std::map<std::string, Resource> resources_;
};

std::string utc_now_iso8601();

}  // namespace webcp::miner
