#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <thread>

#include "webcp/common/error.hpp"

namespace webcp::http {

struct Response {
  int status = 0;
  std::string body;
  std::string content_type;
};

struct RequestOptions {
  std::chrono::milliseconds timeout{15000};
  std::string user_agent = "webcp/0.1 (+calibration corpus miner)";
  bool follow_redirects = true;
};

/// Raised when the connection or read timed out.
class TimeoutError : public TransportError {
 public:
  explicit TimeoutError(const std::string& what) : TransportError(what, true) {}
};

/// Throws TransportError (retriable) when no response was received. HTTP
/// error statuses are returned, not thrown.
Response get(const std::string& url, const RequestOptions& options = {});

Response post_json(const std::string& url, const std::string& body,
                   const RequestOptions& options = {});

struct RetryPolicy {
  int retries = 2;
  std::chrono::milliseconds initial_backoff{500};
};

/// Runs `fn`, retrying retriable TransportErrors with exponential backoff.
template <typename Fn>
auto with_retries(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
  auto backoff = policy.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      return fn();
    } catch (const TransportError& e) {
      if (!e.retriable() || attempt >= policy.retries) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

}  // namespace webcp::http
