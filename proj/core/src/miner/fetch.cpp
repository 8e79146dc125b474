#include "webcp/miner/fetch.hpp"

#include <algorithm>
#include <cctype>
#include <ctime>

#include "webcp/common/error.hpp"
#include "webcp/common/json_io.hpp"
#include "webcp/miner/url.hpp"

namespace webcp::miner {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// "webcp/0.1 (+...)" -> "webcp"
std::string product_token(std::string_view user_agent) {
  const auto end = user_agent.find_first_of("/ ");
  return lower(user_agent.substr(0, end));
}

FetchResult::Status status_from_name(std::string_view name) {
  if (name == "ok") return FetchResult::Status::kOk;
  if (name == "timeout") return FetchResult::Status::kTimeout;
  if (name == "blocked") return FetchResult::Status::kBlocked;
  if (name == "not_found") return FetchResult::Status::kNotFound;
  return FetchResult::Status::kError;
}

}  // namespace

std::string_view status_name(FetchResult::Status status) {
  switch (status) {
    case FetchResult::Status::kOk: return "ok";
    case FetchResult::Status::kTimeout: return "timeout";
    case FetchResult::Status::kBlocked: return "blocked";
    case FetchResult::Status::kNotFound: return "not_found";
    case FetchResult::Status::kError: return "error";
  }
  return "error";
}

std::string utc_now_iso8601() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RobotsRules RobotsRules::parse(std::string_view text, std::string_view user_agent) {
  const std::string me = product_token(user_agent);
  // Groups: agents -> rules. A specific group for our product token
  // replaces the "*" group.
  std::vector<std::pair<std::string, bool>> star, specific;
  bool have_specific = false;
  std::vector<std::string> agents;
  bool in_rules = false;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    const std::string key = lower(trim(line.substr(0, colon)));
    const std::string value = trim(line.substr(colon + 1));
    if (key == "user-agent") {
      if (in_rules) {
        agents.clear();
        in_rules = false;
      }
      agents.push_back(lower(value));
    } else if (key == "allow" || key == "disallow") {
      in_rules = true;
      if (key == "disallow" && value.empty()) continue;  // "Disallow:" allows all
      for (const auto& a : agents) {
        if (a == "*") star.emplace_back(value, key == "allow");
        if (!me.empty() && a == me) {
          specific.emplace_back(value, key == "allow");
          have_specific = true;
        }
      }
    }
  }
  RobotsRules rules;
  rules.rules_ = have_specific ? std::move(specific) : std::move(star);
  return rules;
}

bool RobotsRules::allowed(std::string_view path) const {
  std::size_t best_len = 0;
  bool verdict = true;
  bool matched = false;
  for (const auto& [prefix, allow] : rules_) {
    if (!path.starts_with(prefix)) continue;
    if (!matched || prefix.size() > best_len || (prefix.size() == best_len && allow)) {
      best_len = prefix.size();
      verdict = allow;
      matched = true;
    }
  }
  return verdict;
}

void HttpFetcher::acquire(const std::string& host) {
  std::unique_lock lock(mutex_);
  slot_freed_.wait(lock, [&] { return in_flight_[host] < policy_.max_in_flight_per_host; });
  ++in_flight_[host];
}

void HttpFetcher::release(const std::string& host) {
  {
    std::lock_guard lock(mutex_);
    --in_flight_[host];
  }
  slot_freed_.notify_all();
}

bool HttpFetcher::robots_allow(const std::string& scheme_host, const std::string& path) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = robots_.find(scheme_host); it != robots_.end()) return it->second.allowed(path);
  }
  RobotsRules rules;
  try {
    http::RequestOptions opts{policy_.timeout, policy_.user_agent, true};
    const auto r = http::get(scheme_host + "/robots.txt", opts);
    if (r.status == 200) rules = RobotsRules::parse(r.body, policy_.user_agent);
  } catch (const TransportError&) {
    // Unreachable robots.txt is treated as "no rules".
  }
  std::lock_guard lock(mutex_);
  return robots_.emplace(scheme_host, std::move(rules)).first->second.allowed(path);
}

FetchResult HttpFetcher::fetch(const std::string& url) {
  FetchResult out;
  out.fetched_at = utc_now_iso8601();
  UrlParts parts;
  if (!split_url(url, parts)) {
    out.status = FetchResult::Status::kError;
    out.detail = "invalid URL";
    return out;
  }
  const std::string origin = parts.scheme + "://" + parts.host;
  if (policy_.respect_robots && !robots_allow(origin, parts.path)) {
    out.status = FetchResult::Status::kBlocked;
    out.detail = "disallowed by robots.txt";
    return out;
  }
  acquire(parts.host);
  try {
    const http::RequestOptions opts{policy_.timeout, policy_.user_agent, true};
    const http::Response r = http::with_retries(
        http::RetryPolicy{policy_.retries, policy_.initial_backoff}, [&] {
          http::Response resp = http::get(url, opts);
          if (resp.status >= 500) {
            throw TransportError("HTTP " + std::to_string(resp.status), true);
          }
          return resp;
        });
    if (r.status == 200) {
      out.status = FetchResult::Status::kOk;
      out.body = r.body;
      out.content_type = r.content_type;
    } else if (r.status == 401 || r.status == 403 || r.status == 429) {
      out.status = FetchResult::Status::kBlocked;
      out.detail = "HTTP " + std::to_string(r.status);
    } else if (r.status == 404 || r.status == 410) {
      out.status = FetchResult::Status::kNotFound;
      out.detail = "HTTP " + std::to_string(r.status);
    } else {
      out.status = FetchResult::Status::kError;
      out.detail = "HTTP " + std::to_string(r.status);
    }
  } catch (const http::TimeoutError& e) {
    out.status = FetchResult::Status::kTimeout;
    out.detail = e.what();
  } catch (const TransportError& e) {
    out.status = FetchResult::Status::kError;
    out.detail = e.what();
  }
  release(parts.host);
  return out;
}

FixtureFetcher::FixtureFetcher(std::filesystem::path dir) : dir_(std::move(dir)) {
  const auto index = io::read_json(dir_ / "fetch_index.json");
  fetched_at_ = index.value("fetched_at", "1970-01-01T00:00:00Z");
  for (const auto& [url, entry] : index.at("resources").items()) {
    Resource r;
    r.file = entry.value("file", "");
    r.status = entry.value("status", r.file.empty() ? "not_found" : "ok");
    r.content_type = entry.value("content_type", "");
    resources_.emplace(url, std::move(r));
  }
}

FetchResult FixtureFetcher::fetch(const std::string& url) {
  FetchResult out;
  out.fetched_at = fetched_at_;
  const auto it = resources_.find(url);
  if (it == resources_.end()) {
    out.status = FetchResult::Status::kNotFound;
    out.detail = "not in fixture index";
    return out;
  }
  out.status = status_from_name(it->second.status);
  out.content_type = it->second.content_type;
  if (out.ok()) {
    try {
      out.body = io::read_file(dir_ / it->second.file);
    } catch (const TransportError& e) {
      out.status = FetchResult::Status::kError;
      out.detail = e.what();
    }
  }
  return out;
}

}  // namespace webcp::miner
