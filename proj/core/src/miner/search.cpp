#include "webcp/miner/search.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "webcp/common/error.hpp"
#include "webcp/common/json_io.hpp"
#include "webcp/common/log.hpp"
#include "webcp/miner/url.hpp"

namespace webcp::miner {
namespace {

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

}  // namespace

std::vector<SearchEntry> parse_search_results(const std::string& json_text) {
  const auto doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) {
    throw FormatError("search results must be a JSON array", 0);
  }
  std::vector<SearchEntry> out;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("image_url") || !item.contains("context_url") ||
        !item.contains("rank") || !item["image_url"].is_string() ||
        !item["context_url"].is_string() || !item["rank"].is_number_integer()) {
      log::warn("mine", "search_entry_malformed", {{"entry", item}});
      continue;
    }
    out.push_back(item.get<SearchEntry>());
  }
  return out;
}

std::vector<SearchEntry> HttpSearchProvider::query(const ClassLabel& label,
                                                   const std::string& query, std::size_t want) {
  const char sep = endpoint_.find('?') == std::string::npos ? '?' : '&';
  const std::string url =
      endpoint_ + sep + "q=" + url_encode(query) + "&n=" + std::to_string(want);
  const http::Response r = http::with_retries(retry_, [&] {
    http::Response resp = http::get(url, options_);
    if (resp.status >= 500) {
      throw TransportError("search provider returned " + std::to_string(resp.status), true);
    }
    return resp;
  });
  if (r.status == 401 || r.status == 403 || r.status == 429) {
    throw SearchDeniedError(label.id, "HTTP " + std::to_string(r.status));
  }
  if (r.status != 200) {
    throw TransportError("search provider returned HTTP " + std::to_string(r.status), false);
  }
  return parse_search_results(r.body);
}

std::vector<SearchEntry> FixtureSearchProvider::query(const ClassLabel& label,
                                                      const std::string& /*query*/,
                                                      std::size_t /*want*/) {
  const auto path = dir_ / (label.id + ".json");
  if (!std::filesystem::exists(path)) return {};
  const std::string text = io::read_file(path);
  const auto doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_object() && doc.contains("error")) {
    throw SearchDeniedError(label.id, doc["error"].dump());
  }
  return parse_search_results(text);
}

std::unique_ptr<SearchProvider> make_search_provider(const std::string& spec) {
  if (spec.starts_with("http://") || spec.starts_with("https://")) {
    return std::make_unique<HttpSearchProvider>(spec);
  }
  return std::make_unique<FixtureSearchProvider>(spec);
}

std::vector<SearchEntry> normalize_results(std::vector<SearchEntry> raw, std::size_t want) {
  std::erase_if(raw, [](const SearchEntry& e) {
    return e.rank < 1 || !is_valid_url(e.image_url) || !is_valid_url(e.context_url);
  });
  std::stable_sort(raw.begin(), raw.end(),
                   [](const SearchEntry& a, const SearchEntry& b) { return a.rank < b.rank; });
  std::set<std::string> seen;
  std::vector<SearchEntry> out;
  for (auto& e : raw) {
    if (out.size() >= want) break;
    if (seen.insert(e.image_url).second) out.push_back(std::move(e));
  }
  return out;
}

std::vector<SearchEntry> search_images(SearchProvider& provider, const ClassLabel& label,
                                       const std::string& query_template, std::size_t want) {
  if (want == 0) throw DomainError("search_images: want must be >= 1");
  const std::string query = fill_template(query_template, label.display_name);
  return normalize_results(provider.query(label, query, want), want);
}

}  // namespace webcp::miner
