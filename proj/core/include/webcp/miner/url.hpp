#pragma once

#include <string>
#include <string_view>

namespace webcp::miner {

/// Accepts absolute http(s) URLs with a non-empty host.
bool is_valid_url(std::string_view url);

std::string percent_decode(std::string_view s);

/// Final path segment with query and fragment removed, percent-decoded and
/// lowercased. Works on relative references too ("../img/a.jpg" -> "a.jpg").
std::string url_filename(std::string_view url);

/// Lowercased extension of url_filename without the dot, or "" if none.
std::string url_extension(std::string_view url);

struct UrlParts {
  std::string scheme;
  std::string host;  // may include ":port"
  std::string path;  // starts with '/', query retained
};

/// Splits an absolute URL. Returns false for anything is_valid_url rejects.
bool split_url(std::string_view url, UrlParts& out);

}  // namespace webcp::miner
