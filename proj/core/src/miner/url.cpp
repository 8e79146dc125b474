#include "webcp/miner/url.hpp"

#include <algorithm>
#include <cctype>

namespace webcp::miner {
namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string_view strip_query_and_fragment(std::string_view url) {
  const auto cut = url.find_first_of("?#");
  return cut == std::string_view::npos ? url : url.substr(0, cut);
}

}  // namespace

bool split_url(std::string_view url, UrlParts& out) {
  const auto sep = url.find("://");
  if (sep == std::string_view::npos || sep == 0) return false;
  std::string scheme(url.substr(0, sep));
  std::transform(scheme.begin(), scheme.end(), scheme.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (scheme != "http" && scheme != "https") return false;
  const std::string_view rest = url.substr(sep + 3);
  const auto path_start = rest.find_first_of("/?#");
  const std::string_view host = rest.substr(0, path_start);
  if (host.empty()) return false;
  for (char c : host) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '@' || c == '\\') return false;
  }
  if (host.front() == ':' || host.front() == '.') return false;
  for (char c : rest) {
    if (std::isspace(static_cast<unsigned char>(c))) return false;
  }
  out.scheme = std::move(scheme);
  out.host = std::string(host);
  if (path_start == std::string_view::npos) {
    out.path = "/";
  } else {
    std::string_view path = rest.substr(path_start);
    const auto frag = path.find('#');
    if (frag != std::string_view::npos) path = path.substr(0, frag);
    out.path = path.empty() || path.front() != '/' ? "/" + std::string(path) : std::string(path);
  }
  return true;
}

bool is_valid_url(std::string_view url) {
  UrlParts parts;
  return split_url(url, parts);
}

std::string percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      const int hi = hex_value(s[i + 1]);
      const int lo = hex_value(s[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

std::string url_filename(std::string_view url) {
  std::string_view path = strip_query_and_fragment(url);
  const auto scheme = path.find("://");
  if (scheme != std::string_view::npos) {
    const auto slash = path.find('/', scheme + 3);
    path = slash == std::string_view::npos ? std::string_view{} : path.substr(slash);
  }
  const auto last = path.find_last_of('/');
  const std::string_view segment = last == std::string_view::npos ? path : path.substr(last + 1);
  std::string name = percent_decode(segment);
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return name;
}

std::string url_extension(std::string_view url) {
  const std::string name = url_filename(url);
  const auto dot = name.find_last_of('.');
  if (dot == std::string::npos || dot + 1 >= name.size()) return {};
  return name.substr(dot + 1);
}

}  // namespace webcp::miner
