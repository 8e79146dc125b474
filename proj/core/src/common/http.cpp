#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "webcp/common/http.hpp"

#include <httplib.h>

#include "webcp/miner/url.hpp"

namespace webcp::http {
namespace {

httplib::Client make_client(const miner::UrlParts& parts, const RequestOptions& options) {
  httplib::Client client(parts.scheme + "://" + parts.host);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  client.set_follow_location(options.follow_redirects);
  client.set_default_headers({{"User-Agent", options.user_agent}});
  return client;
}

Response finish(const httplib::Result& result, const std::string& url) {
  if (!result) {
    const httplib::Error err = result.error();
    const std::string what = "request to " + url + " failed: " + httplib::to_string(err);
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
      throw TimeoutError(what);
    }
    throw TransportError(what, true);
  }
  Response r;
  r.status = result->status;
  r.body = result->body;
  r.content_type = result->get_header_value("Content-Type");
  return r;
}

miner::UrlParts parse(const std::string& url) {
  miner::UrlParts parts;
  if (!miner::split_url(url, parts)) throw TransportError("invalid URL: " + url, false);
  return parts;
}

}  // namespace

Response get(const std::string& url, const RequestOptions& options) {
  const auto parts = parse(url);
  auto client = make_client(parts, options);
  return finish(client.Get(parts.path), url);
}

Response post_json(const std::string& url, const std::string& body,
                   const RequestOptions& options) {
  const auto parts = parse(url);
  auto client = make_client(parts, options);
  return finish(client.Post(parts.path, body, "application/json"), url);
}

}  // namespace webcp::http
