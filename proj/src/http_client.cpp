#include "http_client.hpp"

#include <httplib.h>

#include "reclink/error.hpp"

namespace reclink::detail {

Endpoint SplitUrl(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("URL lacks a scheme: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http") {
    throw ConfigError("unsupported URL scheme \"" + scheme + "\": " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = url.substr(0, path_start);
  ep.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (ep.origin.size() <= scheme_end + 3) throw ConfigError("URL lacks a host: " + url);
  return ep;
}

nlohmann::json PostJson(const Endpoint& ep, const nlohmann::json& body, int timeout_ms,
                        long batch_index) {
  httplib::Client client(ep.origin);
  const auto sec = timeout_ms / 1000;
  const auto usec = (timeout_ms % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);

  auto res = client.Post(ep.path, body.dump(), "application/json");
  if (!res) {
    throw TransportError(ep.origin + ep.path + ": " + httplib::to_string(res.error()),
                         batch_index);
  }
  if (res->status != 200) {
    throw TransportError(ep.origin + ep.path + ": HTTP status " + std::to_string(res->status),
                         batch_index);
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error&) {
    throw TransportError(ep.origin + ep.path + ": response is not JSON", batch_index);
  }
}

}  // namespace reclink::detail
