#pragma once

// Thin JSON-over-HTTP POST helper shared by the embedding and LLM clients.

#include <string>

#include <nlohmann/json.hpp>

namespace reclink::detail {

struct Endpoint {
  std::string origin;  // http://host[:port]
  std::string path;    // always starts with '/'
};

/// Splits an absolute http:// URL (TLS is not compiled in). Throws ConfigError when malformed.
Endpoint SplitUrl(const std::string& url);

/// POSTs `body`, returns the parsed JSON response. Throws TransportError on
/// connection failure, timeout, non-200 status or a non-JSON body.
nlohmann::json PostJson(const Endpoint& ep, const nlohmann::json& body, int timeout_ms,
                        long batch_index = -1);

}  // namespace reclink::detail
