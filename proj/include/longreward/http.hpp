#pragma once

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>

namespace longreward {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Settings shared by every OpenAI-compatible endpoint we talk to.
struct EndpointConfig {
  std::string base_url;      // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key_env;   // name of the env var holding the key
  double timeout_seconds = 120.0;
  int transport_retries = 3;
  int backoff_base_ms = 500;
  int backoff_max_ms = 30000;
};

namespace detail {

struct SplitUrl {
  std::string scheme_host_port;
  std::string path_prefix;
};

inline SplitUrl split_base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("base URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  if (path_start == std::string::npos) {
    out.scheme_host_port = url;
  } else {
    out.scheme_host_port = url.substr(0, path_start);
    out.path_prefix = url.substr(path_start);
  }
  while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
  return out;
}

inline bool is_retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace detail

// Delay before retry number `attempt` (1-based): base * 2^(attempt-1), capped.
inline std::chrono::milliseconds backoff_delay(const EndpointConfig& cfg, int attempt) {
  long long delay = cfg.backoff_base_ms;
  for (int i = 1; i < attempt && delay < cfg.backoff_max_ms; ++i) delay *= 2;
  return std::chrono::milliseconds(std::min<long long>(delay, cfg.backoff_max_ms));
}

// POSTs a JSON body to base_url + path, retrying connection failures and
// 408/429/5xx responses with exponential backoff.
inline nlohmann::json post_json(const EndpointConfig& cfg, const std::string& path,
                                const nlohmann::json& body) {
  const auto url = detail::split_base_url(cfg.base_url);
  httplib::Client client(url.scheme_host_port);
  const auto timeout = std::chrono::duration<double>(cfg.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));

  httplib::Headers headers;
  if (!cfg.api_key_env.empty()) {
    if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key)
      headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string payload = body.dump();
  const std::string full_path = url.path_prefix + path;

  std::string last_error;
  for (int attempt = 0; attempt <= cfg.transport_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(backoff_delay(cfg, attempt));
    auto res = client.Post(full_path, headers, payload, "application/json");
    if (!res) {
      last_error = "connection error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("malformed JSON from endpoint: ") + e.what());
      }
    }
    last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
    if (!detail::is_retryable_status(res->status)) break;
  }
  throw TransportError(cfg.base_url + full_path.substr(url.path_prefix.size()) + " failed: " + last_error);
}

}  // namespace longreward
