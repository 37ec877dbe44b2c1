#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "longreward/hashing.hpp"
#include "longreward/http.hpp"
#include "longreward/parsers.hpp"
#include "longreward/rate_limit.hpp"

namespace longreward {

struct GenerationParams {
  double temperature = 0.0;
  int max_tokens = 2048;
  std::optional<std::uint64_t> seed;
  // Retry ordinal for the same prompt; part of the cache key so a retry is a
  // fresh request rather than a replay.
  int attempt = 0;

  nlohmann::json to_json() const {
    nlohmann::json j{{"temperature", temperature}, {"max_tokens", max_tokens}, {"attempt", attempt}};
    if (seed) j["seed"] = *seed;
    return j;
  }
};

// Text-completion contract shared by the judge and the sampled policy.
// Implementations must be safe for concurrent in-flight calls.
class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  virtual std::string complete(const std::string& prompt, const GenerationParams& params) = 0;
  virtual std::string model_id() const = 0;
};

// OpenAI-compatible /chat/completions adapter.
class HttpChatClient final : public CompletionClient {
 public:
  explicit HttpChatClient(EndpointConfig endpoint, CallLimiter* limiter = nullptr)
      : endpoint_(std::move(endpoint)), limiter_(limiter) {}

  std::string complete(const std::string& prompt, const GenerationParams& params) override {
    nlohmann::json body{{"model", endpoint_.model},
                        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
                        {"temperature", params.temperature},
                        {"max_tokens", params.max_tokens}};
    if (params.seed) body["seed"] = *params.seed;
    nlohmann::json res;
    if (limiter_) {
      auto permit = limiter_->acquire();
      res = post_json(endpoint_, "/chat/completions", body);
    } else {
      res = post_json(endpoint_, "/chat/completions", body);
    }
    try {
      const auto& content = res.at("choices").at(0).at("message").at("content");
      return content.is_null() ? std::string() : content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("unexpected chat completion payload: ") + e.what());
    }
  }

  std::string model_id() const override { return endpoint_.model; }

 private:
  EndpointConfig endpoint_;
  CallLimiter* limiter_;
};

// One scripted answer rule: applies when every `contains` substring occurs in
// the prompt, or when `fingerprint` equals sha256 of the prompt.
struct ScriptRule {
  std::vector<std::string> contains;
  std::string fingerprint;
  std::vector<std::string> responses;

  bool matches(const std::string& prompt, const std::string& prompt_fingerprint) const {
    if (!fingerprint.empty()) return fingerprint == prompt_fingerprint;
    for (const auto& s : contains)
      if (prompt.find(s) == std::string::npos) return false;
    return true;
  }
};

inline std::string prompt_fingerprint(const std::string& prompt) { return sha256_hex(prompt); }

// Deterministic client answering from a list of rules; the first matching
// rule wins. Judges index responses by retry attempt (the last response
// repeats), generators index them by seed (cycling).
class ScriptedClient final : public CompletionClient {
 public:
  enum class Indexing { by_attempt, by_seed };

  ScriptedClient(std::vector<ScriptRule> rules, Indexing indexing, std::optional<std::string> fallback = {},
                 std::string model = "scripted")
      : rules_(std::move(rules)), indexing_(indexing), fallback_(std::move(fallback)), model_(std::move(model)) {}

  ScriptedClient(ScriptedClient&& other) noexcept
      : rules_(std::move(other.rules_)),
        indexing_(other.indexing_),
        fallback_(std::move(other.fallback_)),
        model_(std::move(other.model_)),
        calls_(other.calls_.load()) {}

  // Script file: {"model": "...", "default": "...", "rules": [{"contains": [...],
  // "fingerprint": "...", "responses": [...]}]}. A bare array is read as rules.
  static ScriptedClient from_json(const nlohmann::json& j, Indexing indexing) {
    const nlohmann::json& rules_json = j.is_array() ? j : j.at("rules");
    std::vector<ScriptRule> rules;
    for (const auto& r : rules_json) {
      ScriptRule rule;
      if (r.contains("contains")) {
        if (r["contains"].is_string())
          rule.contains.push_back(r["contains"].get<std::string>());
        else
          rule.contains = r["contains"].get<std::vector<std::string>>();
      }
      rule.fingerprint = r.value("fingerprint", std::string());
      if (r.contains("response")) rule.responses.push_back(r["response"].get<std::string>());
      if (r.contains("responses")) rule.responses = r["responses"].get<std::vector<std::string>>();
      if (rule.responses.empty()) throw std::invalid_argument("script rule without responses");
      rules.push_back(std::move(rule));
    }
    std::optional<std::string> fallback;
    std::string model = "scripted";
    if (j.is_object()) {
      if (j.contains("default")) fallback = j["default"].get<std::string>();
      model = j.value("model", model);
    }
    return ScriptedClient(std::move(rules), indexing, std::move(fallback), std::move(model));
  }

  static ScriptedClient from_file(const std::filesystem::path& path, Indexing indexing) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open script file: " + path.string());
    return from_json(nlohmann::json::parse(in), indexing);
  }

  std::string complete(const std::string& prompt, const GenerationParams& params) override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    const auto fp = prompt_fingerprint(prompt);
    for (const auto& rule : rules_) {
      if (!rule.matches(prompt, fp)) continue;
      const auto n = rule.responses.size();
      std::size_t idx = 0;
      if (indexing_ == Indexing::by_attempt) {
        idx = std::min<std::size_t>(static_cast<std::size_t>(std::max(params.attempt, 0)), n - 1);
      } else {
        idx = static_cast<std::size_t>(params.seed.value_or(0) % n);
      }
      return rule.responses[idx];
    }
    if (fallback_) return *fallback_;
    throw TransportError("scripted client has no rule for prompt " + fp.substr(0, 12));
  }

  std::string model_id() const override { return model_; }
  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  std::vector<ScriptRule> rules_;
  Indexing indexing_;
  std::optional<std::string> fallback_;
  std::string model_;
  std::atomic<std::size_t> calls_{0};
};

// Content-addressed on-disk store of raw completions: <dir>/<k[0:2]>/<k>.json.
class CompletionCache {
 public:
  explicit CompletionCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  static std::string make_key(const std::string& model, const std::string& prompt, const GenerationParams& params) {
    return sha256_hex(model, prompt, params.to_json().dump());
  }

  std::optional<std::string> get(const std::string& key) const {
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    try {
      const auto j = nlohmann::json::parse(in);
      if (j.value("key", std::string()) != key) return std::nullopt;
      return j.at("completion").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      return std::nullopt;  // torn or foreign file; treat as a miss
    }
  }

  void put(const std::string& key, const std::string& completion) {
    std::lock_guard lock(stripes_[std::hash<std::string>{}(key) % stripes_.size()]);
    const auto path = path_for(key);
    std::filesystem::create_directories(path.parent_path());
    std::ostringstream tid;
    tid << std::this_thread::get_id();
    const auto tmp = path.string() + ".tmp." + tid.str();
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write cache entry: " + tmp);
      out << nlohmann::json{{"key", key}, {"completion", completion}}.dump();
    }
    std::filesystem::rename(tmp, path);
  }

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& key) const { return dir_ / key.substr(0, 2) / (key + ".json"); }

  std::filesystem::path dir_;
  std::array<std::mutex, 64> stripes_;
};

struct CallCounters {
  std::atomic<std::size_t> calls{0};
  std::atomic<std::size_t> cache_hits{0};
};

// Decorator: answers from the cache when possible, otherwise forwards and
// stores. Without a cache it only counts calls.
class CachingClient final : public CompletionClient {
 public:
  CachingClient(CompletionClient& inner, CompletionCache* cache) : inner_(inner), cache_(cache) {}

  std::string complete(const std::string& prompt, const GenerationParams& params) override {
    counters_.calls.fetch_add(1, std::memory_order_relaxed);
    if (!cache_) return inner_.complete(prompt, params);
    const auto key = CompletionCache::make_key(inner_.model_id(), prompt, params);
    if (auto hit = cache_->get(key)) {
      counters_.cache_hits.fetch_add(1, std::memory_order_relaxed);
      return *hit;
    }
    auto text = inner_.complete(prompt, params);
    cache_->put(key, text);
    return text;
  }

  std::string model_id() const override { return inner_.model_id(); }

  std::size_t calls() const noexcept { return counters_.calls.load(); }
  std::size_t cache_hits() const noexcept { return counters_.cache_hits.load(); }

 private:
  CompletionClient& inner_;
  CompletionCache* cache_;
  CallCounters counters_;
};

// Every parse attempt failed; the raw judge outputs are kept for debugging.
class ParseExhausted : public std::runtime_error {
 public:
  ParseExhausted(std::vector<std::string> raw_outputs, const std::string& last_error)
      : std::runtime_error("judge output unparseable after " + std::to_string(raw_outputs.size()) +
                           " attempts; last error: " + last_error),
        raw_outputs_(std::move(raw_outputs)) {}

  const std::vector<std::string>& raw_outputs() const noexcept { return raw_outputs_; }

 private:
  std::vector<std::string> raw_outputs_;
};

// Calls the judge and parses its answer, asking again (attempt + 1) up to
// `parse_retries` times when the parser rejects the output.
template <typename Parser>
auto complete_with_retry(CompletionClient& client, const std::string& prompt, GenerationParams params,
                         Parser&& parser, int parse_retries)
    -> decltype(parser(std::string_view())) {
  std::vector<std::string> raws;
  std::string last_error;
  for (int attempt = 0; attempt <= std::max(parse_retries, 0); ++attempt) {
    params.attempt = attempt;
    raws.push_back(client.complete(prompt, params));
    try {
      return parser(std::string_view(raws.back()));
    } catch (const ParseError& e) {
      last_error = e.what();
    }
  }
  throw ParseExhausted(std::move(raws), last_error);
}

}  // namespace longreward
