#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "longreward/dpo_math.hpp"
#include "longreward/http.hpp"
#include "longreward/pair_builder.hpp"
#include "longreward/parsers.hpp"
#include "longreward/retrieval.hpp"
#include "longreward/scorers.hpp"
#include "longreward/segmentation.hpp"

namespace longreward {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Everything a run needs. By default: 10 candidates at temperature 1.0,
// top-5 retrieval over 128-token chunks, 4096-token completeness chunks,
// beta 0.15 and lambda 0.1.
struct RunConfig {
  std::string judge_backend = "http";  // http | scripted
  EndpointConfig judge{"https://api.openai.com/v1", "gpt-4o", "LONGREWARD_JUDGE_API_KEY"};
  std::string judge_script;
  double judge_temperature = 0.0;
  int judge_max_tokens = 2048;
  int parse_retries = 2;

  std::string embedder_backend = "http";  // http | test-hash
  EndpointConfig embedder{"https://api.openai.com/v1", "text-embedding-3-small", "LONGREWARD_EMBED_API_KEY"};
  std::size_t embed_batch_size = 64;
  std::size_t hash_embed_dim = 256;

  std::string generator_backend = "http";  // http | scripted
  EndpointConfig generator{"http://127.0.0.1:8000/v1", "sft-policy", "LONGREWARD_GEN_API_KEY"};
  std::string generator_script;

  SamplingConfig sampling;
  RetrievalConfig retrieval;
  SegmentationConfig segmentation;
  dpo::DpoConfig<double> dpo;

  std::size_t concurrency = 8;
  std::size_t prompt_parallelism = 1;
  double requests_per_minute = 0.0;

  std::string cache_dir;
  std::string templates_dir;

  ScorerConfig scorer_config() const {
    ScorerConfig sc;
    sc.segmentation = segmentation;
    sc.retrieval = retrieval;
    sc.parse_retries = parse_retries;
    sc.judge_params.temperature = judge_temperature;
    sc.judge_params.max_tokens = judge_max_tokens;
    sc.fan_out = concurrency;
    return sc;
  }

  void validate() const {
    auto one_of = [](const std::string& v, std::initializer_list<std::string_view> allowed, const char* key) {
      for (auto a : allowed)
        if (v == a) return;
      throw ConfigError(std::string("invalid value for ") + key + ": " + v);
    };
    one_of(judge_backend, {"http", "scripted"}, "judge");
    one_of(embedder_backend, {"http", "test-hash"}, "embedder");
    one_of(generator_backend, {"http", "scripted"}, "generator");
    if (judge_backend == "scripted" && judge_script.empty()) throw ConfigError("judge = scripted needs judge_script");
    if (generator_backend == "scripted" && generator_script.empty())
      throw ConfigError("generator = scripted needs generator_script");
    if (parse_retries < 0) throw ConfigError("parse_retries must be >= 0");
    if (retrieval.top_k == 0) throw ConfigError("top_k must be >= 1");
    if (segmentation.retrieval_chunk_tokens == 0 || segmentation.completeness_chunk_tokens == 0)
      throw ConfigError("chunk sizes must be >= 1");
    if (concurrency == 0 || prompt_parallelism == 0) throw ConfigError("concurrency limits must be >= 1");
    if (hash_embed_dim == 0 || embed_batch_size == 0) throw ConfigError("embedder sizes must be >= 1");
    try {
      sampling.validate();
      dpo.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
};

namespace detail {

inline std::string interpolate_env(std::string_view value, const std::function<const char*(const char*)>& getenv_fn) {
  std::string out;
  std::size_t i = 0;
  while (i < value.size()) {
    if (value[i] == '$' && i + 1 < value.size() && value[i + 1] == '{') {
      const auto close = value.find('}', i + 2);
      if (close == std::string_view::npos) throw ConfigError("unterminated ${ in config value");
      const std::string name(value.substr(i + 2, close - i - 2));
      const char* v = getenv_fn(name.c_str());
      if (!v) throw ConfigError("environment variable not set: " + name);
      out += v;
      i = close + 1;
    } else {
      out.push_back(value[i++]);
    }
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (in.fail() || !in.eof()) throw ConfigError("invalid number for " + key + ": " + value);
  if constexpr (std::is_unsigned_v<T>) {
    if (!value.empty() && value.front() == '-') throw ConfigError("negative value for " + key);
  }
  return out;
}

}  // namespace detail

// Applies one key = value setting. Unknown keys are rejected.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_number;
  static const std::map<std::string, std::function<void(RunConfig&, const std::string&)>, std::less<>> setters = {
      {"judge", [](RunConfig& c, const std::string& v) { c.judge_backend = v; }},
      {"judge_base_url", [](RunConfig& c, const std::string& v) { c.judge.base_url = v; }},
      {"judge_model", [](RunConfig& c, const std::string& v) { c.judge.model = v; }},
      {"judge_api_key_env", [](RunConfig& c, const std::string& v) { c.judge.api_key_env = v; }},
      {"judge_timeout_seconds",
       [](RunConfig& c, const std::string& v) { c.judge.timeout_seconds = parse_number<double>("judge_timeout_seconds", v); }},
      {"judge_transport_retries",
       [](RunConfig& c, const std::string& v) { c.judge.transport_retries = parse_number<int>("judge_transport_retries", v); }},
      {"judge_script", [](RunConfig& c, const std::string& v) { c.judge_script = v; }},
      {"judge_temperature",
       [](RunConfig& c, const std::string& v) { c.judge_temperature = parse_number<double>("judge_temperature", v); }},
      {"judge_max_tokens",
       [](RunConfig& c, const std::string& v) { c.judge_max_tokens = parse_number<int>("judge_max_tokens", v); }},
      {"parse_retries", [](RunConfig& c, const std::string& v) { c.parse_retries = parse_number<int>("parse_retries", v); }},
      {"embedder", [](RunConfig& c, const std::string& v) { c.embedder_backend = v; }},
      {"embed_base_url", [](RunConfig& c, const std::string& v) { c.embedder.base_url = v; }},
      {"embed_model", [](RunConfig& c, const std::string& v) { c.embedder.model = v; }},
      {"embed_api_key_env", [](RunConfig& c, const std::string& v) { c.embedder.api_key_env = v; }},
      {"embed_timeout_seconds",
       [](RunConfig& c, const std::string& v) { c.embedder.timeout_seconds = parse_number<double>("embed_timeout_seconds", v); }},
      {"embed_transport_retries",
       [](RunConfig& c, const std::string& v) { c.embedder.transport_retries = parse_number<int>("embed_transport_retries", v); }},
      {"embed_batch_size",
       [](RunConfig& c, const std::string& v) { c.embed_batch_size = parse_number<std::size_t>("embed_batch_size", v); }},
      {"hash_embed_dim",
       [](RunConfig& c, const std::string& v) { c.hash_embed_dim = parse_number<std::size_t>("hash_embed_dim", v); }},
      {"generator", [](RunConfig& c, const std::string& v) { c.generator_backend = v; }},
      {"gen_base_url", [](RunConfig& c, const std::string& v) { c.generator.base_url = v; }},
      {"gen_model", [](RunConfig& c, const std::string& v) { c.generator.model = v; }},
      {"gen_api_key_env", [](RunConfig& c, const std::string& v) { c.generator.api_key_env = v; }},
      {"gen_timeout_seconds",
       [](RunConfig& c, const std::string& v) { c.generator.timeout_seconds = parse_number<double>("gen_timeout_seconds", v); }},
      {"gen_transport_retries",
       [](RunConfig& c, const std::string& v) { c.generator.transport_retries = parse_number<int>("gen_transport_retries", v); }},
      {"gen_max_tokens",
       [](RunConfig& c, const std::string& v) { c.sampling.max_tokens = parse_number<int>("gen_max_tokens", v); }},
      {"generator_script", [](RunConfig& c, const std::string& v) { c.generator_script = v; }},
      {"num_candidates",
       [](RunConfig& c, const std::string& v) { c.sampling.num_candidates = parse_number<std::size_t>("num_candidates", v); }},
      {"temperature", [](RunConfig& c, const std::string& v) { c.sampling.temperature = parse_number<double>("temperature", v); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.sampling.seed_base = parse_number<std::uint64_t>("seed", v); }},
      {"top_k", [](RunConfig& c, const std::string& v) { c.retrieval.top_k = parse_number<std::size_t>("top_k", v); }},
      {"retrieval_chunk_tokens",
       [](RunConfig& c, const std::string& v) {
         c.segmentation.retrieval_chunk_tokens = parse_number<std::size_t>("retrieval_chunk_tokens", v);
       }},
      {"completeness_chunk_tokens",
       [](RunConfig& c, const std::string& v) {
         c.segmentation.completeness_chunk_tokens = parse_number<std::size_t>("completeness_chunk_tokens", v);
       }},
      {"beta", [](RunConfig& c, const std::string& v) { c.dpo.beta = parse_number<double>("beta", v); }},
      {"lambda", [](RunConfig& c, const std::string& v) { c.dpo.lambda = parse_number<double>("lambda", v); }},
      {"concurrency", [](RunConfig& c, const std::string& v) { c.concurrency = parse_number<std::size_t>("concurrency", v); }},
      {"prompt_parallelism",
       [](RunConfig& c, const std::string& v) { c.prompt_parallelism = parse_number<std::size_t>("prompt_parallelism", v); }},
      {"requests_per_minute",
       [](RunConfig& c, const std::string& v) { c.requests_per_minute = parse_number<double>("requests_per_minute", v); }},
      {"cache_dir", [](RunConfig& c, const std::string& v) { c.cache_dir = v; }},
      {"templates_dir", [](RunConfig& c, const std::string& v) { c.templates_dir = v; }},
  };
  auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown config key: " + key);
  it->second(cfg, value);
}

// Flat `key = value` text; '#' starts a comment line; values may reference
// environment variables as ${NAME}.
inline RunConfig parse_config(std::string_view text, const std::function<const char*(const char*)>& getenv_fn =
                                                         [](const char* n) { return std::getenv(n); }) {
  RunConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = detail::trim(text.substr(pos, nl - pos));
    ++line_no;
    pos = nl + 1;
    if (!line.empty() && line.front() != '#') {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
      const std::string key(detail::trim(line.substr(0, eq)));
      auto raw = detail::trim(line.substr(eq + 1));
      if (raw.size() >= 2 && ((raw.front() == '"' && raw.back() == '"') || (raw.front() == '\'' && raw.back() == '\'')))
        raw = raw.substr(1, raw.size() - 2);
      try {
        apply_setting(cfg, key, detail::interpolate_env(raw, getenv_fn));
      } catch (const ConfigError& e) {
        throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (nl >= text.size()) break;
  }
  return cfg;
}

// Relative script and template paths are taken from the config file's
// directory; cache_dir stays relative to the working directory.
inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  auto cfg = parse_config(ss.str());
  const auto base = std::filesystem::path(path).parent_path();
  for (std::string* p : {&cfg.judge_script, &cfg.generator_script, &cfg.templates_dir})
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).string();
  return cfg;
}

}  // namespace longreward
