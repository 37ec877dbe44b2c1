#include <gtest/gtest.h>

#include <map>

#include "longreward/config.hpp"

using namespace longreward;

namespace {

const char* no_env(const char*) { return nullptr; }

}  // namespace

TEST(Config, DefaultValues) {
  const RunConfig cfg;
  EXPECT_EQ(cfg.sampling.num_candidates, 10u);
  EXPECT_DOUBLE_EQ(cfg.sampling.temperature, 1.0);
  EXPECT_EQ(cfg.retrieval.top_k, 5u);
  EXPECT_EQ(cfg.segmentation.retrieval_chunk_tokens, 128u);
  EXPECT_EQ(cfg.segmentation.completeness_chunk_tokens, 4096u);
  EXPECT_DOUBLE_EQ(cfg.dpo.beta, 0.15);
  EXPECT_DOUBLE_EQ(cfg.dpo.lambda, 0.1);
  EXPECT_EQ(cfg.parse_retries, 2);
  EXPECT_DOUBLE_EQ(cfg.judge_temperature, 0.0);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, ParsesKeysCommentsAndQuotes) {
  const auto cfg = parse_config(
      "# comment\n"
      "beta = 0.15\n"
      "lambda=0.1\n"
      "  top_k = 3  \n"
      "judge_model = \"judge-x\"\n"
      "cache_dir = '/tmp/c d'\n"
      "\n",
      no_env);
  EXPECT_DOUBLE_EQ(cfg.dpo.beta, 0.15);
  EXPECT_DOUBLE_EQ(cfg.dpo.lambda, 0.1);
  EXPECT_EQ(cfg.retrieval.top_k, 3u);
  EXPECT_EQ(cfg.judge.model, "judge-x");
  EXPECT_EQ(cfg.cache_dir, "/tmp/c d");
}

TEST(Config, EnvironmentInterpolation) {
  const std::map<std::string, std::string> env{{"HOST", "example.org"}};
  auto getenv_fn = [&](const char* name) -> const char* {
    auto it = env.find(name);
    return it == env.end() ? nullptr : it->second.c_str();
  };
  EXPECT_EQ(parse_config("judge_base_url = https://${HOST}/v1", getenv_fn).judge.base_url, "https://example.org/v1");
  EXPECT_THROW(parse_config("judge_base_url = ${MISSING}", getenv_fn), ConfigError);
  EXPECT_THROW(parse_config("judge_base_url = ${HOST", getenv_fn), ConfigError);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config("unknown_key = 1", no_env), ConfigError);
  EXPECT_THROW(parse_config("no equals sign", no_env), ConfigError);
  EXPECT_THROW(parse_config("top_k = three", no_env), ConfigError);
  EXPECT_THROW(parse_config("top_k = -1", no_env), ConfigError);
  EXPECT_THROW(parse_config("beta = 0.1x", no_env), ConfigError);
  try {
    parse_config("top_k = 1\nbogus = 2", no_env);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Config, ValidateCatchesInconsistentSettings) {
  EXPECT_THROW(parse_config("num_candidates = 1", no_env).validate(), ConfigError);
  EXPECT_THROW(parse_config("temperature = 0", no_env).validate(), ConfigError);
  EXPECT_THROW(parse_config("beta = 0", no_env).validate(), ConfigError);
  EXPECT_THROW(parse_config("judge = scripted", no_env).validate(), ConfigError);
  EXPECT_THROW(parse_config("embedder = magic", no_env).validate(), ConfigError);
  EXPECT_THROW(parse_config("concurrency = 0", no_env).validate(), ConfigError);
}

TEST(Config, FileRelativePaths) {
  const auto cfg = load_config_file(std::string(LONGREWARD_FIXTURES_DIR) + "/fixture.conf");
  EXPECT_EQ(cfg.judge_backend, "scripted");
  EXPECT_EQ(std::filesystem::path(cfg.judge_script),
            std::filesystem::path(LONGREWARD_FIXTURES_DIR) / "judge_script.json");
  EXPECT_TRUE(std::filesystem::exists(cfg.generator_script));
  EXPECT_EQ(cfg.sampling.num_candidates, 4u);
  EXPECT_THROW(load_config_file("/nonexistent/x.conf"), ConfigError);
}
