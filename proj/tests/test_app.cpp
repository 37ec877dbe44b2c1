#include <gtest/gtest.h>

#include "fixture_support.hpp"

using namespace longreward;
using namespace longreward::testing;

namespace fs = std::filesystem;

namespace {

std::string prompts() { return read_file(fixtures_dir() / "prompts.jsonl"); }

fs::path fresh_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(ScoreCommand, MatchesHandComputedScores) {
  const auto run = run_command(Command::score, fixture_config(), prompts());
  EXPECT_EQ(run.out, read_file(fixtures_dir() / "expected_scores.jsonl"));
  EXPECT_TRUE(run.result.errors.empty());
  EXPECT_EQ(run.result.exit_code, app::kExitOk);
  EXPECT_EQ(run.result.summary["prompts"], 5);
  EXPECT_EQ(run.result.summary["scored"], 7);
}

TEST(ScoreCommand, TraceCarriesVerdicts) {
  app::CommandOptions opts;
  opts.emit_trace = true;
  opts.limit = 1;
  const auto run = run_command(Command::score, fixture_config(), prompts(), opts);
  const auto j = nlohmann::json::parse(run.out);
  EXPECT_EQ(j["final"], 7.5625);
  ASSERT_EQ(j["trace"]["verdicts"].size(), 4u);
  EXPECT_EQ(j["trace"]["verdicts"][2]["score"], 0.5);
  EXPECT_EQ(j["trace"]["statements"][3]["text"], "The firm moved its headquarters to Mars.");
  EXPECT_FALSE(j["trace"]["extractions"].empty());
}

TEST(ScoreCommand, BadLinesGoToSidecar) {
  const std::string input = "{not json\n" + prompts() +
                            R"({"id": "worked", "context": "c", "query": "q", "responses": ["x"]})" "\n" +
                            R"({"id": "nor", "context": "c", "query": "q"})" "\n" +
                            R"({"id": "odd", "context": "c", "query": "q", "responses": ["untagged"]})" "\n";
  const auto run = run_command(Command::score, fixture_config(), input);
  EXPECT_EQ(run.out, read_file(fixtures_dir() / "expected_scores.jsonl"));
  ASSERT_EQ(run.result.errors.size(), 4u);
  EXPECT_EQ(run.result.errors[0]["line"], 1);
  EXPECT_NE(run.result.errors[1]["error"].get<std::string>().find("duplicate"), std::string::npos);
  EXPECT_EQ(run.result.errors[3]["prompt_id"], "odd");
  EXPECT_EQ(run.result.summary["unavailable"], 1);
  EXPECT_EQ(run.result.exit_code, app::kExitOk);

  app::CommandOptions strict;
  strict.strict = true;
  EXPECT_EQ(run_command(Command::score, fixture_config(), input, strict).result.exit_code, app::kExitFatal);
}

TEST(BuildPairsCommand, MatchesHandComputedPairs) {
  const auto run = run_command(Command::build_pairs, fixture_config(), prompts());
  EXPECT_EQ(run.out, read_file(fixtures_dir() / "expected_pairs.jsonl"));
  EXPECT_EQ(run.result.summary["pairs"], 5);
  EXPECT_EQ(run.result.summary["skips"], 0);
  EXPECT_EQ(run.result.summary["generation_calls"], 20);
  EXPECT_NE(run.log.find("blank generation"), std::string::npos);
}

TEST(BuildPairsCommand, TiedPromptIsSkipped) {
  auto cfg = fixture_config();
  const auto dir = fresh_dir("lr_app_tied");
  fs::create_directories(dir);
  std::ofstream(dir / "gen.json") << R"({"rules": [{"contains": "tie?", "responses": ["a\nscore:6", "b\nscore:6"]}]})";
  cfg.generator_script = (dir / "gen.json").string();
  cfg.sampling.num_candidates = 2;
  const auto run = run_command(Command::build_pairs, cfg, R"({"id": "t", "context": "doc", "query": "tie?"})");
  EXPECT_TRUE(run.out.empty());
  EXPECT_EQ(run.result.summary["skips"], 1);
  EXPECT_NE(run.log.find("all candidate rewards equal"), std::string::npos);
  fs::remove_all(dir);
}

TEST(BuildPairsCommand, LimitStopsEarly) {
  app::CommandOptions opts;
  opts.limit = 2;
  const auto run = run_command(Command::build_pairs, fixture_config(), prompts(), opts);
  EXPECT_EQ(run.result.summary["prompts"], 2);
  const auto expected = read_file(fixtures_dir() / "expected_pairs.jsonl");
  const auto second_nl = expected.find('\n', expected.find('\n') + 1);
  EXPECT_EQ(run.out, expected.substr(0, second_nl + 1));
}

TEST(BuildPairsCommand, CacheReplaysIdentically) {
  const auto cache = fresh_dir("lr_app_cache");
  const auto first = run_command(Command::build_pairs, fixture_config(cache), prompts());
  const auto second = run_command(Command::build_pairs, fixture_config(cache), prompts());
  EXPECT_EQ(first.out, second.out);
  EXPECT_EQ(first.result.summary["cache_hits"], 0);
  EXPECT_EQ(second.result.summary["cache_hits"], first.result.summary["judge_calls"]);
  EXPECT_EQ(second.result.summary["generation_cache_hits"], first.result.summary["generation_calls"]);
  fs::remove_all(cache);
}

TEST(ChunkCommand, ListsChunks) {
  std::ostringstream out;
  app::run_chunk("a b c d", 2, WhitespaceTokenizer{}, out);
  EXPECT_EQ(out.str(), "0\t2\t0\t4\t0%-58%\n1\t2\t4\t7\t57%-100%\n");
}

TEST(DpoLossCommand, PerLineAndMean) {
  std::istringstream in(read_file(fixtures_dir() / "dpo_logprobs.jsonl") + "{\"policy_logp_winner\": 1}\n");
  std::ostringstream out;
  const auto r = app::run_dpo_loss({}, in, out, {});
  std::istringstream lines(out.str());
  std::string l1, l2, l3;
  std::getline(lines, l1);
  std::getline(lines, l2);
  std::getline(lines, l3);
  const auto a = nlohmann::json::parse(l1), b = nlohmann::json::parse(l2), m = nlohmann::json::parse(l3);
  EXPECT_NEAR(a["dpo_loss"].get<double>(), 0.69314718, 1e-8);
  EXPECT_NEAR(a["merged_loss"].get<double>(), 0.89314718, 1e-8);
  EXPECT_NEAR(b["dpo_loss"].get<double>(), 0.20141328, 1e-8);
  EXPECT_EQ(m["mean"]["records"], 2);
  EXPECT_NEAR(m["mean"]["mean_dpo_loss"].get<double>(), (0.69314718056 + 0.20141327798) / 2, 1e-8);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0]["line"], 3);
}
