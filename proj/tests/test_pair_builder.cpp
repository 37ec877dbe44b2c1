#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "longreward/pair_builder.hpp"

using namespace longreward;

namespace {

std::vector<ScoredCandidate> scored(std::initializer_list<double> rewards) {
  std::vector<ScoredCandidate> out;
  std::size_t i = 0;
  for (double r : rewards) {
    ScoredCandidate c;
    c.response = {"p", i, "r" + std::to_string(i)};
    c.reward.final = r;
    out.push_back(c);
    ++i;
  }
  return out;
}

// Judge whose helpfulness and logicality ratings depend on the response
// text ("score:N"), with fixed faithfulness and completeness.
std::vector<ScriptRule> judge_rules() {
  std::vector<ScriptRule> rules;
  for (int n = 0; n <= 10; ++n) {
    const auto tag = "score:" + std::to_string(n) + "\n";
    rules.push_back({{"assess the usefulness", tag}, "", {"[[" + std::to_string(n) + "]]"}});
    rules.push_back({{"assess the logicality", tag}, "", {"[[" + std::to_string(n) + "]]"}});
  }
  rules.push_back({{"extract factual statements"}, "", {"none"}});
  rules.push_back({{"[Document Fragment Starts]"}, "", {"No relevant information"}});
  rules.push_back({{"assess the completeness"}, "", {"[[5]]"}});
  return rules;
}

struct Harness {
  ScriptedClient judge{judge_rules(), ScriptedClient::Indexing::by_attempt};
  HashEmbedder embedder{32};
  TemplateSet templates;
  WhitespaceTokenizer tokenizer;
  RewardModel model{judge, embedder, templates, ScorerConfig{}, tokenizer};
};

SamplingConfig sampling(std::size_t m) {
  SamplingConfig cfg;
  cfg.num_candidates = m;
  return cfg;
}

}  // namespace

TEST(SelectPair, Examples) {
  auto pair = select_pair(scored({6.0, 8.5, 7.0, 5.5}));
  ASSERT_TRUE(pair);
  EXPECT_EQ(pair->winner.index, 1u);
  EXPECT_EQ(pair->loser.index, 3u);
  EXPECT_DOUBLE_EQ(pair->winner_reward.final, 8.5);
  EXPECT_DOUBLE_EQ(pair->loser_reward.final, 5.5);

  pair = select_pair(scored({7.0, 9.0, 9.0, 4.0, 4.0}));
  ASSERT_TRUE(pair);
  EXPECT_EQ(pair->winner.index, 1u);
  EXPECT_EQ(pair->loser.index, 3u);
}

TEST(SelectPair, Skips) {
  EXPECT_FALSE(select_pair(scored({})));
  EXPECT_FALSE(select_pair(scored({6.0})));
  EXPECT_FALSE(select_pair(scored({5.0, 5.0, 5.0})));
}

TEST(SelectPair, UsesCandidateIndexNotPosition) {
  auto c = scored({3.0, 3.0, 1.0});
  c[0].response.index = 7;
  c[1].response.index = 2;
  const auto pair = select_pair(c);
  ASSERT_TRUE(pair);
  EXPECT_EQ(pair->winner.index, 2u);
}

TEST(SelectPair, AgreesWithSortOracle) {
  std::mt19937_64 rng(21);
  for (int iter = 0; iter < 2000; ++iter) {
    const int n = std::uniform_int_distribution<int>(0, 12)(rng);
    std::vector<ScoredCandidate> c;
    for (int i = 0; i < n; ++i) {
      ScoredCandidate s;
      s.response.index = static_cast<std::size_t>(i);
      // Quarter steps make ties common.
      s.reward.final = std::uniform_int_distribution<int>(0, 8)(rng) * 0.25;
      c.push_back(s);
    }
    auto order = c;
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.reward.final > b.reward.final; });
    const auto pair = select_pair(c);
    if (n < 2 || order.front().reward.final == order.back().reward.final) {
      EXPECT_FALSE(pair);
      continue;
    }
    ASSERT_TRUE(pair);
    EXPECT_EQ(pair->winner.index, order.front().response.index);
    const double lo = order.back().reward.final;
    const auto first_lo = std::find_if(c.begin(), c.end(), [lo](const auto& s) { return s.reward.final == lo; });
    EXPECT_EQ(pair->loser.index, first_lo->response.index);
    EXPECT_GT(pair->winner_reward.final, pair->loser_reward.final);
  }
}

TEST(Sampling, SeedsAndPromptText) {
  ScriptedClient gen({{{}, "", {"a", "b", "c"}}}, ScriptedClient::Indexing::by_seed);
  const LongContextPrompt prompt{"p", "DOC", "Q?"};
  EXPECT_EQ(generation_prompt_text(prompt), "DOC\n\nQ?");
  auto cfg = sampling(4);
  cfg.seed_base = 1;
  const auto out = sample_candidates(prompt, gen, cfg, 2);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[0].text, "b");
  EXPECT_EQ(out[1].text, "c");
  EXPECT_EQ(out[2].text, "a");
  EXPECT_EQ(out[3].index, 3u);
}

TEST(Sampling, DropsBlankGenerations) {
  ScriptedClient gen({{{}, "", {"ok", "  \n", "fine"}}}, ScriptedClient::Indexing::by_seed);
  std::vector<std::string> log;
  const auto out = sample_candidates({"p", "d", "q"}, gen, sampling(3), 1, &log);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[1].index, 2u);
  EXPECT_EQ(log.size(), 1u);
}

TEST(Sampling, RejectsBadConfig) {
  ScriptedClient gen({{{}, "", {"x"}}}, ScriptedClient::Indexing::by_seed);
  EXPECT_THROW(sample_candidates({"p", "d", "q"}, gen, sampling(1)), std::invalid_argument);
  auto cfg = sampling(2);
  cfg.temperature = 0.0;
  EXPECT_THROW(sample_candidates({"p", "d", "q"}, gen, cfg), std::invalid_argument);
}

TEST(PairBuilder, PairsAndSkipsInOrder) {
  Harness h;
  ScriptedClient gen({{{"Q1"}, "", {"score:9\n", "score:3\n", "score:6\n"}}, {{"Q2"}, "", {"score:5\n"}}},
                     ScriptedClient::Indexing::by_seed);
  PairBuilder builder(gen, h.model, sampling(3), 2, 4);
  std::vector<LongContextPrompt> prompts{{"a", "doc one", "Q1"}, {"b", "doc two", "Q2"}, {"c", "doc three", "Q1"}};
  std::size_t next = 0;
  std::vector<PromptOutcome> outcomes;
  builder.build_dataset(
      [&]() -> std::optional<LongContextPrompt> {
        if (next == prompts.size()) return std::nullopt;
        return prompts[next++];
      },
      [&](PromptOutcome&& o) { outcomes.push_back(std::move(o)); });
  ASSERT_EQ(outcomes.size(), 3u);
  EXPECT_EQ(outcomes[0].prompt.id, "a");
  EXPECT_EQ(outcomes[0].status, PromptOutcome::Status::paired);
  EXPECT_EQ(outcomes[0].pair->winner.text, "score:9\n");
  EXPECT_EQ(outcomes[0].pair->loser.text, "score:3\n");
  EXPECT_DOUBLE_EQ(outcomes[0].pair->winner_reward.final, (9 + 9 + 10 + 5) / 4.0);
  EXPECT_EQ(outcomes[1].status, PromptOutcome::Status::skipped);
  EXPECT_EQ(outcomes[1].reason, "all candidate rewards equal");
  EXPECT_EQ(outcomes[2].prompt.id, "c");
  EXPECT_EQ(outcomes[2].status, PromptOutcome::Status::paired);
}

TEST(PairBuilder, UnscorableCandidatesAreDroppedNotFatal) {
  Harness h;
  ScriptedClient gen({{{}, "", {"score:8\n", "unrated", "score:2\n"}}}, ScriptedClient::Indexing::by_seed);
  PairBuilder builder(gen, h.model, sampling(3));
  const auto outcome = builder.process({"x", "doc", "Q"});
  EXPECT_EQ(outcome.status, PromptOutcome::Status::paired);
  EXPECT_EQ(outcome.candidates, 3u);
  EXPECT_EQ(outcome.scored, 2u);
  ASSERT_EQ(outcome.log.size(), 1u);
  EXPECT_NE(outcome.log[0].find("candidate 1"), std::string::npos);
}

TEST(PairBuilder, GeneratorOutageFailsOnlyThatPrompt) {
  Harness h;
  ScriptedClient gen({{{"good"}, "", {"score:8\n", "score:1\n"}}}, ScriptedClient::Indexing::by_seed);
  PairBuilder builder(gen, h.model, sampling(2));
  const auto bad = builder.process({"x", "doc", "bad query"});
  EXPECT_EQ(bad.status, PromptOutcome::Status::skipped);
  EXPECT_EQ(bad.candidates, 0u);
  const auto good = builder.process({"y", "doc", "good query"});
  EXPECT_EQ(good.status, PromptOutcome::Status::paired);
}
