#pragma once

#include <cstddef>
#include <istream>
#include <memory>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "longreward/config.hpp"
#include "longreward/dpo_math.hpp"
#include "longreward/judge.hpp"
#include "longreward/pair_builder.hpp"
#include "longreward/records.hpp"
#include "longreward/retrieval.hpp"
#include "longreward/scorers.hpp"
#include "longreward/segmentation.hpp"
#include "longreward/templates.hpp"

// Command implementations behind the CLI. They read and write streams so
// the same code paths run in-process under test.

namespace longreward::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitUsage = 2;

struct CommandOptions {
  bool emit_trace = false;
  bool strict = false;
  std::optional<std::size_t> limit;
};

// Clients, limiter, cache and templates wired from a RunConfig.
class Runtime {
 public:
  explicit Runtime(RunConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    limiter_ = std::make_unique<CallLimiter>(cfg_.concurrency, cfg_.requests_per_minute);
    if (!cfg_.cache_dir.empty()) cache_ = std::make_unique<CompletionCache>(cfg_.cache_dir);
    if (!cfg_.templates_dir.empty()) templates_ = TemplateSet::load(cfg_.templates_dir);

    if (cfg_.judge_backend == "scripted") {
      judge_backend_ = std::make_unique<ScriptedClient>(
          ScriptedClient::from_file(cfg_.judge_script, ScriptedClient::Indexing::by_attempt));
    } else {
      judge_backend_ = std::make_unique<HttpChatClient>(cfg_.judge, limiter_.get());
    }
    if (cfg_.generator_backend == "scripted") {
      generator_backend_ = std::make_unique<ScriptedClient>(
          ScriptedClient::from_file(cfg_.generator_script, ScriptedClient::Indexing::by_seed));
    } else {
      generator_backend_ = std::make_unique<HttpChatClient>(cfg_.generator, limiter_.get());
    }
    if (cfg_.embedder_backend == "test-hash") {
      embedder_ = std::make_unique<HashEmbedder>(cfg_.hash_embed_dim);
    } else {
      embedder_ = std::make_unique<HttpEmbedder>(cfg_.embedder, cfg_.embed_batch_size, limiter_.get());
    }
    judge_ = std::make_unique<CachingClient>(*judge_backend_, cache_.get());
    generator_ = std::make_unique<CachingClient>(*generator_backend_, cache_.get());
    reward_model_ =
        std::make_unique<RewardModel>(*judge_, *embedder_, templates_, cfg_.scorer_config(), tokenizer_);
  }

  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  const RunConfig& config() const noexcept { return cfg_; }
  RewardModel& reward_model() { return *reward_model_; }
  CachingClient& judge() { return *judge_; }
  CachingClient& generator() { return *generator_; }

 private:
  RunConfig cfg_;
  std::unique_ptr<CallLimiter> limiter_;
  std::unique_ptr<CompletionCache> cache_;
  TemplateSet templates_;
  WhitespaceTokenizer tokenizer_;
  std::unique_ptr<CompletionClient> judge_backend_;
  std::unique_ptr<CompletionClient> generator_backend_;
  std::unique_ptr<Embedder> embedder_;
  std::unique_ptr<CachingClient> judge_;
  std::unique_ptr<CachingClient> generator_;
  std::unique_ptr<RewardModel> reward_model_;
};

struct CommandResult {
  int exit_code = kExitOk;
  std::vector<ojson> errors;  // sidecar entries
  ojson summary = ojson::object();
};

namespace detail {

inline bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

inline bool is_blank(const std::string& line) { return longreward::detail::trim(line).empty(); }

}  // namespace detail

// One scored line per (prompt, response). Malformed records and
// unavailable rewards go to the sidecar; --strict turns them fatal.
inline CommandResult run_score(Runtime& rt, std::istream& in, std::ostream& out, std::ostream& log,
                               const CommandOptions& opts) {
  CommandResult result;
  std::size_t line_no = 0, prompts = 0, scored = 0, unavailable = 0;
  std::set<std::string> seen_ids;
  std::string line;
  while (detail::next_line(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    if (opts.limit && prompts >= *opts.limit) break;
    PromptRecord rec;
    try {
      rec = parse_prompt_record(line);
      if (!rec.responses || rec.responses->empty()) throw RecordError("record has no responses to score");
      if (!seen_ids.insert(rec.prompt.id).second) throw RecordError("duplicate id \"" + rec.prompt.id + "\"");
    } catch (const RecordError& e) {
      result.errors.push_back({{"line", line_no}, {"error", e.what()}});
      continue;
    }
    ++prompts;
    const auto& responses = *rec.responses;
    std::vector<std::optional<Reward>> rewards(responses.size());
    std::vector<std::string> failures(responses.size());
    parallel_for(responses.size(), rt.config().concurrency, [&](std::size_t i) {
      try {
        rewards[i] = rt.reward_model().compute_reward(rec.prompt, CandidateResponse{rec.prompt.id, i, responses[i]});
      } catch (const ScoreUnavailable& e) {
        failures[i] = e.what();
      }
    });
    rt.reward_model().release_context(rec.prompt);
    for (std::size_t i = 0; i < responses.size(); ++i) {
      if (rewards[i]) {
        out << scored_record_json(rec.prompt.id, i, *rewards[i], opts.emit_trace).dump() << '\n';
        ++scored;
        if (!rewards[i]->trace.warnings.empty())
          for (const auto& w : rewards[i]->trace.warnings)
            log << "warning: " << rec.prompt.id << "#" << i << ": " << w << '\n';
      } else {
        ++unavailable;
        result.errors.push_back(
            {{"line", line_no}, {"prompt_id", rec.prompt.id}, {"response_index", i}, {"error", failures[i]}});
      }
    }
  }
  result.summary = ojson{{"prompts", prompts},
                         {"scored", scored},
                         {"unavailable", unavailable},
                         {"errors", result.errors.size()},
                         {"judge_calls", rt.judge().calls()},
                         {"cache_hits", rt.judge().cache_hits()}};
  if (opts.strict && !result.errors.empty()) result.exit_code = kExitFatal;
  return result;
}

// Preference pairs in input order; summary carries prompts, pairs, skips,
// judge_calls and cache_hits.
inline CommandResult run_build_pairs(Runtime& rt, std::istream& in, std::ostream& out, std::ostream& log,
                                     const CommandOptions& opts) {
  CommandResult result;
  const auto& cfg = rt.config();
  PairBuilder builder(rt.generator(), rt.reward_model(), cfg.sampling, cfg.prompt_parallelism, cfg.concurrency);
  std::size_t line_no = 0, prompts = 0, pairs = 0, skips = 0, failed = 0;
  std::set<std::string> seen_ids;
  std::string line;

  auto source = [&]() -> std::optional<LongContextPrompt> {
    while (!opts.limit || prompts < *opts.limit) {
      if (!detail::next_line(in, line)) return std::nullopt;
      ++line_no;
      if (detail::is_blank(line)) continue;
      try {
        auto rec = parse_prompt_record(line);
        if (!seen_ids.insert(rec.prompt.id).second) throw RecordError("duplicate id \"" + rec.prompt.id + "\"");
        ++prompts;
        return std::move(rec.prompt);
      } catch (const RecordError& e) {
        result.errors.push_back({{"line", line_no}, {"error", e.what()}});
      }
    }
    return std::nullopt;
  };
  auto sink = [&](PromptOutcome&& outcome) {
    for (const auto& entry : outcome.log) log << "note: " << entry << '\n';
    switch (outcome.status) {
      case PromptOutcome::Status::paired:
        ++pairs;
        out << pair_record_json(outcome.prompt, *outcome.pair).dump() << '\n';
        break;
      case PromptOutcome::Status::skipped:
        ++skips;
        log << "skip: " << outcome.prompt.id << ": " << outcome.reason << '\n';
        break;
      case PromptOutcome::Status::failed:
        ++failed;
        result.errors.push_back({{"prompt_id", outcome.prompt.id}, {"error", outcome.reason}});
        break;
    }
  };
  builder.build_dataset(source, sink);

  result.summary = ojson{{"prompts", prompts},
                         {"pairs", pairs},
                         {"skips", skips},
                         {"failed", failed},
                         {"judge_calls", rt.judge().calls()},
                         {"cache_hits", rt.judge().cache_hits()},
                         {"generation_calls", rt.generator().calls()},
                         {"generation_cache_hits", rt.generator().cache_hits()}};
  if (opts.strict && !result.errors.empty()) result.exit_code = kExitFatal;
  return result;
}

// Debug listing: index, token_count, byte offsets and percent span per chunk.
inline void run_chunk(std::string_view text, std::size_t size, const Tokenizer& tokenizer, std::ostream& out) {
  for (const auto& c : chunk_by_tokens(text, size, tokenizer)) {
    const auto span = chunk_percent_span(c, text.size());
    out << c.index << '\t' << c.token_count << '\t' << c.char_start << '\t' << c.char_end << '\t' << span.start
        << "%-" << span.end << "%\n";
  }
}

// Per-record losses followed by one line of means.
inline CommandResult run_dpo_loss(const dpo::DpoConfig<double>& cfg, std::istream& in, std::ostream& out,
                                  const CommandOptions& opts) {
  CommandResult result;
  std::size_t line_no = 0, records = 0;
  double sum_dpo = 0.0, sum_ce = 0.0, sum_merged = 0.0;
  std::string line;
  while (detail::next_line(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    if (opts.limit && records >= *opts.limit) break;
    try {
      const auto lp = parse_logprob_record(line);
      const double d = dpo::dpo_loss(lp, cfg);
      const double ce = dpo::ce_loss(lp.policy_logp_winner);
      const double merged = dpo::merged_loss(lp, cfg);
      out << ojson{{"line", line_no}, {"dpo_loss", d}, {"ce_loss", ce}, {"merged_loss", merged}}.dump() << '\n';
      sum_dpo += d;
      sum_ce += ce;
      sum_merged += merged;
      ++records;
    } catch (const std::invalid_argument& e) {
      result.errors.push_back({{"line", line_no}, {"error", e.what()}});
    }
  }
  ojson mean{{"records", records}};
  if (records > 0) {
    const auto n = static_cast<double>(records);
    mean["mean_dpo_loss"] = sum_dpo / n;
    mean["mean_ce_loss"] = sum_ce / n;
    mean["mean_merged_loss"] = sum_merged / n;
  }
  out << ojson{{"mean", mean}}.dump() << '\n';
  result.summary = mean;
  if (opts.strict && !result.errors.empty()) result.exit_code = kExitFatal;
  return result;
}

}  // namespace longreward::app
