#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "longreward/judge.hpp"
#include "longreward/parallel.hpp"
#include "longreward/scorers.hpp"

namespace longreward {

struct SamplingConfig {
  std::size_t num_candidates = 10;
  double temperature = 1.0;
  std::uint64_t seed_base = 0;  // sample i is requested with seed seed_base + i
  int max_tokens = 4096;

  void validate() const {
    if (num_candidates < 2) throw std::invalid_argument("num_candidates must be >= 2");
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
  }
};

struct ScoredCandidate {
  CandidateResponse response;
  Reward reward;
};

struct PreferencePair {
  std::string prompt_id;
  CandidateResponse winner;
  CandidateResponse loser;
  Reward winner_reward;
  Reward loser_reward;
};

// What the policy sees: the document followed by the question.
inline std::string generation_prompt_text(const LongContextPrompt& prompt) {
  return prompt.context + "\n\n" + prompt.query;
}

// Draws `num_candidates` samples. Failed or blank generations are dropped
// (noted in `log`); survivors keep their sample ordinal as index.
inline std::vector<CandidateResponse> sample_candidates(const LongContextPrompt& prompt, CompletionClient& generator,
                                                        const SamplingConfig& cfg, std::size_t fan_out = 1,
                                                        std::vector<std::string>* log = nullptr) {
  cfg.validate();
  const auto text = generation_prompt_text(prompt);
  std::vector<std::optional<std::string>> slots(cfg.num_candidates);
  std::vector<std::string> errors(cfg.num_candidates);
  parallel_for(cfg.num_candidates, fan_out, [&](std::size_t i) {
    GenerationParams params;
    params.temperature = cfg.temperature;
    params.max_tokens = cfg.max_tokens;
    params.seed = cfg.seed_base + i;
    try {
      slots[i] = generator.complete(text, params);
    } catch (const TransportError& e) {
      errors[i] = e.what();
    }
  });
  std::vector<CandidateResponse> out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i]) {
      if (log) log->push_back("prompt " + prompt.id + " sample " + std::to_string(i) + ": " + errors[i]);
      continue;
    }
    if (detail::trim(*slots[i]).empty()) {
      if (log) log->push_back("prompt " + prompt.id + " sample " + std::to_string(i) + ": blank generation");
      continue;
    }
    out.push_back(CandidateResponse{prompt.id, i, std::move(*slots[i])});
  }
  return out;
}

// Highest- and lowest-reward candidates; ties go to the lower candidate
// index. Returns nullopt (skip) for fewer than two candidates or when every
// reward is equal.
inline std::optional<PreferencePair> select_pair(std::span<const ScoredCandidate> scored) {
  if (scored.size() < 2) return std::nullopt;
  const ScoredCandidate* best = &scored[0];
  const ScoredCandidate* worst = &scored[0];
  for (const auto& c : scored.subspan(1)) {
    const double r = c.reward.final;
    if (r > best->reward.final || (r == best->reward.final && c.response.index < best->response.index)) best = &c;
    if (r < worst->reward.final || (r == worst->reward.final && c.response.index < worst->response.index))
      worst = &c;
  }
  if (best->reward.final == worst->reward.final) return std::nullopt;
  return PreferencePair{best->response.prompt_id, best->response, worst->response, best->reward, worst->reward};
}

struct PromptOutcome {
  enum class Status { paired, skipped, failed };

  LongContextPrompt prompt;
  Status status = Status::skipped;
  std::optional<PreferencePair> pair;
  std::size_t candidates = 0;
  std::size_t scored = 0;
  std::string reason;
  std::vector<std::string> log;
};

// Sample -> score -> select for each prompt. Prompts run in windows of
// `prompt_parallelism`; outcomes are delivered in input order.
class PairBuilder {
 public:
  PairBuilder(CompletionClient& generator, RewardModel& reward_model, SamplingConfig sampling,
              std::size_t prompt_parallelism = 1, std::size_t fan_out = 8)
      : generator_(generator),
        reward_model_(reward_model),
        sampling_(sampling),
        prompt_parallelism_(std::max<std::size_t>(prompt_parallelism, 1)),
        fan_out_(std::max<std::size_t>(fan_out, 1)) {
    sampling_.validate();
  }

  PromptOutcome process(const LongContextPrompt& prompt) {
    PromptOutcome outcome;
    outcome.prompt = prompt;
    try {
      auto candidates = sample_candidates(prompt, generator_, sampling_, fan_out_, &outcome.log);
      outcome.candidates = candidates.size();
      std::vector<std::optional<ScoredCandidate>> slots(candidates.size());
      parallel_for(candidates.size(), fan_out_, [&](std::size_t i) {
        try {
          slots[i] = ScoredCandidate{candidates[i], reward_model_.compute_reward(prompt, candidates[i])};
        } catch (const ScoreUnavailable& e) {
          outcome_note(outcome, candidates[i].index, e.what());
        }
      });
      reward_model_.release_context(prompt);
      std::vector<ScoredCandidate> scored;
      for (auto& s : slots)
        if (s) scored.push_back(std::move(*s));
      outcome.scored = scored.size();
      outcome.pair = select_pair(scored);
      if (outcome.pair) {
        outcome.status = PromptOutcome::Status::paired;
      } else {
        outcome.status = PromptOutcome::Status::skipped;
        outcome.reason = scored.size() < 2 ? "fewer than two scored candidates" : "all candidate rewards equal";
      }
    } catch (const std::exception& e) {
      reward_model_.release_context(prompt);
      outcome.status = PromptOutcome::Status::failed;
      outcome.pair.reset();
      outcome.reason = e.what();
    }
    return outcome;
  }

  // Pulls prompts from `source` until it returns nullopt.
  void build_dataset(const std::function<std::optional<LongContextPrompt>()>& source,
                     const std::function<void(PromptOutcome&&)>& sink) {
    for (;;) {
      std::vector<LongContextPrompt> window;
      while (window.size() < prompt_parallelism_) {
        auto p = source();
        if (!p) break;
        window.push_back(std::move(*p));
      }
      if (window.empty()) return;
      std::vector<PromptOutcome> outcomes(window.size());
      parallel_for(window.size(), prompt_parallelism_, [&](std::size_t i) { outcomes[i] = process(window[i]); });
      for (auto& o : outcomes) sink(std::move(o));
    }
  }

 private:
  void outcome_note(PromptOutcome& outcome, std::size_t i, const std::string& what) {
    std::lock_guard lock(log_mutex_);
    outcome.log.push_back("prompt " + outcome.prompt.id + " candidate " + std::to_string(i) + ": " + what);
  }

  CompletionClient& generator_;
  RewardModel& reward_model_;
  SamplingConfig sampling_;
  std::size_t prompt_parallelism_;
  std::size_t fan_out_;
  std::mutex log_mutex_;
};

}  // namespace longreward
