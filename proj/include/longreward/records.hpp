#pragma once

#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "longreward/dpo_math.hpp"
#include "longreward/pair_builder.hpp"
#include "longreward/scorers.hpp"

// JSONL record schemas for prompts, scored responses and preference pairs.

namespace longreward {

using ojson = nlohmann::ordered_json;

class RecordError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PromptRecord {
  LongContextPrompt prompt;
  std::optional<std::vector<std::string>> responses;
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw RecordError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

inline std::string require_string(const nlohmann::json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_string()) throw RecordError(std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

inline double require_number(const nlohmann::json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_number()) throw RecordError(std::string("field \"") + key + "\" must be a number");
  return v.get<double>();
}

}  // namespace detail

inline PromptRecord parse_prompt_record(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw RecordError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw RecordError("record must be a JSON object");
  PromptRecord rec;
  rec.prompt.id = detail::require_string(j, "id");
  rec.prompt.context = detail::require_string(j, "context");
  rec.prompt.query = detail::require_string(j, "query");
  if (rec.prompt.id.empty()) throw RecordError("field \"id\" must be non-empty");
  if (detail::trim(rec.prompt.query).empty()) throw RecordError("field \"query\" must be non-empty");
  if (j.contains("responses") && !j["responses"].is_null()) {
    const auto& r = j["responses"];
    if (!r.is_array()) throw RecordError("field \"responses\" must be an array of strings");
    std::vector<std::string> responses;
    for (const auto& item : r) {
      if (!item.is_string()) throw RecordError("field \"responses\" must be an array of strings");
      responses.push_back(item.get<std::string>());
    }
    rec.responses = std::move(responses);
  }
  return rec;
}

inline ojson prompt_record_json(const PromptRecord& rec) {
  ojson j{{"id", rec.prompt.id}, {"context", rec.prompt.context}, {"query", rec.prompt.query}};
  if (rec.responses) j["responses"] = *rec.responses;
  return j;
}

inline ojson trace_json(const RewardTrace& t) {
  ojson statements = ojson::array();
  for (const auto& s : t.statements) statements.push_back({{"ordinal", s.ordinal}, {"text", s.text}});
  ojson verdicts = ojson::array();
  for (const auto& v : t.verdicts)
    verdicts.push_back({{"statement_ordinal", v.statement_ordinal},
                        {"score", v.score},
                        {"evidence_chunk_indices", v.evidence_chunk_indices},
                        {"judge_analysis", v.judge_analysis}});
  ojson extractions = ojson::array();
  for (const auto& e : t.extractions)
    extractions.push_back({{"chunk_index", e.chunk_index},
                           {"percent_start", e.span.start},
                           {"percent_end", e.span.end},
                           {"items", e.items}});
  return ojson{{"helpfulness_analysis", t.helpfulness_analysis},
               {"logicality_analysis", t.logicality_analysis},
               {"statements", statements},
               {"verdicts", verdicts},
               {"extractions", extractions},
               {"completeness_analysis", t.completeness_analysis},
               {"warnings", t.warnings}};
}

inline ojson reward_scores_json(const Reward& r) {
  return ojson{{"helpfulness", r.scores.helpfulness},
               {"logicality", r.scores.logicality},
               {"faithfulness", r.scores.faithfulness},
               {"completeness", r.scores.completeness},
               {"final", r.final}};
}

// {prompt_id, response_index, helpfulness, logicality, faithfulness, completeness, final, trace?}
struct ScoredRecord {
  std::string prompt_id;
  std::size_t response_index = 0;
  DimensionScores scores;
  double final = 0.0;
  std::optional<nlohmann::json> trace;
};

inline ojson scored_record_json(const std::string& prompt_id, std::size_t response_index, const Reward& reward,
                                bool emit_trace) {
  ojson j{{"prompt_id", prompt_id}, {"response_index", response_index}};
  const auto scores = reward_scores_json(reward);
  for (const auto& [k, v] : scores.items()) j[k] = v;
  if (emit_trace) j["trace"] = trace_json(reward.trace);
  return j;
}

inline ScoredRecord parse_scored_record(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  ScoredRecord rec;
  rec.prompt_id = detail::require_string(j, "prompt_id");
  const auto& idx = detail::require(j, "response_index");
  if (!idx.is_number_unsigned()) throw RecordError("response_index must be a nonnegative integer");
  rec.response_index = idx.get<std::size_t>();
  rec.scores.helpfulness = detail::require_number(j, "helpfulness");
  rec.scores.logicality = detail::require_number(j, "logicality");
  rec.scores.faithfulness = detail::require_number(j, "faithfulness");
  rec.scores.completeness = detail::require_number(j, "completeness");
  rec.final = detail::require_number(j, "final");
  if (j.contains("trace")) rec.trace = j["trace"];
  return rec;
}

// {prompt_id, context, query, chosen, rejected, chosen_reward, rejected_reward}
struct PairRecord {
  std::string prompt_id;
  std::string context;
  std::string query;
  std::string chosen;
  std::string rejected;
  DimensionScores chosen_scores;
  double chosen_final = 0.0;
  DimensionScores rejected_scores;
  double rejected_final = 0.0;
};

inline ojson pair_record_json(const LongContextPrompt& prompt, const PreferencePair& pair) {
  return ojson{{"prompt_id", pair.prompt_id},
               {"context", prompt.context},
               {"query", prompt.query},
               {"chosen", pair.winner.text},
               {"rejected", pair.loser.text},
               {"chosen_reward", reward_scores_json(pair.winner_reward)},
               {"rejected_reward", reward_scores_json(pair.loser_reward)}};
}

inline PairRecord parse_pair_record(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  auto read_reward = [](const nlohmann::json& r, DimensionScores& s, double& final) {
    if (!r.is_object()) throw RecordError("reward must be an object");
    s.helpfulness = detail::require_number(r, "helpfulness");
    s.logicality = detail::require_number(r, "logicality");
    s.faithfulness = detail::require_number(r, "faithfulness");
    s.completeness = detail::require_number(r, "completeness");
    final = detail::require_number(r, "final");
  };
  PairRecord rec;
  rec.prompt_id = detail::require_string(j, "prompt_id");
  rec.context = detail::require_string(j, "context");
  rec.query = detail::require_string(j, "query");
  rec.chosen = detail::require_string(j, "chosen");
  rec.rejected = detail::require_string(j, "rejected");
  read_reward(detail::require(j, "chosen_reward"), rec.chosen_scores, rec.chosen_final);
  read_reward(detail::require(j, "rejected_reward"), rec.rejected_scores, rec.rejected_final);
  return rec;
}

// {policy_logp_winner, ref_logp_winner, policy_logp_loser, ref_logp_loser}
inline dpo::PolicyLogProbs<double> parse_logprob_record(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw RecordError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw RecordError("record must be a JSON object");
  dpo::PolicyLogProbs<double> lp;
  lp.policy_logp_winner = detail::require_number(j, "policy_logp_winner");
  lp.ref_logp_winner = detail::require_number(j, "ref_logp_winner");
  lp.policy_logp_loser = detail::require_number(j, "policy_logp_loser");
  lp.ref_logp_loser = detail::require_number(j, "ref_logp_loser");
  return lp;
}

}  // namespace longreward
