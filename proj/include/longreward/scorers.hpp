#pragma once

#include <cstddef>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "longreward/hashing.hpp"
#include "longreward/judge.hpp"
#include "longreward/parallel.hpp"
#include "longreward/parsers.hpp"
#include "longreward/retrieval.hpp"
#include "longreward/segmentation.hpp"
#include "longreward/templates.hpp"

namespace longreward {

struct LongContextPrompt {
  std::string id;
  std::string context;
  std::string query;
};

struct CandidateResponse {
  std::string prompt_id;
  std::size_t index = 0;
  std::string text;
};

struct FactualStatement {
  std::size_t ordinal = 0;
  std::string text;
};

struct SupportVerdict {
  std::size_t statement_ordinal = 0;
  double score = 0.0;
  std::vector<std::size_t> evidence_chunk_indices;
  std::string judge_analysis;
};

enum class Dimension { helpfulness, logicality, faithfulness, completeness };

inline std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::helpfulness: return "helpfulness";
    case Dimension::logicality: return "logicality";
    case Dimension::faithfulness: return "faithfulness";
    case Dimension::completeness: return "completeness";
  }
  return "unknown";
}

struct DimensionScores {
  double helpfulness = 0.0;
  double logicality = 0.0;
  double faithfulness = 0.0;
  double completeness = 0.0;
};

// Information pulled from one completeness chunk.
struct ChunkExtraction {
  std::size_t chunk_index = 0;
  PercentSpan span;
  std::vector<std::string> items;
};

struct RewardTrace {
  std::string helpfulness_analysis;
  std::string logicality_analysis;
  std::vector<FactualStatement> statements;
  std::vector<SupportVerdict> verdicts;
  std::vector<ChunkExtraction> extractions;
  std::string completeness_analysis;
  std::vector<std::string> warnings;
};

struct Reward {
  DimensionScores scores;
  double final = 0.0;
  RewardTrace trace;
};

class ScoreUnavailable : public std::runtime_error {
 public:
  ScoreUnavailable(Dimension dim, const std::string& reason)
      : std::runtime_error("score unavailable (" + std::string(to_string(dim)) + "): " + reason), dimension_(dim) {}
  Dimension dimension() const noexcept { return dimension_; }

 private:
  Dimension dimension_;
};

// 10 * (sum of support levels) / n. With no statements there is nothing
// unfaithful to penalise, so the score is 10.
inline double faithfulness_score(std::span<const double> support_levels) {
  if (support_levels.empty()) return 10.0;
  double sum = 0.0;
  for (double a : support_levels) sum += a;
  return 10.0 * sum / static_cast<double>(support_levels.size());
}

inline double final_reward(const DimensionScores& s) {
  return (s.helpfulness + s.logicality + s.faithfulness + s.completeness) / 4.0;
}

inline constexpr std::string_view kNoStatementsWarning =
    "no factual statements extracted; faithfulness set to 10";
inline constexpr std::string_view kEmptyEvidenceMarker = "(no relevant information found in the document)";

struct ScorerConfig {
  SegmentationConfig segmentation;
  RetrievalConfig retrieval;
  int parse_retries = 2;
  GenerationParams judge_params;  // temperature 0 by default
  std::size_t fan_out = 8;        // concurrent judge calls per scoring step
};

// Context chunks and their embeddings for faithfulness evidence lookup.
struct EvidenceIndex {
  std::vector<ContextChunk> chunks;
  std::vector<EmbeddingVector> embeddings;
};

inline EvidenceIndex build_evidence_index(std::string_view context, std::size_t chunk_tokens,
                                          const Tokenizer& tokenizer, Embedder& embedder) {
  EvidenceIndex index;
  index.chunks = chunk_by_tokens(context, chunk_tokens, tokenizer);
  std::vector<std::string> texts;
  texts.reserve(index.chunks.size());
  for (const auto& c : index.chunks) texts.push_back(c.text);
  if (!texts.empty()) index.embeddings = embedder.embed_batch(texts);
  if (index.embeddings.size() != index.chunks.size())
    throw TransportError("embedder returned " + std::to_string(index.embeddings.size()) + " vectors for " +
                         std::to_string(index.chunks.size()) + " chunks");
  return index;
}

// "[Fragment i]" blocks in retrieval rank order.
inline std::string render_fragments(const EvidenceIndex& index, std::span<const std::size_t> ranked) {
  std::string out;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (i > 0) out += "\n\n";
    out += "[Fragment " + std::to_string(i + 1) + "]\n";
    out += index.chunks.at(ranked[i]).text;
  }
  return out;
}

// Sections headed "[Document a% - b% related information]"; chunks with
// nothing relevant are dropped, and an all-empty document gets one explicit
// empty-evidence section.
inline std::string render_related_information(std::span<const ChunkExtraction> extractions) {
  std::string out;
  for (const auto& e : extractions) {
    if (e.items.empty()) continue;
    if (!out.empty()) out += "\n\n";
    out += "[Document " + std::to_string(e.span.start) + "% - " + std::to_string(e.span.end) +
           "% related information]";
    for (std::size_t i = 0; i < e.items.size(); ++i) out += "\n" + std::to_string(i + 1) + ". " + e.items[i];
  }
  if (out.empty()) out = "[Document 0% - 100% related information]\n" + std::string(kEmptyEvidenceMarker);
  return out;
}

struct FaithfulnessResult {
  double score = 0.0;
  std::vector<FactualStatement> statements;
  std::vector<SupportVerdict> verdicts;
  std::vector<std::string> warnings;
};

struct CompletenessResult {
  double score = 0.0;
  std::string analysis;
  std::vector<ChunkExtraction> extractions;
};

// Four-dimension judge reward for long-context responses. Per-context work
// (evidence chunks and embeddings, completeness extractions) is computed once
// and shared by every response to the same prompt.
class RewardModel {
 public:
  RewardModel(CompletionClient& judge, Embedder& embedder, const TemplateSet& templates, ScorerConfig config,
              const Tokenizer& tokenizer)
      : judge_(judge), embedder_(embedder), templates_(templates), config_(std::move(config)), tokenizer_(tokenizer) {
    if (config_.segmentation.retrieval_chunk_tokens == 0 || config_.segmentation.completeness_chunk_tokens == 0)
      throw std::invalid_argument("chunk sizes must be >= 1");
    if (config_.retrieval.top_k == 0) throw std::invalid_argument("top_k must be >= 1");
  }

  const ScorerConfig& config() const noexcept { return config_; }

  JudgeRating score_helpfulness(const LongContextPrompt& prompt, const CandidateResponse& response) {
    return rate(Dimension::helpfulness, TemplateId::helpfulness,
                {{"Query", prompt.query}, {"Model Response", response.text}});
  }

  JudgeRating score_logicality(const LongContextPrompt& prompt, const CandidateResponse& response) {
    return rate(Dimension::logicality, TemplateId::logicality,
                {{"Query", prompt.query}, {"Model Response", response.text}});
  }

  FaithfulnessResult score_faithfulness(const LongContextPrompt& prompt, const CandidateResponse& response) {
    constexpr auto dim = Dimension::faithfulness;
    FaithfulnessResult result;
    const auto break_prompt =
        templates_.get(TemplateId::fact_break).render({{"Query", prompt.query}, {"Model Response", response.text}});
    std::vector<std::string> texts = guarded(dim, [&] {
      return complete_with_retry(judge_, break_prompt, config_.judge_params, parse_statements, config_.parse_retries);
    });
    for (std::size_t i = 0; i < texts.size(); ++i) result.statements.push_back({i, texts[i]});

    if (texts.empty()) {
      result.score = faithfulness_score({});
      result.warnings.emplace_back(kNoStatementsWarning);
      return result;
    }

    const auto index = guarded(dim, [&] { return evidence_for(prompt.context); });
    if (index->chunks.empty()) {
      result.warnings.emplace_back("empty context; statements checked without fragments");
    }
    const auto statement_vectors = guarded(dim, [&] { return embedder_.embed_batch(texts); });
    if (statement_vectors.size() != texts.size())
      throw ScoreUnavailable(dim, "embedder returned wrong number of statement vectors");

    result.verdicts.resize(texts.size());
    guarded(dim, [&] {
      parallel_for(texts.size(), config_.fan_out, [&](std::size_t i) {
        std::vector<std::size_t> ranked;
        if (!index->chunks.empty())
          ranked = top_k_chunks(statement_vectors[i], index->embeddings, config_.retrieval.top_k);
        const auto check_prompt = templates_.get(TemplateId::fact_check)
                                      .render({{"Factual Statement", texts[i]},
                                               {"Fragments", render_fragments(*index, ranked)},
                                               {"Query", prompt.query}});
        auto level = complete_with_retry(judge_, check_prompt, config_.judge_params, parse_support_level,
                                         config_.parse_retries);
        result.verdicts[i] = SupportVerdict{i, level.score, std::move(ranked), std::move(level.analysis)};
      });
      return 0;
    });

    std::vector<double> levels;
    levels.reserve(result.verdicts.size());
    for (const auto& v : result.verdicts) levels.push_back(v.score);
    result.score = faithfulness_score(levels);
    return result;
  }

  CompletenessResult score_completeness(const LongContextPrompt& prompt, const CandidateResponse& response) {
    constexpr auto dim = Dimension::completeness;
    CompletenessResult result;
    result.extractions = *guarded(dim, [&] { return extractions_for(prompt); });
    const auto rating = rate(dim, TemplateId::completeness,
                             {{"Query", prompt.query},
                              {"Related Information", render_related_information(result.extractions)},
                              {"Model Response", response.text}});
    result.score = rating.score;
    result.analysis = rating.analysis;
    return result;
  }

  // All four dimensions and their mean. Throws ScoreUnavailable if any
  // dimension cannot be scored; no partial averages.
  Reward compute_reward(const LongContextPrompt& prompt, const CandidateResponse& response) {
    Reward reward;
    std::optional<JudgeRating> helpful, logical;
    std::optional<FaithfulnessResult> faithful;
    std::optional<CompletenessResult> complete;
    parallel_for(4, config_.fan_out > 1 ? 4 : 1, [&](std::size_t d) {
      switch (d) {
        case 0: helpful = score_helpfulness(prompt, response); break;
        case 1: logical = score_logicality(prompt, response); break;
        case 2: faithful = score_faithfulness(prompt, response); break;
        default: complete = score_completeness(prompt, response); break;
      }
    });
    reward.scores = {static_cast<double>(helpful->score), static_cast<double>(logical->score), faithful->score,
                     complete->score};
    reward.final = final_reward(reward.scores);
    reward.trace.helpfulness_analysis = std::move(helpful->analysis);
    reward.trace.logicality_analysis = std::move(logical->analysis);
    reward.trace.statements = std::move(faithful->statements);
    reward.trace.verdicts = std::move(faithful->verdicts);
    reward.trace.warnings = std::move(faithful->warnings);
    reward.trace.extractions = std::move(complete->extractions);
    reward.trace.completeness_analysis = std::move(complete->analysis);
    return reward;
  }

  // Drops memoised per-context state once every response to `prompt` is scored.
  void release_context(const LongContextPrompt& prompt) {
    std::lock_guard lock(memo_mutex_);
    evidence_.erase(sha256_hex(prompt.context));
    extractions_.erase(sha256_hex(prompt.context, prompt.query));
  }

 private:
  template <typename Fn>
  static auto guarded(Dimension dim, Fn&& fn) -> decltype(fn()) {
    try {
      return fn();
    } catch (const ScoreUnavailable&) {
      throw;
    } catch (const ParseExhausted& e) {
      throw ScoreUnavailable(dim, e.what());
    } catch (const TransportError& e) {
      throw ScoreUnavailable(dim, e.what());
    } catch (const RetrievalError& e) {
      throw ScoreUnavailable(dim, e.what());
    }
  }

  JudgeRating rate(Dimension dim, TemplateId id, const Bindings& bindings) {
    const auto rendered = templates_.get(id).render(bindings);
    return guarded(dim, [&] {
      return complete_with_retry(judge_, rendered, config_.judge_params, parse_bracket_rating, config_.parse_retries);
    });
  }

  // Memoised per distinct context (and query for extractions). The first
  // caller computes; concurrent callers wait on the same future.
  template <typename T, typename Fn>
  std::shared_ptr<const T> memo(std::map<std::string, std::shared_future<std::shared_ptr<const T>>>& table,
                                const std::string& key, Fn&& compute) {
    std::promise<std::shared_ptr<const T>> promise;
    std::shared_future<std::shared_ptr<const T>> future;
    bool owner = false;
    {
      std::lock_guard lock(memo_mutex_);
      auto it = table.find(key);
      if (it == table.end()) {
        future = promise.get_future().share();
        table.emplace(key, future);
        owner = true;
      } else {
        future = it->second;
      }
    }
    if (owner) {
      try {
        promise.set_value(std::make_shared<const T>(compute()));
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    return future.get();
  }

  std::shared_ptr<const EvidenceIndex> evidence_for(const std::string& context) {
    return memo<EvidenceIndex>(evidence_, sha256_hex(context), [&] {
      return build_evidence_index(context, config_.segmentation.retrieval_chunk_tokens, tokenizer_, embedder_);
    });
  }

  std::shared_ptr<const std::vector<ChunkExtraction>> extractions_for(const LongContextPrompt& prompt) {
    return memo<std::vector<ChunkExtraction>>(extractions_, sha256_hex(prompt.context, prompt.query), [&] {
      const auto chunks =
          chunk_by_tokens(prompt.context, config_.segmentation.completeness_chunk_tokens, tokenizer_);
      std::vector<ChunkExtraction> out(chunks.size());
      parallel_for(chunks.size(), config_.fan_out, [&](std::size_t i) {
        const auto rendered = templates_.get(TemplateId::extract_info)
                                  .render({{"Context Chunk", chunks[i].text}, {"Query", prompt.query}});
        // The extraction parser never rejects, so no retries are needed.
        auto items = parse_relevant_info(judge_.complete(rendered, config_.judge_params));
        out[i] = ChunkExtraction{i, chunk_percent_span(chunks[i], prompt.context.size()), std::move(items)};
      });
      return out;
    });
  }

  CompletionClient& judge_;
  Embedder& embedder_;
  const TemplateSet& templates_;
  ScorerConfig config_;
  const Tokenizer& tokenizer_;

  std::mutex memo_mutex_;
  std::map<std::string, std::shared_future<std::shared_ptr<const EvidenceIndex>>> evidence_;
  std::map<std::string, std::shared_future<std::shared_ptr<const std::vector<ChunkExtraction>>>> extractions_;
};

}  // namespace longreward
