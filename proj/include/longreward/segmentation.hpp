#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace longreward {

// Tokenizer contract used for context chunking. Implementations report the
// byte offset at which every token begins; a chunk boundary is only ever
// placed on one of those offsets (or the end of the text).
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  virtual std::size_t count_tokens(std::string_view text) const = 0;

  // Byte offsets of token starts, strictly increasing.
  virtual std::vector<std::size_t> token_starts(std::string_view text) const = 0;
};

// Reference tokenizer: a token is a maximal run of non-ASCII-whitespace bytes.
class WhitespaceTokenizer final : public Tokenizer {
 public:
  static constexpr bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  }

  std::size_t count_tokens(std::string_view text) const override {
    std::size_t count = 0;
    bool in_token = false;
    for (char c : text) {
      if (is_space(c)) {
        in_token = false;
      } else if (!in_token) {
        in_token = true;
        ++count;
      }
    }
    return count;
  }

  std::vector<std::size_t> token_starts(std::string_view text) const override {
    std::vector<std::size_t> starts;
    bool in_token = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (is_space(text[i])) {
        in_token = false;
      } else if (!in_token) {
        in_token = true;
        starts.push_back(i);
      }
    }
    return starts;
  }
};

struct ContextChunk {
  std::size_t index = 0;
  std::string text;
  std::size_t char_start = 0;  // byte offset, inclusive
  std::size_t char_end = 0;    // byte offset, exclusive
  std::size_t token_count = 0;
};

struct SegmentationConfig {
  std::size_t retrieval_chunk_tokens = 128;
  std::size_t completeness_chunk_tokens = 4096;
};

namespace detail {

inline bool is_utf8_continuation(unsigned char c) noexcept { return (c & 0xC0u) == 0x80u; }

// Largest codepoint boundary <= pos.
inline std::size_t codepoint_floor(std::string_view text, std::size_t pos) noexcept {
  if (pos >= text.size()) return text.size();
  while (pos > 0 && is_utf8_continuation(static_cast<unsigned char>(text[pos]))) --pos;
  return pos;
}

// Smallest codepoint boundary > pos (pos < size).
inline std::size_t codepoint_next(std::string_view text, std::size_t pos) noexcept {
  ++pos;
  while (pos < text.size() && is_utf8_continuation(static_cast<unsigned char>(text[pos]))) ++pos;
  return pos;
}

}  // namespace detail

// Splits `text` into contiguous, non-overlapping chunks of at most `size`
// tokens. Concatenating the chunk texts reproduces `text` exactly.
inline std::vector<ContextChunk> chunk_by_tokens(std::string_view text, std::size_t size,
                                                 const Tokenizer& tokenizer) {
  if (size == 0) throw std::invalid_argument("chunk size must be >= 1");
  std::vector<ContextChunk> chunks;
  if (text.empty()) return chunks;

  const std::vector<std::size_t> starts = tokenizer.token_starts(text);
  std::size_t pos = 0;
  std::size_t first_token = 0;  // first token start index >= pos
  while (pos < text.size()) {
    while (first_token < starts.size() && starts[first_token] < pos) ++first_token;
    // Tokens that begin exactly at pos (or, for the first chunk, before any
    // token) belong to this chunk; the boundary is the start of token #size.
    std::size_t take = size;
    std::size_t end = text.size();
    for (;;) {
      const std::size_t boundary_token = first_token + take;
      end = boundary_token < starts.size() ? starts[boundary_token] : text.size();
      end = detail::codepoint_floor(text, end);
      if (end <= pos) end = detail::codepoint_next(text, pos);
      const std::size_t count = tokenizer.count_tokens(text.substr(pos, end - pos));
      if (count <= size || take == 1) break;
      // Re-tokenizing the substring produced more tokens than the global
      // pass; shrink until the budget holds.
      --take;
    }
    ContextChunk chunk;
    chunk.index = chunks.size();
    chunk.char_start = pos;
    chunk.char_end = end;
    chunk.text = std::string(text.substr(pos, end - pos));
    chunk.token_count = tokenizer.count_tokens(chunk.text);
    chunks.push_back(std::move(chunk));
    pos = end;
  }
  return chunks;
}

struct PercentSpan {
  int start = 0;
  int end = 0;
  friend bool operator==(const PercentSpan&, const PercentSpan&) = default;
};

// Position of a chunk within its source, as whole percentages rounded outward.
inline PercentSpan chunk_percent_span(const ContextChunk& chunk, std::size_t total_chars) {
  if (total_chars == 0) throw std::invalid_argument("total_chars must be positive");
  if (chunk.char_start >= chunk.char_end || chunk.char_end > total_chars)
    throw std::invalid_argument("chunk offsets outside [0, total_chars]");
  const auto start = static_cast<std::uint64_t>(chunk.char_start);
  const auto end = static_cast<std::uint64_t>(chunk.char_end);
  const auto total = static_cast<std::uint64_t>(total_chars);
  PercentSpan span;
  span.start = static_cast<int>((100 * start) / total);
  span.end = static_cast<int>((100 * end + total - 1) / total);
  return span;
}

}  // namespace longreward
