#include <gtest/gtest.h>

#include <random>
#include <string>

#include "longreward/segmentation.hpp"
#include "test_support.hpp"

using namespace longreward;
using longreward::testing::brute_force_split;
using longreward::testing::random_unicode;
using longreward::testing::words;

namespace {

std::string concat(const std::vector<ContextChunk>& chunks) {
  std::string s;
  for (const auto& c : chunks) s += c.text;
  return s;
}

// Every byte is a token, so boundaries regularly land inside codepoints.
class ByteTokenizer final : public Tokenizer {
 public:
  std::size_t count_tokens(std::string_view text) const override { return text.size(); }
  std::vector<std::size_t> token_starts(std::string_view text) const override {
    std::vector<std::size_t> s(text.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = i;
    return s;
  }
};

}  // namespace

TEST(WhitespaceTokenizer, CountsRuns) {
  WhitespaceTokenizer tok;
  EXPECT_EQ(tok.count_tokens(""), 0u);
  EXPECT_EQ(tok.count_tokens("   \n\t"), 0u);
  EXPECT_EQ(tok.count_tokens("a"), 1u);
  EXPECT_EQ(tok.count_tokens("  alpha  beta\ngamma "), 3u);
  EXPECT_EQ(tok.count_tokens("héllo wörld"), 2u);
}

TEST(WhitespaceTokenizer, ConcatenationBound) {
  WhitespaceTokenizer tok;
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const auto a = random_unicode(rng, 30);
    const auto b = random_unicode(rng, 30);
    EXPECT_LE(tok.count_tokens(a + b), tok.count_tokens(a) + tok.count_tokens(b));
    EXPECT_EQ(tok.count_tokens(a + " " + b), tok.count_tokens(a) + tok.count_tokens(b));
  }
}

TEST(ChunkByTokens, EmptyTextYieldsNoChunks) {
  EXPECT_TRUE(chunk_by_tokens("", 128, WhitespaceTokenizer{}).empty());
}

TEST(ChunkByTokens, ShortTextIsOneChunk) {
  const auto text = words(50);
  const auto chunks = chunk_by_tokens(text, 128, WhitespaceTokenizer{});
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_EQ(chunks[0].text, text);
  EXPECT_EQ(chunks[0].token_count, 50u);
  EXPECT_EQ(chunks[0].char_start, 0u);
  EXPECT_EQ(chunks[0].char_end, text.size());
}

TEST(ChunkByTokens, ThreeHundredTokensSplit128) {
  WhitespaceTokenizer tok;
  const auto text = words(300);
  const auto oracle = brute_force_split(text, 128, tok);
  ASSERT_EQ(oracle.size(), 3u);
  EXPECT_EQ(tok.count_tokens(oracle[0]), 128u);
  EXPECT_EQ(tok.count_tokens(oracle[1]), 128u);
  EXPECT_EQ(tok.count_tokens(oracle[2]), 44u);

  const auto chunks = chunk_by_tokens(text, 128, tok);
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_EQ(chunks[0].token_count, 128u);
  EXPECT_EQ(chunks[1].token_count, 128u);
  EXPECT_EQ(chunks[2].token_count, 44u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(chunks[i].text, oracle[i]);
  EXPECT_EQ(concat(chunks), text);
}

TEST(ChunkByTokens, WhitespaceStaysWithPrecedingChunk) {
  const auto chunks = chunk_by_tokens("  a  b\n c ", 2, WhitespaceTokenizer{});
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_EQ(chunks[0].text, "  a  b\n ");
  EXPECT_EQ(chunks[1].text, "c ");
}

TEST(ChunkByTokens, WhitespaceOnlyInputIsOneEmptyTokenChunk) {
  const auto chunks = chunk_by_tokens(" \n\t ", 4, WhitespaceTokenizer{});
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_EQ(chunks[0].token_count, 0u);
  EXPECT_EQ(chunks[0].text, " \n\t ");
}

TEST(ChunkByTokens, RejectsZeroSize) {
  EXPECT_THROW(chunk_by_tokens("a b", 0, WhitespaceTokenizer{}), std::invalid_argument);
}

TEST(ChunkByTokens, NeverSplitsCodepointsWithByteTokens) {
  ByteTokenizer tok;
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 300; ++iter) {
    const auto text = random_unicode(rng, 40);
    const std::size_t size = std::uniform_int_distribution<std::size_t>(4, 12)(rng);
    const auto chunks = chunk_by_tokens(text, size, tok);
    EXPECT_EQ(concat(chunks), text);
    for (const auto& c : chunks) {
      EXPECT_LE(c.token_count, size);
      EXPECT_FALSE(c.text.empty());
      if (c.char_start < text.size()) {
        EXPECT_NE(static_cast<unsigned char>(text[c.char_start]) & 0xC0, 0x80) << "chunk starts mid-codepoint";
      }
    }
  }
}

TEST(ChunkByTokens, PropertiesOnRandomUnicode) {
  WhitespaceTokenizer tok;
  std::mt19937_64 rng(2024);
  for (int iter = 0; iter < 1000; ++iter) {
    const auto text = random_unicode(rng, 80);
    const std::size_t size = std::uniform_int_distribution<std::size_t>(1, 20)(rng);
    const auto chunks = chunk_by_tokens(text, size, tok);
    ASSERT_EQ(concat(chunks), text);
    const auto oracle = brute_force_split(text, size, tok);
    ASSERT_EQ(chunks.size(), oracle.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      const auto& c = chunks[i];
      EXPECT_EQ(c.index, i);
      EXPECT_EQ(c.text, oracle[i]);
      EXPECT_EQ(text.substr(c.char_start, c.char_end - c.char_start), c.text);
      EXPECT_LE(c.token_count, size);
      EXPECT_LT(c.char_start, c.char_end);
      if (i + 1 < chunks.size()) {
        EXPECT_EQ(c.char_end, chunks[i + 1].char_start);
        EXPECT_EQ(c.token_count, size);
      }
    }
  }
}

TEST(ChunkPercentSpan, Halves) {
  EXPECT_EQ(chunk_percent_span(ContextChunk{0, "", 0, 500, 0}, 1000), (PercentSpan{0, 50}));
  EXPECT_EQ(chunk_percent_span(ContextChunk{1, "", 500, 1000, 0}, 1000), (PercentSpan{50, 100}));
}

TEST(ChunkPercentSpan, RoundsOutward) {
  // floor(33.3) = 33, ceil(66.7) = 67
  EXPECT_EQ(chunk_percent_span(ContextChunk{0, "", 333, 667, 0}, 1000), (PercentSpan{33, 67}));
  EXPECT_EQ(chunk_percent_span(ContextChunk{0, "", 0, 1, 0}, 3), (PercentSpan{0, 34}));
}

TEST(ChunkPercentSpan, RejectsBadInput) {
  EXPECT_THROW(chunk_percent_span(ContextChunk{0, "", 0, 1, 0}, 0), std::invalid_argument);
  EXPECT_THROW(chunk_percent_span(ContextChunk{0, "", 5, 5, 0}, 10), std::invalid_argument);
  EXPECT_THROW(chunk_percent_span(ContextChunk{0, "", 0, 11, 0}, 10), std::invalid_argument);
}

TEST(ChunkPercentSpan, AlwaysOrderedWithinBounds) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t total = std::uniform_int_distribution<std::size_t>(1, 100000)(rng);
    const std::size_t a = std::uniform_int_distribution<std::size_t>(0, total - 1)(rng);
    const std::size_t b = std::uniform_int_distribution<std::size_t>(a + 1, total)(rng);
    const auto span = chunk_percent_span(ContextChunk{0, "", a, b, 0}, total);
    EXPECT_GE(span.start, 0);
    EXPECT_LT(span.start, span.end);
    EXPECT_LE(span.end, 100);
  }
}
