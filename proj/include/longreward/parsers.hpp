#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace longreward {

enum class ParseErrorKind { no_rating_found, rating_out_of_range, invalid_rating, no_verdict_found };

inline std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::no_rating_found: return "NoRatingFound";
    case ParseErrorKind::rating_out_of_range: return "RatingOutOfRange";
    case ParseErrorKind::invalid_rating: return "InvalidRating";
    case ParseErrorKind::no_verdict_found: return "NoVerdictFound";
  }
  return "ParseError";
}

// Raised when a judge answer does not carry the expected verdict; callers
// treat it as a reason to ask the judge again.
class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}
  ParseErrorKind kind() const noexcept { return kind_; }

 private:
  ParseErrorKind kind_;
};

struct JudgeRating {
  std::string analysis;
  int score = 0;
};

struct SupportLevel {
  std::string analysis;
  double score = 0.0;  // 1.0, 0.5 or 0.0
};

namespace detail {

inline bool is_ascii_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && is_ascii_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ascii_space(s.back())) s.remove_suffix(1);
  return s;
}

inline char ascii_lower(char c) noexcept {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline bool iequals(std::string_view a, std::string_view b) noexcept {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (ascii_lower(a[i]) != ascii_lower(b[i])) return false;
  return true;
}

// Last case-insensitive occurrence of needle in hay.
inline std::optional<std::size_t> rfind_icase(std::string_view hay, std::string_view needle) noexcept {
  if (needle.empty() || needle.size() > hay.size()) return std::nullopt;
  for (std::size_t i = hay.size() - needle.size() + 1; i-- > 0;)
    if (iequals(hay.substr(i, needle.size()), needle)) return i;
  return std::nullopt;
}

enum class NumberShape { not_a_number, integer, fractional };

inline NumberShape classify_number(std::string_view s) noexcept {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
  const std::size_t int_start = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == int_start) return NumberShape::not_a_number;
  if (i == s.size()) return NumberShape::integer;
  if (s[i] != '.') return NumberShape::not_a_number;
  ++i;
  const std::size_t frac_start = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == frac_start || i != s.size()) return NumberShape::not_a_number;
  return NumberShape::fractional;
}

}  // namespace detail

// Reads the final "[[N]]" verdict. Only the last numeric double-bracket
// group counts, so ratings echoed from few-shot examples are ignored.
inline JudgeRating parse_bracket_rating(std::string_view output) {
  std::optional<std::size_t> match_pos;
  std::string_view match_inner;
  std::size_t close = 0;
  for (std::size_t i = output.find("[["); i != std::string_view::npos; i = output.find("[[", i + 1)) {
    if (close < i + 2) close = output.find("]]", i + 2);
    if (close == std::string_view::npos) break;
    const auto inner = detail::trim(output.substr(i + 2, close - i - 2));
    if (detail::classify_number(inner) != detail::NumberShape::not_a_number) {
      match_pos = i;
      match_inner = inner;
    }
  }
  if (!match_pos) throw ParseError(ParseErrorKind::no_rating_found, "no [[rating]] in judge output");

  const std::string shown = "[[" + std::string(match_inner) + "]]";
  if (detail::classify_number(match_inner) == detail::NumberShape::fractional)
    throw ParseError(ParseErrorKind::invalid_rating, shown + " is not an integer rating");
  std::string_view digits = match_inner;
  bool negative = false;
  if (digits.front() == '-' || digits.front() == '+') {
    negative = digits.front() == '-';
    digits.remove_prefix(1);
  }
  while (digits.size() > 1 && digits.front() == '0') digits.remove_prefix(1);
  int value = 0;
  if (digits.size() > 2) {
    value = 100;  // anything this long is out of range
  } else {
    for (char c : digits) value = value * 10 + (c - '0');
  }
  if ((negative && value != 0) || value > 10)
    throw ParseError(ParseErrorKind::rating_out_of_range, shown + " is outside 0-10");
  return JudgeRating{std::string(output.substr(0, *match_pos)), value};
}

// Inner texts of <statement>...</statement> spans, trimmed, empty ones dropped.
inline std::vector<std::string> parse_statements(std::string_view output) {
  constexpr std::string_view open = "<statement>";
  constexpr std::string_view close = "</statement>";
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    auto start = output.find(open, pos);
    if (start == std::string_view::npos) break;
    const auto end = output.find(close, start + open.size());
    if (end == std::string_view::npos) break;
    // An unclosed <statement> followed by another: the innermost opening wins.
    for (auto next = output.find(open, start + open.size()); next != std::string_view::npos && next < end;
         next = output.find(open, next + open.size()))
      start = next;
    const auto inner = detail::trim(output.substr(start + open.size(), end - start - open.size()));
    if (!inner.empty()) out.emplace_back(inner);
    pos = end + close.size();
  }
  return out;
}

// Maps the last support marker in the answer to 1.0 / 0.5 / 0.0.
inline SupportLevel parse_support_level(std::string_view output) {
  struct Marker {
    std::string_view text;
    double score;
  };
  constexpr Marker markers[] = {
      {"[[Fully supported]]", 1.0}, {"[[Partially supported]]", 0.5}, {"[[No support]]", 0.0}};
  std::optional<std::size_t> best_pos;
  double best_score = 0.0;
  for (const auto& m : markers) {
    if (auto p = detail::rfind_icase(output, m.text); p && (!best_pos || *p > *best_pos)) {
      best_pos = p;
      best_score = m.score;
    }
  }
  if (!best_pos) throw ParseError(ParseErrorKind::no_verdict_found, "no support verdict in judge output");
  return SupportLevel{std::string(output.substr(0, *best_pos)), best_score};
}

inline constexpr std::string_view kNoRelevantInformation = "No relevant information";

// Items of a numbered (or bulleted) list; the no-information sentinel
// yields an empty list.
inline std::vector<std::string> parse_relevant_info(std::string_view output) {
  auto is_sentinel = [](std::string_view s) {
    s = detail::trim(s);
    while (!s.empty() && (s.front() == '"' || s.front() == '\'' || s.front() == '`')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == '"' || s.back() == '\'' || s.back() == '`' || s.back() == '.'))
      s.remove_suffix(1);
    return detail::iequals(detail::trim(s), kNoRelevantInformation);
  };

  const auto body = detail::trim(output);
  if (body.empty() || is_sentinel(body)) return {};

  std::vector<std::string> items;
  std::vector<std::string> loose;  // non-item lines, used when no list markers appear
  std::size_t pos = 0;
  while (pos <= body.size()) {
    auto nl = body.find('\n', pos);
    if (nl == std::string_view::npos) nl = body.size();
    const auto line = detail::trim(body.substr(pos, nl - pos));
    pos = nl + 1;

    if (!line.empty() && line.find_first_not_of("\"`'") != std::string_view::npos) {
      std::size_t i = 0;
      while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
      std::optional<std::string_view> item;
      if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
        item = detail::trim(line.substr(i + 1));
      } else if (line.size() >= 2 && (line[0] == '-' || line[0] == '*') && line[1] == ' ') {
        item = detail::trim(line.substr(2));
      }
      if (item) {
        if (!item->empty() && !is_sentinel(*item)) items.emplace_back(*item);
      } else if (!items.empty()) {
        items.back().append(" ").append(line);
      } else {
        loose.emplace_back(line);
      }
    }
    if (nl >= body.size()) break;
  }
  if (!items.empty()) return items;

  std::string joined;
  for (const auto& l : loose) {
    if (!joined.empty()) joined.push_back(' ');
    joined.append(l);
  }
  if (joined.empty() || detail::rfind_icase(joined, kNoRelevantInformation)) return {};
  return {joined};
}

}  // namespace longreward
