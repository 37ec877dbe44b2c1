#pragma once

#include <array>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "longreward/default_templates.hpp"

namespace longreward {

enum class TemplateId { helpfulness, logicality, fact_break, fact_check, extract_info, completeness };

inline constexpr std::array<TemplateId, 6> kAllTemplateIds = {
    TemplateId::helpfulness, TemplateId::logicality,   TemplateId::fact_break,
    TemplateId::fact_check,  TemplateId::extract_info, TemplateId::completeness};

inline std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::helpfulness: return "helpfulness";
    case TemplateId::logicality: return "logicality";
    case TemplateId::fact_break: return "fact_break";
    case TemplateId::fact_check: return "fact_check";
    case TemplateId::extract_info: return "extract_info";
    case TemplateId::completeness: return "completeness";
  }
  return "unknown";
}

inline std::string_view default_template_body(TemplateId id) {
  switch (id) {
    case TemplateId::helpfulness: return default_templates::helpfulness;
    case TemplateId::logicality: return default_templates::logicality;
    case TemplateId::fact_break: return default_templates::fact_break;
    case TemplateId::fact_check: return default_templates::fact_check;
    case TemplateId::extract_info: return default_templates::extract_info;
    case TemplateId::completeness: return default_templates::completeness;
  }
  return {};
}

class MissingPlaceholderError : public std::invalid_argument {
 public:
  explicit MissingPlaceholderError(std::vector<std::string> names)
      : std::invalid_argument(make_message(names)), names_(std::move(names)) {}

  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  static std::string make_message(const std::vector<std::string>& names) {
    std::string msg = "unfilled template placeholders:";
    for (const auto& n : names) msg += " {" + n + "}";
    return msg;
  }
  std::vector<std::string> names_;
};

using Bindings = std::map<std::string, std::string, std::less<>>;

namespace detail {

inline bool is_placeholder_name(std::string_view name) {
  if (name.empty() || name.size() > 64 || !std::isalpha(static_cast<unsigned char>(name.front()))) return false;
  for (char c : name) {
    const auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || c == ' ' || c == '_' || c == '-')) return false;
  }
  return name.back() != ' ';
}

// Walks a template body, calling on_text for literal runs and on_slot for
// each {name}. "{{" and "}}" are literal braces.
template <typename OnText, typename OnSlot>
void scan_template(std::string_view body, OnText&& on_text, OnSlot&& on_slot) {
  std::size_t i = 0;
  std::size_t literal_start = 0;
  auto flush = [&](std::size_t upto) {
    if (upto > literal_start) on_text(body.substr(literal_start, upto - literal_start));
  };
  while (i < body.size()) {
    const char c = body[i];
    if ((c == '{' || c == '}') && i + 1 < body.size() && body[i + 1] == c) {
      flush(i);
      on_text(body.substr(i, 1));
      i += 2;
      literal_start = i;
      continue;
    }
    if (c == '{') {
      const auto close = body.find('}', i + 1);
      if (close != std::string_view::npos) {
        const auto name = body.substr(i + 1, close - i - 1);
        if (is_placeholder_name(name)) {
          flush(i);
          on_slot(name);
          i = close + 1;
          literal_start = i;
          continue;
        }
      }
    }
    ++i;
  }
  flush(body.size());
}

}  // namespace detail

// A judge prompt with {name} placeholders and few-shot example slots
// named "Example 1", "Example 2", ...
struct PromptTemplate {
  TemplateId id = TemplateId::helpfulness;
  std::string body;
  std::vector<std::string> few_shot_examples;

  static PromptTemplate stock(TemplateId id) { return {id, std::string(default_template_body(id)), {}}; }

  // Distinct placeholder names in order of first appearance.
  std::vector<std::string> placeholders() const {
    std::vector<std::string> names;
    detail::scan_template(
        body, [](std::string_view) {},
        [&](std::string_view name) {
          for (const auto& n : names)
            if (n == name) return;
          names.emplace_back(name);
        });
    return names;
  }

  // Substitutes bindings verbatim. "Example k" slots not present in
  // `bindings` take few_shot_examples[k-1], or empty text when absent.
  std::string render(const Bindings& bindings) const {
    std::string out;
    out.reserve(body.size() + 256);
    std::vector<std::string> missing;
    detail::scan_template(
        body, [&](std::string_view text) { out.append(text); },
        [&](std::string_view name) {
          if (auto it = bindings.find(name); it != bindings.end()) {
            out.append(it->second);
            return;
          }
          if (auto k = example_slot(name)) {
            if (*k >= 1 && *k <= few_shot_examples.size()) out.append(few_shot_examples[*k - 1]);
            return;
          }
          for (const auto& m : missing)
            if (m == name) return;
          missing.emplace_back(name);
        });
    if (!missing.empty()) throw MissingPlaceholderError(std::move(missing));
    return out;
  }

 private:
  static std::optional<std::size_t> example_slot(std::string_view name) {
    constexpr std::string_view prefix = "Example ";
    if (name.size() <= prefix.size() || name.substr(0, prefix.size()) != prefix) return std::nullopt;
    std::size_t k = 0;
    for (char c : name.substr(prefix.size())) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
      k = k * 10 + static_cast<std::size_t>(c - '0');
      if (k > 1000) return std::nullopt;
    }
    return k;
  }
};

// Splits an examples file into entries separated by lines consisting of "---".
inline std::vector<std::string> parse_examples_file(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  std::size_t pos = 0;
  auto push = [&] {
    while (!current.empty() && (current.back() == '\n' || current.back() == '\r')) current.pop_back();
    std::size_t lead = 0;
    while (lead < current.size() && (current[lead] == '\n' || current[lead] == '\r')) ++lead;
    current.erase(0, lead);
    if (!current.empty()) out.push_back(current);
    current.clear();
  };
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line == "---") {
      push();
    } else {
      current.append(text.substr(pos, nl - pos));
      if (nl < text.size()) current.push_back('\n');
    }
    if (nl == text.size()) break;
    pos = nl + 1;
  }
  push();
  return out;
}

// The six judge prompts. Files `<id>.txt` (and optional `<id>.examples.txt`)
// in a directory override the stock prompts one by one.
class TemplateSet {
 public:
  TemplateSet() {
    for (auto id : kAllTemplateIds) templates_.push_back(PromptTemplate::stock(id));
  }

  static TemplateSet load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
      throw std::runtime_error("template directory not found: " + dir.string());
    TemplateSet set;
    for (auto& t : set.templates_) {
      const auto name = std::string(to_string(t.id));
      if (auto body = read_file(dir / (name + ".txt"))) t.body = std::move(*body);
      if (auto ex = read_file(dir / (name + ".examples.txt"))) t.few_shot_examples = parse_examples_file(*ex);
    }
    return set;
  }

  const PromptTemplate& get(TemplateId id) const { return templates_.at(static_cast<std::size_t>(id)); }
  PromptTemplate& get(TemplateId id) { return templates_.at(static_cast<std::size_t>(id)); }

 private:
  static std::optional<std::string> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::vector<PromptTemplate> templates_;
};

}  // namespace longreward
