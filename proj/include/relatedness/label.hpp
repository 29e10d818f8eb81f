#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>

namespace relatedness {

enum class SentimentLabel : int { negative = -1, neutral = 0, positive = 1 };

inline constexpr std::array<SentimentLabel, 3> all_labels{
    SentimentLabel::negative, SentimentLabel::neutral, SentimentLabel::positive};

constexpr double value_of(SentimentLabel label) noexcept { return static_cast<int>(label); }

constexpr std::string_view to_string(SentimentLabel label) noexcept {
  switch (label) {
    case SentimentLabel::negative: return "negative";
    case SentimentLabel::neutral: return "neutral";
    case SentimentLabel::positive: return "positive";
  }
  return "neutral";
}

/// Accepts names (any case, full or 3-letter) and the signed integers -1/0/+1.
inline std::optional<SentimentLabel> parse_label(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "positive" || s == "pos" || s == "1" || s == "+1") return SentimentLabel::positive;
  if (s == "negative" || s == "neg" || s == "-1") return SentimentLabel::negative;
  if (s == "neutral" || s == "neu" || s == "0") return SentimentLabel::neutral;
  return std::nullopt;
}

}  // namespace relatedness
