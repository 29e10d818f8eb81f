#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relatedness/csv.hpp"
#include "relatedness/error.hpp"
#include "relatedness/label.hpp"
#include "relatedness/numeric.hpp"

namespace relatedness {

using Lexicon = std::unordered_map<std::string, double>;

/// Sums token valences; above +margin is positive, below -margin negative.
inline SentimentLabel classify_lexicon(std::string_view clean, const Lexicon& lexicon, double margin = 0.0) {
  double total = 0.0;
  std::size_t i = 0;
  while (i < clean.size()) {
    while (i < clean.size() && clean[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < clean.size() && clean[i] != ' ') ++i;
    if (i == start) continue;
    if (const auto it = lexicon.find(std::string(clean.substr(start, i - start))); it != lexicon.end())
      total += it->second;
  }
  if (total > margin) return SentimentLabel::positive;
  if (total < -margin) return SentimentLabel::negative;
  return SentimentLabel::neutral;
}

struct WeightedLabel {
  SentimentLabel label = SentimentLabel::neutral;
  double weight = 1.0;
};

/// sum(value * weight) / sum(weight), with positive = +1, neutral = 0,
/// negative = -1. Folded in input order.
inline double weighted_average(std::span<const WeightedLabel> labels) {
  if (labels.empty()) fail(ErrorKind::arity, "weighted average of an empty label list");
  double numerator = 0.0;
  double denominator = 0.0;
  for (const auto& item : labels) {
    if (!(item.weight > 0.0)) fail(ErrorKind::arity, "label weights must be positive");
    numerator += value_of(item.label) * item.weight;
    denominator += item.weight;
  }
  return std::clamp(numerator / denominator, -1.0, 1.0);
}

/// Proportion of each label that occurs at least once.
inline std::map<SentimentLabel, double> distribution(std::span<const SentimentLabel> labels) {
  if (labels.empty()) fail(ErrorKind::arity, "distribution of an empty label list");
  std::map<SentimentLabel, std::size_t> counts;
  for (auto label : labels) ++counts[label];
  std::map<SentimentLabel, double> out;
  for (const auto& [label, count] : counts)
    out[label] = static_cast<double>(count) / static_cast<double>(labels.size());
  return out;
}

inline double accuracy(std::span<const SentimentLabel> predicted, std::span<const SentimentLabel> gold) {
  if (predicted.size() != gold.size())
    fail(ErrorKind::arity, "accuracy needs equal-length lists (" + std::to_string(predicted.size()) + " vs " +
                               std::to_string(gold.size()) + ")");
  if (predicted.empty()) fail(ErrorKind::arity, "accuracy of empty lists");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == gold[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

struct SentimentSummary {
  std::map<SentimentLabel, std::size_t> counts;  // all three labels present
  std::map<SentimentLabel, double> proportions;
  double weighted_average = 0.0;
  double total_weight = 0.0;
  std::size_t size = 0;
};

inline SentimentSummary summarize(std::span<const WeightedLabel> labels) {
  SentimentSummary summary;
  summary.weighted_average = weighted_average(labels);
  std::vector<SentimentLabel> plain;
  plain.reserve(labels.size());
  for (auto label : all_labels) summary.counts[label] = 0;
  for (const auto& item : labels) {
    ++summary.counts[item.label];
    summary.total_weight += item.weight;
    plain.push_back(item.label);
  }
  summary.proportions = distribution(plain);
  summary.size = labels.size();
  return summary;
}

// ---------------------------------------------------------------------------
// Label sources on disk

/// CSV "token,valence" (header optional).
inline Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::parse, "cannot open '" + path + "'");
  Lexicon lexicon;
  csv::Reader reader(in);
  bool first = true;
  while (auto record = reader.next()) {
    if (record->size() == 1 && record->front().empty()) continue;
    if (record->size() != 2) fail(ErrorKind::parse, path + ": line " + std::to_string(reader.line()) + ": expected token,valence");
    const auto valence = parse_double((*record)[1]);
    if (!valence) {
      if (first) {
        first = false;
        continue;
      }
      fail(ErrorKind::parse, path + ": line " + std::to_string(reader.line()) + ": non-numeric valence");
    }
    first = false;
    lexicon[(*record)[0]] = *valence;
  }
  return lexicon;
}

/// CSV "comment_id,label" with a header row; labels positive/negative/neutral.
inline std::unordered_map<std::string, SentimentLabel> load_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::parse, "cannot open '" + path + "'");
  std::unordered_map<std::string, SentimentLabel> out;
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) return out;
  if (header->size() != 2) fail(ErrorKind::schema, path + ": expected header comment_id,label");
  while (auto record = reader.next()) {
    if (record->size() == 1 && record->front().empty()) continue;
    if (record->size() != 2) fail(ErrorKind::parse, path + ": line " + std::to_string(reader.line()) + ": expected comment_id,label");
    const auto label = parse_label((*record)[1]);
    if (!label) fail(ErrorKind::parse, path + ": line " + std::to_string(reader.line()) + ": unknown label '" + (*record)[1] + "'");
    out[(*record)[0]] = *label;
  }
  return out;
}

}  // namespace relatedness
