#pragma once

// Categorical distributions and KL(P || Q) = sum_i P(i) log(P(i) / Q(i)).
// KL is unbounded above; values are reported raw, never normalized.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relatedness/cluster.hpp"
#include "relatedness/corpus.hpp"
#include "relatedness/error.hpp"
#include "relatedness/label.hpp"

namespace relatedness {

struct CategoricalDistribution {
  std::vector<std::string> categories;
  std::vector<double> probs;
};

inline constexpr double default_smoothing = 1e-6;

/// prob_i = (count_i + eps) / (total + eps * |categories|).
inline CategoricalDistribution from_counts(const std::vector<std::pair<std::string, std::uint64_t>>& counts,
                                           double smoothing_epsilon = default_smoothing) {
  if (smoothing_epsilon < 0.0) fail(ErrorKind::usage, "smoothing epsilon must be nonnegative");
  double total = 0.0;
  for (const auto& [name, count] : counts) total += static_cast<double>(count);
  if (total == 0.0) fail(ErrorKind::insufficient_data, "cannot build a distribution from all-zero counts");
  CategoricalDistribution dist;
  const double denom = total + smoothing_epsilon * static_cast<double>(counts.size());
  for (const auto& [name, count] : counts) {
    dist.categories.push_back(name);
    dist.probs.push_back((static_cast<double>(count) + smoothing_epsilon) / denom);
  }
  return dist;
}

enum class LogBase { natural, log2 };

constexpr std::string_view to_string(LogBase base) noexcept { return base == LogBase::natural ? "natural" : "log2"; }

inline LogBase parse_log_base(std::string_view name) {
  if (name == "natural" || name == "e" || name == "ln") return LogBase::natural;
  if (name == "log2" || name == "2") return LogBase::log2;
  fail(ErrorKind::usage, "unknown log base '" + std::string(name) + "' (expected natural or log2)");
}

/// KL(p || q). Terms with p_i = 0 contribute nothing; q_i = 0 with p_i > 0
/// is an error. Tiny negative rounding results are clamped to 0.
inline double kl_divergence(const CategoricalDistribution& p, const CategoricalDistribution& q,
                            LogBase base = LogBase::natural) {
  if (p.categories != q.categories) fail(ErrorKind::schema, "KL divergence needs identical category lists");
  if (p.probs.size() != p.categories.size() || q.probs.size() != q.categories.size())
    fail(ErrorKind::schema, "distribution has mismatched categories and probabilities");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    if (p.probs[i] == 0.0) continue;
    if (q.probs[i] == 0.0)
      fail(ErrorKind::infinite_divergence, "KL divergence is infinite: q('" + q.categories[i] + "') = 0 where p > 0");
    kl += p.probs[i] * std::log(p.probs[i] / q.probs[i]);
  }
  if (base == LogBase::log2) kl /= std::log(2.0);
  return kl < 0.0 ? 0.0 : kl;
}

// ---------------------------------------------------------------------------
// Temporal comparison

/// Maps comments onto a fixed category list; nullopt skips the comment.
struct Categorizer {
  std::string name;
  std::vector<std::string> categories;
  std::function<std::optional<std::size_t>(const Comment&)> categorize;
};

/// Categories negative, neutral, positive. `label_of` supplies each
/// comment's label (gold, predicted or lexicon); nullopt skips it.
inline Categorizer sentiment_categorizer(std::function<std::optional<SentimentLabel>(const Comment&)> label_of) {
  Categorizer out;
  out.name = "sentiment_labels";
  for (auto label : all_labels) out.categories.emplace_back(to_string(label));
  out.categorize = [label_of = std::move(label_of)](const Comment& c) -> std::optional<std::size_t> {
    const auto label = label_of(c);
    if (!label) return std::nullopt;
    return static_cast<std::size_t>(static_cast<int>(*label) + 1);
  };
  return out;
}

/// Categories "cluster_0" .. "cluster_{k-1}", looked up by comment id.
inline Categorizer cluster_categorizer(const ClusterModel& model) {
  Categorizer out;
  out.name = "cluster_assignments";
  for (std::size_t c = 0; c < model.k; ++c) out.categories.push_back("cluster_" + std::to_string(c));
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < model.ids.size(); ++i) by_id.emplace(model.ids[i], model.labels[i]);
  out.categorize = [by_id = std::move(by_id)](const Comment& c) -> std::optional<std::size_t> {
    const auto it = by_id.find(c.id);
    if (it == by_id.end()) return std::nullopt;
    return it->second;
  };
  return out;
}

struct DivergenceReport {
  std::string bucket_a;
  std::string bucket_b;
  std::string categorizer;
  double epsilon = default_smoothing;
  LogBase base = LogBase::natural;
  double kl = 0.0;
  CategoricalDistribution early;
  CategoricalDistribution late;
};

/// Buckets the corpus, counts categories per bucket over the shared
/// category list and returns KL(P_early || Q_late).
inline DivergenceReport temporal_divergence(const Corpus& corpus, const TimeBucket& early, const TimeBucket& late,
                                            const Categorizer& categorizer,
                                            double smoothing_epsilon = default_smoothing,
                                            LogBase base = LogBase::natural) {
  const auto buckets = bucket_by_time(corpus, {early, late});
  auto counts_for = [&](const TimeBucket& bucket) {
    std::vector<std::pair<std::string, std::uint64_t>> counts;
    for (const auto& name : categorizer.categories) counts.emplace_back(name, 0);
    std::uint64_t used = 0;
    for (const auto& c : buckets.at(bucket.label).comments) {
      if (const auto idx = categorizer.categorize(c)) {
        if (*idx >= counts.size()) fail(ErrorKind::schema, "categorizer produced an out-of-range category");
        ++counts[*idx].second;
        ++used;
      }
    }
    if (used == 0) fail(ErrorKind::insufficient_data, "bucket '" + bucket.label + "' has no categorized comments");
    return counts;
  };
  DivergenceReport report;
  report.bucket_a = early.label;
  report.bucket_b = late.label;
  report.categorizer = categorizer.name;
  report.epsilon = smoothing_epsilon;
  report.base = base;
  const auto early_counts = counts_for(early);
  const auto late_counts = counts_for(late);
  report.early = from_counts(early_counts, smoothing_epsilon);
  report.late = from_counts(late_counts, smoothing_epsilon);
  report.kl = kl_divergence(report.early, report.late, base);
  return report;
}

}  // namespace relatedness
