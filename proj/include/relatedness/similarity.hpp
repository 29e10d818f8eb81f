#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "relatedness/embedding.hpp"
#include "relatedness/error.hpp"

namespace relatedness {

/// Cosine of the angle between a and b, clamped to [-1, 1].
/// Throws on length mismatch or a zero vector.
inline double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    fail(ErrorKind::dimension, "cosine of vectors with lengths " + std::to_string(a.size()) + " and " +
                                   std::to_string(b.size()));
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) fail(ErrorKind::undefined_similarity, "cosine similarity is undefined for a zero vector");
  return std::clamp(dot / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

struct Neighbor {
  std::string id;
  double score = 0.0;

  bool operator==(const Neighbor&) const = default;
};

struct SimilarityResult {
  std::string query_id;
  std::vector<Neighbor> neighbors;  // score descending, then id ascending
};

/// The k rows most cosine-similar to `query_id`, excluding the query and
/// zero rows. Fewer than k are returned when fewer candidates exist.
inline SimilarityResult top_k(const EmbeddingMatrix& matrix, const std::string& query_id, std::size_t k) {
  const std::size_t q = matrix.index_of(query_id);
  if (k == 0 || k + 1 > matrix.rows())
    fail(ErrorKind::arity, "top_k needs 1 <= k <= n-1 (k=" + std::to_string(k) + ", n=" + std::to_string(matrix.rows()) + ")");
  const auto query = matrix.row(q);
  if (is_zero(query)) fail(ErrorKind::undefined_similarity, "query '" + query_id + "' is a zero vector");

  SimilarityResult result{query_id, {}};
  result.neighbors.reserve(matrix.rows() - 1);
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    if (i == q || is_zero(matrix.row(i))) continue;
    result.neighbors.push_back({matrix.id(i), cosine(query, matrix.row(i))});
  }
  const auto by_rank = [](const Neighbor& a, const Neighbor& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  };
  const std::size_t keep = std::min(k, result.neighbors.size());
  std::partial_sort(result.neighbors.begin(), result.neighbors.begin() + static_cast<std::ptrdiff_t>(keep),
                    result.neighbors.end(), by_rank);
  result.neighbors.resize(keep);
  return result;
}

/// Mean cosine over all unordered pairs of the listed rows, summed in
/// row-major pair order.
inline double mean_pairwise_similarity(const EmbeddingMatrix& matrix, const std::vector<std::string>& ids) {
  if (ids.size() < 2) fail(ErrorKind::arity, "mean pairwise similarity needs at least 2 ids");
  const auto index = matrix.index();
  std::vector<std::size_t> rows;
  rows.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = index.find(id);
    if (it == index.end()) fail(ErrorKind::lookup, "unknown comment id '" + id + "'");
    rows.push_back(it->second);
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      sum += cosine(matrix.row(rows[i]), matrix.row(rows[j]));
      ++pairs;
    }
  }
  return std::clamp(sum / static_cast<double>(pairs), -1.0, 1.0);
}

}  // namespace relatedness
