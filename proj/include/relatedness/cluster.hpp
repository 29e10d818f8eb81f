#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relatedness/embedding.hpp"
#include "relatedness/error.hpp"
#include "relatedness/numeric.hpp"
#include "relatedness/similarity.hpp"

namespace relatedness {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

struct ClusterModel {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<double> centroids;   // k x dim, row-major
  std::vector<std::string> ids;    // matrix row order
  std::vector<std::size_t> labels; // labels[i] is the cluster of ids[i]
  double inertia = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> inertia_trace;  // inertia after every assignment step

  std::span<const double> centroid(std::size_t c) const { return {centroids.data() + c * dim, dim}; }

  std::size_t cluster_of(std::string_view id) const {
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == id) return labels[i];
    fail(ErrorKind::lookup, "unknown comment id '" + std::string(id) + "'");
  }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> out(k, 0);
    for (std::size_t label : labels) ++out[label];
    return out;
  }
};

namespace detail {

/// Nearest-centroid assignment (ties go to the lower index); returns inertia.
inline double assign(const EmbeddingMatrix& m, std::span<const double> centroids, std::size_t k,
                     std::vector<std::size_t>& labels) {
  const std::size_t d = m.dim();
  labels.resize(m.rows());
  double inertia = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_c = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double dist = squared_distance(m.row(i), centroids.subspan(c * d, d));
      if (dist < best) {
        best = dist;
        best_c = c;
      }
    }
    labels[i] = best_c;
    inertia += best;
  }
  return inertia;
}

/// Cluster means. An empty cluster's centroid moves to the point farthest
/// from its own (new) centroid; several empty clusters take successive
/// farthest points.
inline std::vector<double> update_centroids(const EmbeddingMatrix& m, const std::vector<std::size_t>& labels,
                                            std::size_t k) {
  const std::size_t d = m.dim();
  std::vector<double> sums(k * d, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    double* sum = sums.data() + labels[i] * d;
    for (std::size_t j = 0; j < d; ++j) sum[j] += row[j];
    ++counts[labels[i]];
  }
  for (std::size_t c = 0; c < k; ++c)
    if (counts[c] > 0)
      for (std::size_t j = 0; j < d; ++j) sums[c * d + j] /= static_cast<double>(counts[c]);

  std::vector<bool> taken;
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) continue;
    if (taken.empty()) taken.assign(m.rows(), false);
    double far = -1.0;
    std::size_t far_i = 0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (taken[i]) continue;
      const double dist = squared_distance(m.row(i), std::span<const double>(sums.data() + labels[i] * d, d));
      if (dist > far) {
        far = dist;
        far_i = i;
      }
    }
    taken[far_i] = true;
    std::copy(m.row(far_i).begin(), m.row(far_i).end(), sums.begin() + static_cast<std::ptrdiff_t>(c * d));
  }
  return sums;
}

}  // namespace detail

/// k-means++ seeding: first centre uniform, then D^2-weighted draws.
inline std::vector<double> kmeans_plus_plus(const EmbeddingMatrix& m, std::size_t k, std::uint64_t seed) {
  const std::size_t n = m.rows();
  const std::size_t d = m.dim();
  Random rng(seed);
  std::vector<double> centroids;
  centroids.reserve(k * d);
  std::size_t first = rng.index(n);
  centroids.insert(centroids.end(), m.row(first).begin(), m.row(first).end());

  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_distance(m.row(i), m.row(first));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : nearest) total += v;
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cumulative = 0.0;
      pick = n;
      std::size_t last_positive = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (nearest[i] <= 0.0) continue;
        last_positive = i;
        cumulative += nearest[i];
        if (cumulative > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) pick = last_positive;
    } else {
      pick = rng.index(n);
    }
    const auto chosen = m.row(pick);
    centroids.insert(centroids.end(), chosen.begin(), chosen.end());
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], squared_distance(m.row(i), chosen));
  }
  return centroids;
}

/// Lloyd iterations from the given centroids until the largest centroid
/// shift drops below `tol` (or is exactly zero) or `max_iter` updates ran.
inline ClusterModel kmeans_refine(const EmbeddingMatrix& m, std::vector<double> centroids, std::size_t max_iter,
                                  double tol) {
  const std::size_t d = m.dim();
  if (d == 0 || centroids.size() % d != 0) fail(ErrorKind::dimension, "centroid storage does not match matrix dim");
  ClusterModel model;
  model.k = centroids.size() / d;
  model.dim = d;
  model.ids = m.ids();
  model.inertia = detail::assign(m, centroids, model.k, model.labels);
  model.inertia_trace.push_back(model.inertia);

  while (model.iterations < max_iter) {
    std::vector<double> next = detail::update_centroids(m, model.labels, model.k);
    double shift = 0.0;
    for (std::size_t c = 0; c < model.k; ++c)
      shift = std::max(shift, std::sqrt(squared_distance(std::span<const double>(next.data() + c * d, d),
                                                         std::span<const double>(centroids.data() + c * d, d))));
    centroids = std::move(next);
    ++model.iterations;
    model.inertia = detail::assign(m, centroids, model.k, model.labels);
    model.inertia_trace.push_back(model.inertia);
    if (shift < tol || shift == 0.0) {
      model.converged = true;
      break;
    }
  }
  model.centroids = std::move(centroids);
  return model;
}

/// Seeded k-means: k-means++ initialization then Lloyd iterations.
/// Identical (matrix, k, seed) give bitwise-identical models.
inline ClusterModel kmeans_fit(const EmbeddingMatrix& m, std::size_t k, std::uint64_t seed, std::size_t max_iter = 300,
                               double tol = 1e-6) {
  if (k == 0 || k > m.rows())
    fail(ErrorKind::arity, "k must be in [1, n] (k=" + std::to_string(k) + ", n=" + std::to_string(m.rows()) + ")");
  if (max_iter == 0) fail(ErrorKind::usage, "max_iter must be positive");
  if (tol < 0.0) fail(ErrorKind::usage, "tol must be nonnegative");
  for (double v : m.values())
    if (!std::isfinite(v)) fail(ErrorKind::parse, "matrix contains a non-finite value");
  return kmeans_refine(m, kmeans_plus_plus(m, k, seed), max_iter, tol);
}

/// A model whose partition is given: centroids are member means (zero for
/// empty clusters) and inertia is measured against them.
inline ClusterModel model_from_labels(const EmbeddingMatrix& m, const std::vector<std::size_t>& labels, std::size_t k) {
  if (labels.size() != m.rows()) fail(ErrorKind::arity, "one label per matrix row is required");
  for (std::size_t label : labels)
    if (label >= k) fail(ErrorKind::arity, "label " + std::to_string(label) + " out of range for k=" + std::to_string(k));
  ClusterModel model;
  model.k = k;
  model.dim = m.dim();
  model.ids = m.ids();
  model.labels = labels;
  model.centroids.assign(k * m.dim(), 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.dim(); ++j) model.centroids[labels[i] * m.dim() + j] += m(i, j);
    ++counts[labels[i]];
  }
  for (std::size_t c = 0; c < k; ++c)
    if (counts[c] > 0)
      for (std::size_t j = 0; j < m.dim(); ++j) model.centroids[c * m.dim() + j] /= static_cast<double>(counts[c]);
  for (std::size_t i = 0; i < m.rows(); ++i) model.inertia += squared_distance(m.row(i), model.centroid(labels[i]));
  model.inertia_trace.push_back(model.inertia);
  model.converged = true;
  return model;
}

// ---------------------------------------------------------------------------
// Elbow method

struct ElbowOptions {
  std::size_t max_iter = 300;
  double tol = 1e-6;
  /// Largest normalized second difference below this means "no elbow";
  /// the scan then reports k_min.
  double min_elbow = 0.05;
};

struct ElbowScan {
  std::vector<std::size_t> ks;
  std::vector<double> inertias;
  std::size_t selected_k = 0;
  std::vector<ClusterModel> models;  // best model per K
};

/// Picks the K with the largest second difference of the inertia curve
/// scaled by its maximum. Ties go to the smaller K.
inline std::size_t select_elbow(const std::vector<std::size_t>& ks, const std::vector<double>& inertias,
                                double min_elbow = ElbowOptions{}.min_elbow) {
  if (ks.size() != inertias.size()) fail(ErrorKind::arity, "ks and inertias differ in length");
  if (ks.size() < 3) fail(ErrorKind::arity, "elbow selection needs at least one interior K");
  const double top = *std::max_element(inertias.begin(), inertias.end());
  if (!(top > 0.0)) return ks.front();
  std::vector<double> y(inertias.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = inertias[i] / top;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_i = 1;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    const double second = (y[i - 1] - y[i]) - (y[i] - y[i + 1]);
    if (second > best) {
      best = second;
      best_i = i;
    }
  }
  return best < min_elbow ? ks.front() : ks[best_i];
}

/// Best-of-restarts inertia for every K in [k_min, k_max]. Besides the
/// seeded restarts, each K > k_min also refines the best (K-1) solution
/// plus its worst-fit point, which keeps the curve nonincreasing.
inline ElbowScan elbow_scan(const EmbeddingMatrix& m, std::size_t k_min, std::size_t k_max, std::uint64_t seed,
                            std::size_t restarts, const ElbowOptions& options = {}) {
  if (k_min < 1 || k_min >= k_max || k_max > m.rows())
    fail(ErrorKind::arity, "elbow range needs 1 <= k_min < k_max <= n");
  if (k_max - k_min < 2) fail(ErrorKind::arity, "elbow range needs at least 3 values of K (an interior point)");
  if (restarts == 0) fail(ErrorKind::usage, "restarts must be positive");

  ElbowScan scan;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    ClusterModel best;
    bool have = false;
    for (std::size_t r = 0; r < restarts; ++r) {
      ClusterModel model = kmeans_fit(m, k, derive_seed(seed, k, r), options.max_iter, options.tol);
      if (!have || model.inertia < best.inertia) best = std::move(model), have = true;
    }
    if (!scan.models.empty()) {
      const ClusterModel& prev = scan.models.back();
      std::size_t worst = 0;
      double worst_dist = -1.0;
      for (std::size_t i = 0; i < m.rows(); ++i) {
        const double dist = squared_distance(m.row(i), prev.centroid(prev.labels[i]));
        if (dist > worst_dist) worst_dist = dist, worst = i;
      }
      std::vector<double> start = prev.centroids;
      start.insert(start.end(), m.row(worst).begin(), m.row(worst).end());
      ClusterModel grown = kmeans_refine(m, std::move(start), options.max_iter, options.tol);
      if (grown.inertia < best.inertia) best = std::move(grown);
    }
    scan.ks.push_back(k);
    scan.inertias.push_back(best.inertia);
    scan.models.push_back(std::move(best));
  }
  scan.selected_k = select_elbow(scan.ks, scan.inertias, options.min_elbow);
  return scan;
}

// ---------------------------------------------------------------------------
// Silhouette

enum class DistanceMetric { euclidean, cosine_distance };

inline double distance(std::span<const double> a, std::span<const double> b, DistanceMetric metric) {
  if (metric == DistanceMetric::euclidean) return std::sqrt(squared_distance(a, b));
  return 1.0 - cosine(a, b);
}

struct SilhouetteResult {
  double score = 0.0;
  bool sampled = false;
  std::size_t points = 0;  // points the score was computed over
};

/// Mean silhouette coefficient. Points in singleton clusters score 0, as do
/// points with a = b = 0. Above `max_points` rows, a seeded uniform subsample
/// of that size is scored instead (sampled = true).
inline SilhouetteResult silhouette_score(const EmbeddingMatrix& m, const ClusterModel& model, DistanceMetric metric,
                                         std::uint64_t seed = 0, std::size_t max_points = 5000) {
  if (model.labels.size() != m.rows()) fail(ErrorKind::arity, "model was not fitted on this matrix");
  if (model.k < 2) fail(ErrorKind::undefined_score, "silhouette score is undefined for k < 2");
  for (std::size_t size : model.sizes())
    if (size == 0) fail(ErrorKind::undefined_score, "silhouette score is undefined with an empty cluster");

  std::vector<std::size_t> points(m.rows());
  for (std::size_t i = 0; i < points.size(); ++i) points[i] = i;
  SilhouetteResult result;
  if (points.size() > max_points) {
    Random rng(seed);
    for (std::size_t i = 0; i < max_points; ++i) std::swap(points[i], points[i + rng.index(points.size() - i)]);
    points.resize(max_points);
    std::sort(points.begin(), points.end());
    result.sampled = true;
  }
  result.points = points.size();

  std::vector<std::size_t> counts(model.k, 0);
  for (std::size_t p : points) ++counts[model.labels[p]];

  std::vector<double> sums(model.k);
  double total = 0.0;
  for (std::size_t i : points) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j : points)
      if (j != i) sums[model.labels[j]] += distance(m.row(i), m.row(j), metric);
    const std::size_t own = model.labels[i];
    if (counts[own] <= 1) continue;
    const double a = sums[own] / static_cast<double>(counts[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < model.k; ++c)
      if (c != own && counts[c] > 0) b = std::min(b, sums[c] / static_cast<double>(counts[c]));
    if (!std::isfinite(b)) continue;
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  result.score = total / static_cast<double>(points.size());
  return result;
}

// ---------------------------------------------------------------------------
// Similarity-threshold admission

struct AdmittedClustering {
  ClusterModel model;
  double threshold = 0.0;
  std::set<std::size_t> admitted;
  std::vector<double> cohesion;          // per cluster: mean member-to-centroid cosine
  std::vector<std::string> unclustered;  // matrix row order

  bool is_admitted(std::size_t cluster) const { return admitted.contains(cluster); }
};

/// Keeps the clusters whose members point, on average, within `threshold`
/// cosine of their centroid. Zero-vector rows never count toward cohesion
/// and are always unclustered; a zero centroid or a cluster without valid
/// members has cohesion 0.
inline AdmittedClustering threshold_admit(const EmbeddingMatrix& m, const ClusterModel& model, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) fail(ErrorKind::usage, "admission threshold must be in (0, 1]");
  if (model.labels.size() != m.rows() || model.dim != m.dim()) fail(ErrorKind::arity, "model was not fitted on this matrix");

  AdmittedClustering out{model, threshold, {}, std::vector<double>(model.k, 0.0), {}};
  std::vector<std::size_t> members(model.k, 0);
  std::vector<bool> zero_row(m.rows(), false);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (is_zero(m.row(i))) {
      zero_row[i] = true;
      continue;
    }
    const std::size_t c = model.labels[i];
    if (is_zero(model.centroid(c))) continue;
    out.cohesion[c] += cosine(m.row(i), model.centroid(c));
    ++members[c];
  }
  for (std::size_t c = 0; c < model.k; ++c) {
    if (members[c] > 0) out.cohesion[c] /= static_cast<double>(members[c]);
    if (members[c] > 0 && out.cohesion[c] >= threshold) out.admitted.insert(c);
  }
  for (std::size_t i = 0; i < m.rows(); ++i)
    if (zero_row[i] || !out.admitted.contains(model.labels[i])) out.unclustered.push_back(m.id(i));
  return out;
}

}  // namespace relatedness
