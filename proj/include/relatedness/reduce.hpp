#pragma once

// Principal component analysis via a cyclic Jacobi eigensolver on the d x d
// sample covariance. Intended for d up to a few hundred.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "relatedness/embedding.hpp"
#include "relatedness/error.hpp"

namespace relatedness {

struct SymmetricEigen {
  std::vector<double> values;   // descending
  std::vector<double> vectors;  // row i is the unit eigenvector for values[i]
};

/// Eigen-decomposes a symmetric n x n matrix (row-major).
inline SymmetricEigen jacobi_eigen(std::vector<double> a, std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto at = [n](std::vector<double>& m, std::size_t i, std::size_t j) -> double& { return m[i * n + j]; };

  double scale = 0.0;
  for (double x : a) scale += x * x;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += at(a, p, q) * at(a, p, q);
    if (off == 0.0 || off <= scale * 1e-32) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(a, p, q);
        if (apq == 0.0) continue;
        const double theta = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        at(a, p, p) -= t * apq;
        at(a, q, q) += t * apq;
        at(a, p, q) = at(a, q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double g = at(a, k, p);
          const double h = at(a, k, q);
          at(a, k, p) = at(a, p, k) = c * g - s * h;
          at(a, k, q) = at(a, q, k) = s * g + c * h;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double g = at(v, k, p);
          const double h = at(v, k, q);
          at(v, k, p) = c * g - s * h;
          at(v, k, q) = s * g + c * h;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return at(a, i, i) > at(a, j, j); });
  SymmetricEigen out{std::vector<double>(n), std::vector<double>(n * n)};
  for (std::size_t r = 0; r < n; ++r) {
    out.values[r] = at(a, order[r], order[r]);
    for (std::size_t k = 0; k < n; ++k) out.vectors[r * n + k] = at(v, k, order[r]);
  }
  return out;
}

struct PcaModel {
  std::vector<double> mean;                      // length d
  std::vector<double> components;                // r x d, row-major, orthonormal rows
  std::vector<double> explained_variance;        // length r, nonincreasing
  std::vector<double> explained_variance_ratio;  // length r
  std::size_t dim = 0;
  std::size_t rank = 0;  // r
  double total_variance = 0.0;

  std::span<const double> component(std::size_t i) const { return {components.data() + i * dim, dim}; }
};

/// Fits the top-r principal directions of the rows of `matrix`.
/// Each component's largest-magnitude entry is made positive.
inline PcaModel fit_pca(const EmbeddingMatrix& matrix, std::size_t r) {
  const std::size_t n = matrix.rows();
  const std::size_t d = matrix.dim();
  if (n < 2) fail(ErrorKind::arity, "PCA needs at least 2 rows");
  if (r < 1 || r > std::min(n, d))
    fail(ErrorKind::arity, "PCA rank must be in [1, " + std::to_string(std::min(n, d)) + "], got " + std::to_string(r));

  PcaModel model;
  model.dim = d;
  model.rank = r;
  model.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) model.mean[k] += matrix(i, k);
  for (double& m : model.mean) m /= static_cast<double>(n);

  std::vector<double> cov(d * d, 0.0);
  std::vector<double> centered(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) centered[k] = matrix(i, k) - model.mean[k];
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p; q < d; ++q) cov[p * d + q] += centered[p] * centered[q];
  }
  for (std::size_t p = 0; p < d; ++p) {
    for (std::size_t q = p; q < d; ++q) {
      cov[p * d + q] /= static_cast<double>(n - 1);
      cov[q * d + p] = cov[p * d + q];
    }
  }

  SymmetricEigen eig = jacobi_eigen(std::move(cov), d);
  const double largest = eig.values.empty() ? 0.0 : std::max(eig.values.front(), 0.0);
  const double noise_floor = largest * static_cast<double>(d) * 8.0 * std::numeric_limits<double>::epsilon();
  for (double& value : eig.values)
    if (value <= noise_floor) value = 0.0;
  for (double value : eig.values) model.total_variance += value;

  model.components.assign(eig.vectors.begin(), eig.vectors.begin() + static_cast<std::ptrdiff_t>(r * d));
  for (std::size_t c = 0; c < r; ++c) {
    double* row = model.components.data() + c * d;
    std::size_t pivot = 0;
    for (std::size_t k = 1; k < d; ++k)
      if (std::abs(row[k]) > std::abs(row[pivot])) pivot = k;
    if (row[pivot] < 0.0)
      for (std::size_t k = 0; k < d; ++k) row[k] = -row[k];
    model.explained_variance.push_back(eig.values[c]);
    model.explained_variance_ratio.push_back(model.total_variance > 0.0 ? eig.values[c] / model.total_variance : 0.0);
  }
  return model;
}

/// Projects rows onto the model's components: (row - mean) * components^T.
inline EmbeddingMatrix transform(const PcaModel& model, const EmbeddingMatrix& matrix) {
  if (matrix.dim() != model.dim)
    fail(ErrorKind::dimension, "PCA model expects dim " + std::to_string(model.dim) + ", matrix has " +
                                   std::to_string(matrix.dim()));
  EmbeddingMatrix out(matrix.ids(), model.rank);
  std::vector<double> centered(model.dim);
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    for (std::size_t k = 0; k < model.dim; ++k) centered[k] = matrix(i, k) - model.mean[k];
    for (std::size_t c = 0; c < model.rank; ++c) {
      const auto comp = model.component(c);
      double s = 0.0;
      for (std::size_t k = 0; k < model.dim; ++k) s += centered[k] * comp[k];
      out(i, c) = s;
    }
  }
  return out;
}

/// Maps reduced coordinates back to the original space.
inline EmbeddingMatrix inverse_transform(const PcaModel& model, const EmbeddingMatrix& reduced) {
  if (reduced.dim() != model.rank)
    fail(ErrorKind::dimension, "reduced matrix has dim " + std::to_string(reduced.dim()) + ", model rank is " +
                                   std::to_string(model.rank));
  EmbeddingMatrix out(reduced.ids(), model.dim);
  for (std::size_t i = 0; i < reduced.rows(); ++i) {
    for (std::size_t k = 0; k < model.dim; ++k) out(i, k) = model.mean[k];
    for (std::size_t c = 0; c < model.rank; ++c) {
      const auto comp = model.component(c);
      for (std::size_t k = 0; k < model.dim; ++k) out(i, k) += reduced(i, c) * comp[k];
    }
  }
  return out;
}

struct CurvePoint {
  std::size_t k = 0;
  double cumulative_ratio = 0.0;
};

inline std::vector<CurvePoint> explained_variance_curve(const PcaModel& model) {
  std::vector<CurvePoint> curve;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < model.rank; ++i) {
    cumulative = std::min(1.0, cumulative + model.explained_variance_ratio[i]);
    curve.push_back({i + 1, cumulative});
  }
  return curve;
}

struct ComponentSelection {
  std::size_t k = 0;
  bool threshold_reached = true;  // false: threshold unreachable, k = r
};

/// Cumulative ratios within this slack of the threshold count as reaching it,
/// so a spectrum like {0.7, 0.2} meets 0.9 despite 0.7 + 0.2 < 0.9 in binary.
inline constexpr double selection_slack = 1e-12;

/// Smallest k whose cumulative explained-variance ratio reaches `ratio_threshold`.
inline ComponentSelection select_components(const PcaModel& model, double ratio_threshold = 0.95) {
  if (!(ratio_threshold > 0.0 && ratio_threshold <= 1.0))
    fail(ErrorKind::usage, "ratio threshold must be in (0, 1]");
  for (const auto& point : explained_variance_curve(model))
    if (point.cumulative_ratio >= ratio_threshold - selection_slack) return {point.k, true};
  return {model.rank, false};
}

}  // namespace relatedness
