#pragma once

// Independent reference implementations and data generators shared by the
// unit tests and the acceptance runner. Nothing here calls into the library
// routines it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "relatedness/embedding.hpp"

namespace support {

inline std::string fixture(const std::string& name) { return std::string(FIXTURES_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> make_ids(std::size_t n, const std::string& prefix = "p") {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

inline relatedness::EmbeddingMatrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t d,
                                                  double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> values(n * d);
  for (auto& v : values) v = g(rng);
  return {make_ids(n), d, std::move(values)};
}

struct Blobs {
  relatedness::EmbeddingMatrix matrix;
  std::vector<std::size_t> truth;
};

inline Blobs gaussian_blobs(std::mt19937_64& rng, const std::vector<std::vector<double>>& centers,
                            std::size_t per_center, double sigma) {
  std::normal_distribution<double> g(0.0, sigma);
  const std::size_t d = centers.front().size();
  std::vector<double> values;
  Blobs out;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (std::size_t j = 0; j < per_center; ++j) {
      for (std::size_t t = 0; t < d; ++t) values.push_back(centers[c][t] + g(rng));
      out.truth.push_back(c);
    }
  }
  out.matrix = relatedness::EmbeddingMatrix(make_ids(out.truth.size()), d, std::move(values));
  return out;
}

/// Unit-separated triangle in the plane.
inline std::vector<std::vector<double>> triangle_centers() {
  return {{0.0, 0.0}, {1.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}};
}

/// Regular tetrahedron with vertices at distance 3 from the origin.
inline std::vector<std::vector<double>> tetrahedron_centers() {
  const double s = 3.0 / std::sqrt(3.0);
  return {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
}

/// Best agreement between two labelings over all relabelings (k <= 8).
inline double relabeled_agreement(const std::vector<std::size_t>& got, const std::vector<std::size_t>& truth,
                                  std::size_t k) {
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < got.size(); ++i) hits += perm[got[i]] == truth[i];
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(got.size());
}

// ---------------------------------------------------------------------------
// Oracles

inline double oracle_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  return static_cast<double>(dot / std::sqrt(na * nb));
}

inline double oracle_kl(const std::vector<double>& p, const std::vector<double>& q) {
  long double total = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0) total += static_cast<long double>(p[i]) * std::log(static_cast<long double>(p[i]) / q[i]);
  return static_cast<double>(total);
}

/// Textbook silhouette: explicit per-point a(i), b(i) over cluster members.
inline double oracle_silhouette(const std::vector<std::vector<double>>& points, const std::vector<std::size_t>& labels,
                                std::size_t k, bool cosine_metric) {
  auto dist = [&](std::size_t i, std::size_t j) {
    if (cosine_metric) return 1.0 - oracle_cosine(points[i], points[j]);
    double s = 0;
    for (std::size_t t = 0; t < points[i].size(); ++t) s += (points[i][t] - points[j][t]) * (points[i][t] - points[j][t]);
    return std::sqrt(s);
  };
  const std::size_t n = points.size();
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sum[labels[j]] += dist(i, j);
      ++count[labels[j]];
    }
    if (count[labels[i]] == 0) continue;  // singleton
    const double a = sum[labels[i]] / count[labels[i]];
    double b = INFINITY;
    for (std::size_t c = 0; c < k; ++c)
      if (c != labels[i] && count[c] > 0) b = std::min(b, sum[c] / count[c]);
    const double m = std::max(a, b);
    if (m > 0) total += (b - a) / m;
  }
  return total / static_cast<double>(n);
}

/// Eigenvalues (descending) of the sample covariance, via Eigen.
inline std::vector<double> oracle_pca_variances(const relatedness::EmbeddingMatrix& m) {
  Eigen::MatrixXd x(m.rows(), m.dim());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) x(i, j) = m(i, j);
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(m.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  std::vector<double> out(solver.eigenvalues().data(), solver.eigenvalues().data() + m.dim());
  std::sort(out.rbegin(), out.rend());
  return out;
}

inline std::vector<std::vector<double>> rows_of(const relatedness::EmbeddingMatrix& m) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).begin(), m.row(i).end());
  return out;
}

// ---------------------------------------------------------------------------
// Cleaning fuzz

/// Random strings built from fragments that stress the cleaning rules.
inline std::string fuzz_text(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces = {
      "a", "Z", "q", "7", " ", "  ", "\t", "\n", "\r\n", "#", "##", "#tag", "@user", "http://", "https://",
      "HTTP://", "www.", "WWW.", "x.co", "/path", "?q=1", ".", ",", "!", "(", ")", "\"", "'", "<url>", "<",
      ">", "-", ":", "/", "\xF0\x9F\x8E\x89", "\xF0\x9F\x98\x8D", "\xF0\x9F\x91\x8D\xF0\x9F\x8F\xBD",
      "\xE2\x9D\xA4\xEF\xB8\x8F", "\xE2\x80\x8D", "\xC3\x89", "\xC3\xA9", "\xC3\x9C", "\xCE\xA3", "\xD0\x96",
      "\xE2\x80\x83", "\xC2\xA0", "\xFF", "\xC3", "\xE2\x82", "\xED\xA0\x80", "\xE4\xB8\xAD", "\xC4\xB0",
      "\xC2\xA9", "1\xE2\x83\xA3"};
  std::uniform_int_distribution<std::size_t> len(0, 24);
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::string out;
  for (std::size_t i = 0, n = len(rng); i < n; ++i) out += pieces[pick(rng)];
  return out;
}

}  // namespace support
