#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "expect_error.hpp"
#include "relatedness/reduce.hpp"
#include "support.hpp"

using namespace relatedness;

namespace {

PcaModel model_with_ratios(std::vector<double> ratios) {
  PcaModel m;
  m.rank = ratios.size();
  m.explained_variance_ratio = ratios;
  m.explained_variance = ratios;
  m.total_variance = 1.0;
  return m;
}

}  // namespace

TEST(Jacobi, DiagonalizesKnownMatrix) {
  // [[2,1],[1,2]] has eigenvalues 3 and 1.
  const auto eig = jacobi_eigen({2, 1, 1, 2}, 2);
  EXPECT_NEAR(eig.values[0], 3.0, 1e-12);
  EXPECT_NEAR(eig.values[1], 1.0, 1e-12);
}

TEST(Pca, VariancesMatchEigenOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + trial * 4, d = 1 + trial % 12;
    const auto data = support::random_matrix(rng, n, d, 0.5 + trial);
    const std::size_t r = std::min(n, d);
    const auto model = fit_pca(data, r);
    const auto oracle = support::oracle_pca_variances(data);
    for (std::size_t i = 0; i < r; ++i) EXPECT_NEAR(model.explained_variance[i], oracle[i], 1e-8 * (1 + oracle[0]));
  }
}

TEST(Pca, ComponentsAreOrthonormalWithSignConvention) {
  std::mt19937_64 rng(22);
  const auto model = fit_pca(support::random_matrix(rng, 50, 6), 6);
  for (std::size_t a = 0; a < 6; ++a) {
    const auto ca = model.component(a);
    for (std::size_t b = 0; b < 6; ++b) {
      double dot = 0;
      for (std::size_t k = 0; k < 6; ++k) dot += ca[k] * model.component(b)[k];
      EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-10);
    }
    std::size_t big = 0;
    for (std::size_t k = 1; k < 6; ++k)
      if (std::abs(ca[k]) > std::abs(ca[big])) big = k;
    EXPECT_GT(ca[big], 0.0);
  }
  for (std::size_t i = 1; i < model.rank; ++i) EXPECT_LE(model.explained_variance[i], model.explained_variance[i - 1]);
}

TEST(Pca, FullRankRoundTrip) {
  std::mt19937_64 rng(23);
  const auto data = support::random_matrix(rng, 40, 5, 3.0);
  const auto model = fit_pca(data, 5);
  const auto back = inverse_transform(model, transform(model, data));
  for (std::size_t i = 0; i < data.rows(); ++i)
    for (std::size_t j = 0; j < data.dim(); ++j) EXPECT_NEAR(back(i, j), data(i, j), 1e-9);
  EXPECT_EQ(transform(model, data).ids(), data.ids());
}

TEST(Pca, CollinearDataHasOneComponent) {
  std::vector<double> values;
  for (int i = 0; i < 10; ++i) values.insert(values.end(), {1.0 * i, 2.0 * i, -3.0 * i});
  const auto model = fit_pca(EmbeddingMatrix(support::make_ids(10), 3, values), 3);
  EXPECT_EQ(model.explained_variance_ratio[0], 1.0);
  EXPECT_EQ(model.explained_variance[1], 0.0);
  EXPECT_EQ(select_components(model, 0.95).k, 1u);
}

TEST(Pca, ConstantDataHasZeroVarianceCurve) {
  const auto model = fit_pca(EmbeddingMatrix(support::make_ids(4), 2, std::vector<double>(8, 5.0)), 2);
  EXPECT_EQ(model.total_variance, 0.0);
  for (double r : model.explained_variance_ratio) EXPECT_EQ(r, 0.0);
}

TEST(Pca, Errors) {
  std::mt19937_64 rng(24);
  const auto data = support::random_matrix(rng, 5, 3);
  EXPECT_ERROR_KIND(fit_pca(data, 0), arity);
  EXPECT_ERROR_KIND(fit_pca(data, 4), arity);
  EXPECT_ERROR_KIND(fit_pca(support::random_matrix(rng, 1, 3), 1), arity);
  const auto model = fit_pca(data, 2);
  EXPECT_ERROR_KIND(transform(model, support::random_matrix(rng, 5, 4)), dimension);
}

TEST(ExplainedVarianceCurve, CumulativeAndCapped) {
  const auto curve = explained_variance_curve(model_with_ratios({0.5, 0.3, 0.2}));
  ASSERT_EQ(curve.size(), 3u);
  EXPECT_EQ(curve[0].k, 1u);
  EXPECT_DOUBLE_EQ(curve[1].cumulative_ratio, 0.8);
  EXPECT_LE(curve[2].cumulative_ratio, 1.0);
}

TEST(SelectComponents, ThresholdRule) {
  EXPECT_EQ(select_components(model_with_ratios({0.7, 0.2, 0.08, 0.02}), 0.95).k, 3u);
  EXPECT_EQ(select_components(model_with_ratios({0.7, 0.2, 0.08, 0.02}), 0.5).k, 1u);
  // 0.7 + 0.2 reaches 0.9 exactly in real arithmetic.
  EXPECT_EQ(select_components(model_with_ratios({0.7, 0.2, 0.08, 0.02}), 0.9).k, 2u);
  const auto short_of = select_components(model_with_ratios({0.4, 0.3}), 0.95);
  EXPECT_EQ(short_of.k, 2u);
  EXPECT_FALSE(short_of.threshold_reached);
  EXPECT_ERROR_KIND(select_components(model_with_ratios({1.0}), 0.0), usage);
  EXPECT_ERROR_KIND(select_components(model_with_ratios({1.0}), 1.5), usage);
}
