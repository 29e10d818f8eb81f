// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relatedness/clean.hpp"
#include "relatedness/cluster.hpp"
#include "relatedness/divergence.hpp"
#include "relatedness/pipeline.hpp"
#include "relatedness/reduce.hpp"
#include "relatedness/sentiment.hpp"
#include "relatedness/similarity.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace relatedness;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

fs::path work_dir;

Outcome cosine_kernel() {
  Outcome out;
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6}, x{1, 0}, y{0, 1};
  out.check(std::abs(cosine(a, a) - 1.0) <= 1e-9, "self similarity");
  out.check(std::abs(cosine(x, y)) <= 1e-9, "orthogonal");
  const double expected = 32.0 / std::sqrt(14.0 * 77.0);
  out.check(std::abs(cosine(a, b) - expected) <= 1e-9, "(1,2,3)/(4,5,6)");
  out.check(std::abs(cosine(a, b) - 0.974631846) <= 1e-9, "(1,2,3)/(4,5,6) literal");

  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  std::uniform_int_distribution<int> dim(1, 32);
  double worst_sym = 0, worst_scale = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<double> u(dim(rng)), v(u.size());
    for (auto& e : u) e = g(rng);
    for (auto& e : v) e = g(rng);
    const double s = scale(rng);
    std::vector<double> su(u);
    for (auto& e : su) e *= s;
    const double c = cosine(u, v);
    worst_sym = std::max(worst_sym, std::abs(c - cosine(v, u)));
    worst_scale = std::max(worst_scale, std::abs(c - cosine(su, v)));
  }
  out.check(worst_sym <= 1e-12, "symmetry error " + std::to_string(worst_sym));
  out.check(worst_scale <= 1e-12, "scale invariance error " + std::to_string(worst_scale));
  return out;
}

Outcome kl_kernel() {
  Outcome out;
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> cats(2, 8);
  std::uniform_int_distribution<std::uint64_t> count(0, 50);
  std::uniform_real_distribution<double> eps(1e-6, 1.0);
  std::size_t negatives = 0;
  double worst_self = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int c = cats(rng);
    std::vector<std::pair<std::string, std::uint64_t>> pc, qc;
    for (int i = 0; i < c; ++i) {
      pc.emplace_back("c" + std::to_string(i), count(rng));
      qc.emplace_back("c" + std::to_string(i), count(rng));
    }
    pc[0].second += 1;
    qc[0].second += 1;
    const double e = eps(rng);
    const auto p = from_counts(pc, e);
    const auto q = from_counts(qc, e);
    negatives += kl_divergence(p, q) < 0.0;
    worst_self = std::max(worst_self, std::abs(kl_divergence(p, p)));
  }
  out.check(negatives == 0, std::to_string(negatives) + " negative divergences");
  out.check(worst_self <= 1e-12, "kl(p,p) error " + std::to_string(worst_self));

  const CategoricalDistribution p{{"a", "b"}, {0.5, 0.5}}, q{{"a", "b"}, {0.9, 0.1}};
  const double derived = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
  out.check(std::abs(kl_divergence(p, q) - derived) <= 1e-9, "0.5108 case");
  out.check(std::abs(kl_divergence(p, q) - 0.510825624) <= 1e-9, "0.5108 literal");
  const CategoricalDistribution one{{"a", "b"}, {1.0, 0.0}};
  out.check(std::abs(kl_divergence(one, p) - std::log(2.0)) <= 1e-9, "ln 2 case");
  return out;
}

Outcome kmeans() {
  Outcome out;
  std::size_t increases = 0, nondeterministic = 0, recovered = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const auto data = support::random_matrix(rng, 200, 5);
    const auto model = kmeans_fit(data, 6, seed);
    for (std::size_t i = 1; i < model.inertia_trace.size(); ++i)
      increases += model.inertia_trace[i] > model.inertia_trace[i - 1];
    const auto again = kmeans_fit(data, 6, seed);
    nondeterministic += !(again.centroids == model.centroids && again.labels == model.labels &&
                          again.inertia_trace == model.inertia_trace);

    const auto blobs = support::gaussian_blobs(rng, support::triangle_centers(), 100, 0.05);
    const auto fit = kmeans_fit(blobs.matrix, 3, seed);
    recovered += support::relabeled_agreement(fit.labels, blobs.truth, 3) >= 0.99;
  }
  out.check(increases == 0, std::to_string(increases) + " inertia increases");
  out.check(nondeterministic == 0, std::to_string(nondeterministic) + " nondeterministic runs");
  out.check(recovered >= 95, "3-Gaussian recovery on " + std::to_string(recovered) + "/100 seeds");
  if (out.pass) out.detail = "recovery " + std::to_string(recovered) + "/100";
  return out;
}

Outcome elbow() {
  Outcome out;
  std::size_t hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(5000 + seed);
    const auto blobs = support::gaussian_blobs(rng, support::tetrahedron_centers(), 75, 0.05);
    hits += elbow_scan(blobs.matrix, 2, 8, seed, 3).selected_k == 4;
  }
  out.check(hits >= 95, "selected_k = 4 on " + std::to_string(hits) + "/100 seeds");
  out.check(select_elbow({2, 3, 4, 5, 6}, {1000, 200, 150, 140, 135}) == 3, "hand-fed series");
  if (out.pass) out.detail = std::to_string(hits) + "/100 seeds";
  return out;
}

Outcome silhouette() {
  Outcome out;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> size(10, 500), dim(1, 8), ks(2, 6);
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = size(rng), k = ks(rng);
    const auto data = support::random_matrix(rng, n, dim(rng));
    std::vector<std::size_t> labels(n);
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    for (std::size_t i = 0; i < n; ++i) labels[i] = i < k ? i : pick(rng);
    const auto model = model_from_labels(data, labels, k);
    const auto metric = trial % 2 ? DistanceMetric::cosine_distance : DistanceMetric::euclidean;
    const double got = silhouette_score(data, model, metric).score;
    const double want = support::oracle_silhouette(support::rows_of(data), labels, k, trial % 2);
    worst = std::max(worst, std::abs(got - want));
  }
  out.check(worst <= 1e-10, "max oracle error " + std::to_string(worst));

  std::vector<double> values;
  for (int i = 0; i < 20; ++i) values.insert(values.end(), {0.0, 0.0});
  for (int i = 0; i < 20; ++i) values.insert(values.end(), {100.0, 100.0});
  const EmbeddingMatrix twin(support::make_ids(40), 2, values);
  std::vector<std::size_t> labels(40, 0);
  std::fill(labels.begin() + 20, labels.end(), 1);
  const double s = silhouette_score(twin, model_from_labels(twin, labels, 2), DistanceMetric::euclidean).score;
  out.check(std::abs(s - 1.0) <= 1e-9, "coincident clusters score " + std::to_string(s));
  return out;
}

Outcome pca() {
  Outcome out;
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> rows(2, 100), cols(1, 16);
  double worst_var = 0, worst_rt = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = rows(rng), d = cols(rng);
    const auto data = support::random_matrix(rng, n, d);
    const std::size_t r = std::min(n, d);
    const auto model = fit_pca(data, r);
    const auto oracle = support::oracle_pca_variances(data);
    for (std::size_t i = 0; i < r; ++i) worst_var = std::max(worst_var, std::abs(model.explained_variance[i] - oracle[i]));
    if (n > d) {
      const auto back = inverse_transform(model, transform(model, data));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) worst_rt = std::max(worst_rt, std::abs(back(i, j) - data(i, j)));
    }
  }
  out.check(worst_var <= 1e-8, "variance error " + std::to_string(worst_var));
  out.check(worst_rt <= 1e-6, "round-trip error " + std::to_string(worst_rt));

  std::vector<double> line;
  for (int i = 0; i < 30; ++i) line.insert(line.end(), {0.5 * i, 1.5 * i - 2.0, -0.25 * i, 3.0});
  const auto collinear = fit_pca(EmbeddingMatrix(support::make_ids(30), 4, line), 4);
  out.check(collinear.explained_variance_ratio[0] == 1.0, "collinear ratio " +
                                                               format_double(collinear.explained_variance_ratio[0]));
  return out;
}

Outcome sentiment() {
  Outcome out;
  std::vector<WeightedLabel> labels;
  for (int i = 0; i < 100; ++i) labels.push_back({i < 40 ? SentimentLabel::positive : SentimentLabel::negative, 1.0});
  out.check(weighted_average(labels) == -0.2, "40/60 average " + format_double(weighted_average(labels)));

  const auto corpus = load_corpus(support::fixture("sentiment_40_60.jsonl"), InputFormat::jsonl);
  std::vector<WeightedLabel> from_file;
  for (const auto& c : corpus.comments) from_file.push_back({*c.gold_sentiment, c.weight});
  out.check(weighted_average(from_file) == -0.2, "fixture average");

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> w(0.01, 10.0), s(1e-3, 1e3);
  std::uniform_int_distribution<int> lab(-1, 1);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<WeightedLabel> items(1 + trial % 50);
    for (auto& item : items) item = {static_cast<SentimentLabel>(lab(rng)), w(rng)};
    auto scaled = items;
    const double factor = s(rng);
    for (auto& item : scaled) item.weight *= factor;
    worst = std::max(worst, std::abs(weighted_average(items) - weighted_average(scaled)));
  }
  out.check(worst <= 1e-12, "weight scaling error " + std::to_string(worst));
  return out;
}

Outcome cleaning() {
  Outcome out;
  const auto input = load_corpus(support::fixture("clean_input.jsonl"), InputFormat::jsonl);
  const auto golden = load_corpus(support::fixture("clean_golden.jsonl"), InputFormat::jsonl);
  out.check(input.size() == golden.size() && input.size() == 10, "fixture size");
  for (std::size_t i = 0; i < std::min(input.size(), golden.size()); ++i) {
    const auto got = clean_text(input.comments[i].raw_text);
    out.check(got == golden.comments[i].clean_text, "golden row " + input.comments[i].id + ": '" + got + "'");
  }
  std::mt19937_64 rng(8);
  std::size_t unstable = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto once = clean_text(support::fuzz_text(rng));
    unstable += clean_text(once) != once;
  }
  out.check(unstable == 0, std::to_string(unstable) + " non-idempotent strings");
  return out;
}

Outcome end_to_end() {
  Outcome out;
  const fs::path a = work_dir / "e2e_a", b = work_dir / "e2e_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const std::string base = std::string("\"") + CLI_PATH + "\" report --config \"" +
                           support::fixture("pipeline_200.json") + "\" -i \"" +
                           support::fixture("comments_200.jsonl") + "\" -o ";
  const auto start = std::chrono::steady_clock::now();
  const int rc = std::system((base + "\"" + a.string() + "\"").c_str());
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const int rc2 = std::system((base + "\"" + b.string() + "\"").c_str());
  out.check(rc == 0 && rc2 == 0, "exit status " + std::to_string(rc) + "/" + std::to_string(rc2));
  out.check(seconds < 5.0, "took " + std::to_string(seconds) + " s");

  const std::vector<std::string> expected = {"cleaned.jsonl", "embeddings.txt", "assignments.csv", "elbow.csv",
                                             "pca_curve.csv", "pca2.csv", "cluster_report.txt",
                                             "sentiment_report.txt", "kl_report.txt", "report.txt"};
  for (const auto& name : expected) {
    const bool present = fs::exists(a / name) && fs::exists(b / name);
    out.check(present, "missing " + name);
    if (present) out.check(support::slurp((a / name).string()) == support::slurp((b / name).string()), name + " differs");
  }
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(a)) ++files;
  out.check(files == expected.size(), "unexpected file count " + std::to_string(files));
  if (out.pass) out.detail = "first run " + std::to_string(seconds) + " s";
  return out;
}

Outcome admission() {
  Outcome out;
  const auto matrix = load_embedding_matrix(support::fixture("five_clusters.emb"));

  // Generator groups come from the id prefix; the diffuse group must measure below 0.8.
  std::vector<std::size_t> truth;
  for (const auto& id : matrix.ids()) truth.push_back(static_cast<std::size_t>(id[1] - '0'));
  std::vector<std::vector<double>> centroid(5, std::vector<double>(matrix.dim(), 0.0));
  std::vector<double> size(5, 0.0), cohesion(5, 0.0);
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    for (std::size_t j = 0; j < matrix.dim(); ++j) centroid[truth[i]][j] += matrix(i, j);
    size[truth[i]] += 1;
  }
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    const std::vector<double> row(matrix.row(i).begin(), matrix.row(i).end());
    cohesion[truth[i]] += support::oracle_cosine(row, centroid[truth[i]]) / size[truth[i]];
  }
  out.check(cohesion[4] < 0.8, "diffuse cohesion " + std::to_string(cohesion[4]));
  for (int c = 0; c < 4; ++c) out.check(cohesion[c] >= 0.8, "tight cohesion " + std::to_string(cohesion[c]));

  const auto run = cluster_embeddings(RunConfig{}, matrix);
  out.check(run.admission.admitted.size() == 4,
            "admitted " + std::to_string(run.admission.admitted.size()) + " of " + std::to_string(run.model.k));
  if (out.pass) out.detail = "k=" + std::to_string(run.model.k) + ", diffuse cohesion " + std::to_string(cohesion[4]);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  work_dir = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "relatedness_acceptance";
  fs::create_directories(work_dir);

  struct Criterion {
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"1 cosine kernel", 1.0, cosine_kernel},
      {"2 kl kernel", 1.0, kl_kernel},
      {"3 k-means", 10.0, kmeans},
      {"4 elbow", 30.0, elbow},
      {"5 silhouette", 20.0, silhouette},
      {"6 pca", 5.0, pca},
      {"7 sentiment aggregation", 0.0, sentiment},
      {"8 cleaning", 0.0, cleaning},
      {"9 end-to-end", 0.0, end_to_end},
      {"10 threshold admission", 0.0, admission},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.check(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0) outcome.check(seconds < c.budget_seconds, "over time budget");
    failures += !outcome.pass;
    std::printf("%s  %-26s %8.3f s  %s\n", outcome.pass ? "PASS" : "FAIL", c.name, seconds, outcome.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
