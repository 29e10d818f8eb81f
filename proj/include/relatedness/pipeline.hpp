#pragma once

// End-to-end commands behind the CLI. Each command reads a RunConfig,
// writes its outputs, and reports failures as relatedness::Error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "relatedness/cluster.hpp"
#include "relatedness/corpus.hpp"
#include "relatedness/divergence.hpp"
#include "relatedness/embedding.hpp"
#include "relatedness/numeric.hpp"
#include "relatedness/reduce.hpp"
#include "relatedness/sentiment.hpp"
#include "relatedness/similarity.hpp"

namespace relatedness {

struct RunConfig {
  // input
  std::vector<std::string> inputs;
  std::string format = "auto";  // auto | jsonl | csv
  std::string schema;           // "field=column,..." overrides

  // embedding
  std::string embedding = "hash";  // hash | word-vectors | matrix
  std::string word_vectors;
  std::string matrix;
  std::size_t hash_dim = 64;
  bool normalize = true;

  // reduction
  bool pca = true;
  std::size_t pca_components = 0;  // 0: pick by pca_ratio
  double pca_ratio = 0.95;

  // clustering
  std::size_t k = 0;  // 0: elbow scan over [k_min, k_max]
  std::size_t k_min = 2;
  std::size_t k_max = 8;
  std::size_t restarts = 3;
  std::size_t max_iter = 300;
  double tol = 1e-6;
  double admit_threshold = 0.8;
  std::string metric = "euclidean";  // euclidean | cosine

  // sentiment
  std::string sentiment_source = "auto";  // auto | gold | predictions | lexicon
  std::string predictions;
  std::string lexicon;
  double lexicon_margin = 0.0;
  std::string filter;

  // divergence
  std::vector<std::string> buckets;  // "label=start,end"
  std::string categorizer = "sentiment_labels";
  double epsilon = default_smoothing;
  std::string base = "natural";

  std::uint64_t seed = 7;
  std::string output;

  bool operator==(const RunConfig&) const = default;
};

inline void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json{
      {"inputs", c.inputs},
      {"format", c.format},
      {"schema", c.schema},
      {"embedding", c.embedding},
      {"word_vectors", c.word_vectors},
      {"matrix", c.matrix},
      {"hash_dim", c.hash_dim},
      {"normalize", c.normalize},
      {"pca", c.pca},
      {"pca_components", c.pca_components},
      {"pca_ratio", c.pca_ratio},
      {"k", c.k},
      {"k_min", c.k_min},
      {"k_max", c.k_max},
      {"restarts", c.restarts},
      {"max_iter", c.max_iter},
      {"tol", c.tol},
      {"admit_threshold", c.admit_threshold},
      {"metric", c.metric},
      {"sentiment_source", c.sentiment_source},
      {"predictions", c.predictions},
      {"lexicon", c.lexicon},
      {"lexicon_margin", c.lexicon_margin},
      {"filter", c.filter},
      {"buckets", c.buckets},
      {"categorizer", c.categorizer},
      {"epsilon", c.epsilon},
      {"base", c.base},
      {"seed", c.seed},
      {"output", c.output},
  };
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
  const RunConfig d;
  c.inputs = j.value("inputs", d.inputs);
  c.format = j.value("format", d.format);
  c.schema = j.value("schema", d.schema);
  c.embedding = j.value("embedding", d.embedding);
  c.word_vectors = j.value("word_vectors", d.word_vectors);
  c.matrix = j.value("matrix", d.matrix);
  c.hash_dim = j.value("hash_dim", d.hash_dim);
  c.normalize = j.value("normalize", d.normalize);
  c.pca = j.value("pca", d.pca);
  c.pca_components = j.value("pca_components", d.pca_components);
  c.pca_ratio = j.value("pca_ratio", d.pca_ratio);
  c.k = j.value("k", d.k);
  c.k_min = j.value("k_min", d.k_min);
  c.k_max = j.value("k_max", d.k_max);
  c.restarts = j.value("restarts", d.restarts);
  c.max_iter = j.value("max_iter", d.max_iter);
  c.tol = j.value("tol", d.tol);
  c.admit_threshold = j.value("admit_threshold", d.admit_threshold);
  c.metric = j.value("metric", d.metric);
  c.sentiment_source = j.value("sentiment_source", d.sentiment_source);
  c.predictions = j.value("predictions", d.predictions);
  c.lexicon = j.value("lexicon", d.lexicon);
  c.lexicon_margin = j.value("lexicon_margin", d.lexicon_margin);
  c.filter = j.value("filter", d.filter);
  c.buckets = j.value("buckets", d.buckets);
  c.categorizer = j.value("categorizer", d.categorizer);
  c.epsilon = j.value("epsilon", d.epsilon);
  c.base = j.value("base", d.base);
  c.seed = j.value("seed", d.seed);
  c.output = j.value("output", d.output);
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::usage, "cannot open config '" + path + "'");
  try {
    return nlohmann::json::parse(in).get<RunConfig>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::usage, "invalid config '" + path + "': " + e.what());
  }
}

/// One-line JSON of the config without its output location, embedded in
/// every report so that a report names exactly what produced it.
inline std::string config_fingerprint(RunConfig config) {
  config.output.clear();
  return nlohmann::json(config).dump();
}

// ---------------------------------------------------------------------------

/// Line-oriented key=value report with optional CSV sections.
class Report {
 public:
  explicit Report(std::string command) { set("command", command); }

  void set(const std::string& key, const std::string& value) { text_ += key + "=" + value + "\n"; }
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, double value) { set(key, format_double(value)); }
  void set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

  /// Starts a CSV block: "[name]" then the header row.
  void section(const std::string& name, const std::string& header) { text_ += "\n[" + name + "]\n" + header + "\n"; }
  void row(const std::string& line) { text_ += line + "\n"; }

  const std::string& str() const noexcept { return text_; }

 private:
  std::string text_;
};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::parse, "cannot write '" + path.string() + "'");
  out << content;
}

inline InputFormat format_for(const RunConfig& config, const std::string& path) {
  if (config.format != "auto") return parse_format(config.format);
  return std::filesystem::path(path).extension() == ".csv" ? InputFormat::csv : InputFormat::jsonl;
}

inline std::vector<Corpus> load_inputs(const RunConfig& config) {
  if (config.inputs.empty()) fail(ErrorKind::usage, "no input file given");
  const Schema schema = Schema::parse(config.schema);
  std::vector<Corpus> out;
  for (const auto& path : config.inputs) {
    Corpus corpus = load_corpus(path, format_for(config, path), schema);
    for (auto& c : corpus.comments)
      if (c.clean_text.empty()) c.clean_text = clean_text(c.raw_text);
    out.push_back(std::move(corpus));
  }
  return out;
}

inline Corpus pool(const std::vector<Corpus>& corpora) {
  if (corpora.size() == 1) return corpora.front();
  Corpus pooled;
  for (const auto& corpus : corpora) {
    if (!pooled.source_descriptor.empty()) pooled.source_descriptor += "+";
    pooled.source_descriptor += corpus.source_descriptor;
    pooled.comments.insert(pooled.comments.end(), corpus.comments.begin(), corpus.comments.end());
  }
  detail::check_unique_ids(pooled);
  return pooled;
}

struct Embedded {
  EmbeddingMatrix matrix;
  std::size_t out_of_vocabulary = 0;
};

inline Embedded embed_comments(const RunConfig& config, const std::vector<const Comment*>& comments) {
  std::vector<std::string> ids;
  ids.reserve(comments.size());
  for (const auto* c : comments) ids.push_back(c->id);
  Embedded out;
  if (config.embedding == "hash") {
    out.matrix = EmbeddingMatrix(std::move(ids), config.hash_dim);
    for (std::size_t i = 0; i < comments.size(); ++i) {
      const auto v = hash_embed(comments[i]->clean_text, config.hash_dim, config.seed);
      std::copy(v.begin(), v.end(), out.matrix.row(i).begin());
      out.out_of_vocabulary += is_zero(v);
    }
  } else if (config.embedding == "word-vectors") {
    if (config.word_vectors.empty()) fail(ErrorKind::usage, "embedding=word-vectors needs a word vector file");
    const WordVectorTable table = parse_word_vectors(config.word_vectors);
    out.matrix = EmbeddingMatrix(std::move(ids), table.dim());
    for (std::size_t i = 0; i < comments.size(); ++i) {
      const auto pooled = embed_mean(comments[i]->clean_text, table);
      std::copy(pooled.values.begin(), pooled.values.end(), out.matrix.row(i).begin());
      out.out_of_vocabulary += pooled.out_of_vocabulary;
    }
  } else if (config.embedding == "matrix") {
    if (config.matrix.empty()) fail(ErrorKind::usage, "embedding=matrix needs a matrix file");
    const EmbeddingMatrix full = load_embedding_matrix(config.matrix);
    const auto index = full.index();
    out.matrix = EmbeddingMatrix(std::move(ids), full.dim());
    for (std::size_t i = 0; i < comments.size(); ++i) {
      const auto it = index.find(comments[i]->id);
      if (it == index.end()) fail(ErrorKind::lookup, "no embedding for comment id '" + comments[i]->id + "'");
      const auto src = full.row(it->second);
      std::copy(src.begin(), src.end(), out.matrix.row(i).begin());
    }
  } else {
    fail(ErrorKind::usage, "unknown embedding source '" + config.embedding + "' (expected hash, word-vectors or matrix)");
  }
  return out;
}

inline std::vector<const Comment*> pointers(const Corpus& corpus) {
  std::vector<const Comment*> out;
  out.reserve(corpus.size());
  for (const auto& c : corpus.comments) out.push_back(&c);
  return out;
}

/// Embeddings for clustering: a matrix file alone, or computed from inputs.
inline Embedded cluster_input(const RunConfig& config) {
  if (config.inputs.empty() && (config.embedding == "matrix" || !config.matrix.empty())) {
    if (config.matrix.empty()) fail(ErrorKind::usage, "embedding=matrix needs a matrix file");
    return {load_embedding_matrix(config.matrix), 0};
  }
  const Corpus corpus = pool(load_inputs(config));
  return embed_comments(config, pointers(corpus));
}

inline DistanceMetric parse_metric(const std::string& name) {
  if (name == "euclidean") return DistanceMetric::euclidean;
  if (name == "cosine" || name == "cosine_distance") return DistanceMetric::cosine_distance;
  fail(ErrorKind::usage, "unknown metric '" + name + "' (expected euclidean or cosine)");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// clean

/// Cleans the first input and writes it as JSONL with clean_text filled.
inline std::size_t run_clean(const RunConfig& config) {
  if (config.inputs.empty()) fail(ErrorKind::usage, "no input file given");
  if (config.output.empty()) fail(ErrorKind::usage, "clean needs an output file");
  const auto& path = config.inputs.front();
  Corpus corpus = load_corpus(path, detail::format_for(config, path), Schema::parse(config.schema));
  clean_corpus(corpus);
  std::ostringstream out;
  write_jsonl(out, corpus);
  detail::write_file(config.output, out.str());
  return corpus.size();
}

// ---------------------------------------------------------------------------
// embed

inline std::size_t run_embed(const RunConfig& config) {
  if (config.output.empty()) fail(ErrorKind::usage, "embed needs an output file");
  const Corpus corpus = detail::pool(detail::load_inputs(config));
  auto embedded = detail::embed_comments(config, detail::pointers(corpus));
  EmbeddingMatrix matrix = config.normalize ? l2_normalize(std::move(embedded.matrix)).matrix : std::move(embedded.matrix);
  std::ostringstream out;
  write_embedding_matrix(out, matrix);
  detail::write_file(config.output, out.str());
  return matrix.rows();
}

// ---------------------------------------------------------------------------
// cluster

struct ClusterRun {
  EmbeddingMatrix space;    // (normalized) embeddings; admission is measured here
  EmbeddingMatrix reduced;  // what K-means ran on
  std::optional<PcaModel> pca;
  std::optional<ElbowScan> elbow;
  ClusterModel model;
  std::optional<SilhouetteResult> silhouette;
  AdmittedClustering admission;
  std::size_t zero_rows = 0;
  std::size_t out_of_vocabulary = 0;
};

inline ClusterRun cluster_embeddings(const RunConfig& config, EmbeddingMatrix matrix) {
  if (matrix.rows() == 0) fail(ErrorKind::insufficient_data, "nothing to cluster: the corpus is empty");
  ClusterRun run;
  if (config.normalize) {
    auto normalized = l2_normalize(std::move(matrix));
    run.zero_rows = normalized.zero_rows.size();
    run.space = std::move(normalized.matrix);
  } else {
    run.space = std::move(matrix);
    for (std::size_t i = 0; i < run.space.rows(); ++i) run.zero_rows += is_zero(run.space.row(i));
  }

  run.reduced = run.space;
  if (config.pca && run.space.rows() >= 2) {
    const std::size_t full_rank = std::min(run.space.rows(), run.space.dim());
    PcaModel full = fit_pca(run.space, full_rank);
    std::size_t r = config.pca_components;
    if (r == 0) r = select_components(full, config.pca_ratio).k;
    r = std::min(r, full_rank);
    run.reduced = transform(fit_pca(run.space, r), run.space);
    run.pca = std::move(full);
  }

  const std::size_t n = run.reduced.rows();
  if (config.k > 0) {
    if (config.k > n)
      fail(ErrorKind::arity, "k=" + std::to_string(config.k) + " exceeds the number of comments (" + std::to_string(n) + ")");
    bool have = false;
    for (std::size_t r = 0; r < std::max<std::size_t>(config.restarts, 1); ++r) {
      ClusterModel model = kmeans_fit(run.reduced, config.k, derive_seed(config.seed, config.k, r), config.max_iter, config.tol);
      if (!have || model.inertia < run.model.inertia) run.model = std::move(model), have = true;
    }
  } else {
    const std::size_t k_max = std::min(config.k_max, n);
    ElbowOptions options;
    options.max_iter = config.max_iter;
    options.tol = config.tol;
    run.elbow = elbow_scan(run.reduced, config.k_min, k_max, config.seed, config.restarts, options);
    const auto at = static_cast<std::size_t>(run.elbow->selected_k - run.elbow->ks.front());
    run.model = run.elbow->models[at];
  }

  if (run.model.k >= 2) {
    try {
      run.silhouette = silhouette_score(run.reduced, run.model, detail::parse_metric(config.metric), config.seed);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::undefined_score && e.kind() != ErrorKind::undefined_similarity) throw;
    }
  }

  run.admission = threshold_admit(run.space, model_from_labels(run.space, run.model.labels, run.model.k),
                                  config.admit_threshold);
  return run;
}

namespace detail {

inline std::string pca2_csv(const EmbeddingMatrix& space, const ClusterModel& model) {
  std::string out = "comment_id,pc1,pc2,cluster\n";
  if (space.rows() < 2 || space.dim() < 2) return out;
  const EmbeddingMatrix coords = transform(fit_pca(space, 2), space);
  for (std::size_t i = 0; i < coords.rows(); ++i)
    out += csv::quote(coords.id(i)) + "," + format_double(coords(i, 0)) + "," + format_double(coords(i, 1)) + "," +
           std::to_string(model.labels[i]) + "\n";
  return out;
}

inline void describe_cluster_run(Report& report, const ClusterRun& run, const RunConfig& config) {
  report.set("n", run.space.rows());
  report.set("dim", run.space.dim());
  report.set("normalized", config.normalize);
  report.set("zero_rows", run.zero_rows);
  report.set("out_of_vocabulary", run.out_of_vocabulary);
  if (run.pca) {
    report.set("pca_components", run.reduced.dim());
    const auto curve = explained_variance_curve(*run.pca);
    report.set("pca_cumulative_ratio", curve[run.reduced.dim() - 1].cumulative_ratio);
  } else {
    report.set("pca_components", std::string("none"));
  }
  if (run.elbow) {
    report.set("elbow_range", std::to_string(run.elbow->ks.front()) + ".." + std::to_string(run.elbow->ks.back()));
    report.set("selected_k", run.elbow->selected_k);
  }
  report.set("k", run.model.k);
  report.set("inertia", run.model.inertia);
  report.set("iterations", run.model.iterations);
  report.set("converged", run.model.converged);
  if (run.silhouette) {
    report.set("silhouette", run.silhouette->score);
    report.set("silhouette_metric", config.metric);
    report.set("silhouette_sampled", run.silhouette->sampled);
  } else {
    report.set("silhouette", std::string("undefined"));
  }
  report.set("admit_threshold", run.admission.threshold);
  std::string admitted;
  for (std::size_t c : run.admission.admitted) admitted += (admitted.empty() ? "" : ";") + std::to_string(c);
  report.set("admitted_clusters", admitted);
  report.set("admitted_count", run.admission.admitted.size());
  report.set("unclustered", run.admission.unclustered.size());

  report.section("clusters", "cluster,size,cohesion,admitted");
  const auto sizes = run.model.sizes();
  for (std::size_t c = 0; c < run.model.k; ++c)
    report.row(std::to_string(c) + "," + std::to_string(sizes[c]) + "," + format_double(run.admission.cohesion[c]) + "," +
               (run.admission.is_admitted(c) ? "true" : "false"));
}

}  // namespace detail

/// Writes assignments.csv, pca2.csv, cluster_report.txt and, when used,
/// elbow.csv and pca_curve.csv into config.output (a directory).
inline ClusterRun run_cluster(const RunConfig& config) {
  if (config.output.empty()) fail(ErrorKind::usage, "cluster needs an output directory");
  auto input = detail::cluster_input(config);
  ClusterRun run = cluster_embeddings(config, std::move(input.matrix));
  run.out_of_vocabulary = input.out_of_vocabulary;
  const std::filesystem::path dir = config.output;

  std::string assignments = "comment_id,cluster,admitted\n";
  for (std::size_t i = 0; i < run.model.ids.size(); ++i) {
    const std::size_t c = run.model.labels[i];
    const bool zero = is_zero(run.space.row(i));
    assignments += csv::quote(run.model.ids[i]) + "," + std::to_string(c) + "," +
                   (!zero && run.admission.is_admitted(c) ? "true" : "false") + "\n";
  }
  detail::write_file(dir / "assignments.csv", assignments);

  if (run.elbow) {
    std::string elbow = "k,inertia\n";
    for (std::size_t i = 0; i < run.elbow->ks.size(); ++i)
      elbow += std::to_string(run.elbow->ks[i]) + "," + format_double(run.elbow->inertias[i]) + "\n";
    detail::write_file(dir / "elbow.csv", elbow);
  }
  if (run.pca) {
    std::string curve = "k,cumulative_ratio\n";
    for (const auto& point : explained_variance_curve(*run.pca))
      curve += std::to_string(point.k) + "," + format_double(point.cumulative_ratio) + "\n";
    detail::write_file(dir / "pca_curve.csv", curve);
  }
  detail::write_file(dir / "pca2.csv", detail::pca2_csv(run.space, run.model));

  Report report("cluster");
  report.set("config", config_fingerprint(config));
  detail::describe_cluster_run(report, run, config);
  detail::write_file(dir / "cluster_report.txt", report.str());
  return run;
}

// ---------------------------------------------------------------------------
// sentiment

namespace detail {

using LabelFn = std::function<std::optional<SentimentLabel>(const Comment&)>;

struct LabelSource {
  std::string name;
  LabelFn label_of;
};

inline LabelSource label_source(const RunConfig& config, const std::vector<Corpus>& corpora) {
  std::string source = config.sentiment_source;
  if (source == "auto") {
    bool any_gold = false;
    for (const auto& corpus : corpora)
      for (const auto& c : corpus.comments) any_gold = any_gold || c.gold_sentiment.has_value();
    if (!config.predictions.empty()) source = "predictions";
    else if (!config.lexicon.empty()) source = "lexicon";
    else if (any_gold) source = "gold";
    else fail(ErrorKind::usage, "no sentiment label source: corpus has no labels and no predictions or lexicon file was given");
  }
  if (source == "gold") return {source, [](const Comment& c) { return c.gold_sentiment; }};
  if (source == "predictions") {
    if (config.predictions.empty()) fail(ErrorKind::usage, "sentiment source 'predictions' needs a predictions file");
    auto table = std::make_shared<const std::unordered_map<std::string, SentimentLabel>>(load_predictions(config.predictions));
    return {source, [table](const Comment& c) -> std::optional<SentimentLabel> {
              const auto it = table->find(c.id);
              if (it == table->end()) return std::nullopt;
              return it->second;
            }};
  }
  if (source == "lexicon") {
    if (config.lexicon.empty()) fail(ErrorKind::usage, "sentiment source 'lexicon' needs a lexicon file");
    auto lexicon = std::make_shared<const Lexicon>(load_lexicon(config.lexicon));
    const double margin = config.lexicon_margin;
    return {source, [lexicon, margin](const Comment& c) -> std::optional<SentimentLabel> {
              return classify_lexicon(c.clean_text, *lexicon, margin);
            }};
  }
  fail(ErrorKind::usage, "unknown sentiment source '" + source + "'");
}

}  // namespace detail

struct DatasetSentiment {
  std::string dataset;
  SentimentSummary summary;
  std::size_t selected = 0;   // comments passing the filter
  std::size_t unlabeled = 0;  // selected but without a label
  std::optional<double> accuracy;
};

struct SentimentRun {
  std::string source;
  std::vector<DatasetSentiment> datasets;
  std::optional<DatasetSentiment> pooled;  // when more than one dataset
  std::string report;
};

inline SentimentRun run_sentiment(const RunConfig& config) {
  const auto corpora = detail::load_inputs(config);
  const auto source = detail::label_source(config, corpora);
  SentimentRun run;
  run.source = source.name;

  std::vector<WeightedLabel> all;
  std::vector<SentimentLabel> all_predicted, all_gold;
  std::size_t all_selected = 0, all_unlabeled = 0;
  for (const auto& corpus : corpora) {
    DatasetSentiment ds;
    ds.dataset = corpus.source_descriptor;
    std::vector<WeightedLabel> labels;
    std::vector<SentimentLabel> predicted, gold;
    for (const auto& c : corpus.comments) {
      if (!config.filter.empty() && c.clean_text.find(clean_text(config.filter)) == std::string::npos) continue;
      ++ds.selected;
      const auto label = source.label_of(c);
      if (!label) {
        ++ds.unlabeled;
        continue;
      }
      labels.push_back({*label, c.weight});
      if (c.gold_sentiment) predicted.push_back(*label), gold.push_back(*c.gold_sentiment);
    }
    if (ds.selected == 0)
      fail(ErrorKind::insufficient_data, "empty selection: no comment in '" + ds.dataset + "' matches the filter");
    if (labels.empty()) fail(ErrorKind::insufficient_data, "no labeled comments in '" + ds.dataset + "'");
    ds.summary = summarize(labels);
    if (source.name != "gold" && !gold.empty()) ds.accuracy = accuracy(predicted, gold);
    all.insert(all.end(), labels.begin(), labels.end());
    all_predicted.insert(all_predicted.end(), predicted.begin(), predicted.end());
    all_gold.insert(all_gold.end(), gold.begin(), gold.end());
    all_selected += ds.selected;
    all_unlabeled += ds.unlabeled;
    run.datasets.push_back(std::move(ds));
  }
  if (corpora.size() > 1) {
    DatasetSentiment pooled;
    pooled.dataset = "pooled";
    pooled.summary = summarize(all);
    pooled.selected = all_selected;
    pooled.unlabeled = all_unlabeled;
    if (source.name != "gold" && !all_gold.empty()) pooled.accuracy = accuracy(all_predicted, all_gold);
    run.pooled = std::move(pooled);
  }

  Report report("sentiment");
  report.set("config", config_fingerprint(config));
  report.set("source", source.name);
  if (!config.filter.empty()) report.set("filter", config.filter);
  const auto& headline = run.pooled ? *run.pooled : run.datasets.front();
  report.set("weighted_average", headline.summary.weighted_average);
  report.section("datasets",
                 "dataset,selected,labeled,positive,neutral,negative,p_positive,p_neutral,p_negative,weighted_average,"
                 "total_weight,accuracy");
  auto emit = [&](const DatasetSentiment& ds) {
    const auto& s = ds.summary;
    auto p = [&](SentimentLabel l) {
      const auto it = s.proportions.find(l);
      return format_double(it == s.proportions.end() ? 0.0 : it->second);
    };
    report.row(csv::quote(ds.dataset) + "," + std::to_string(ds.selected) + "," + std::to_string(s.size) + "," +
               std::to_string(s.counts.at(SentimentLabel::positive)) + "," +
               std::to_string(s.counts.at(SentimentLabel::neutral)) + "," +
               std::to_string(s.counts.at(SentimentLabel::negative)) + "," + p(SentimentLabel::positive) + "," +
               p(SentimentLabel::neutral) + "," + p(SentimentLabel::negative) + "," +
               format_double(s.weighted_average) + "," + format_double(s.total_weight) + "," +
               (ds.accuracy ? format_double(*ds.accuracy) : std::string()));
  };
  for (const auto& ds : run.datasets) emit(ds);
  if (run.pooled) emit(*run.pooled);
  run.report = report.str();
  if (!config.output.empty()) detail::write_file(config.output, run.report);
  return run;
}

// ---------------------------------------------------------------------------
// kl

struct KlRun {
  DivergenceReport divergence;
  std::string report;
};

inline KlRun run_kl(const RunConfig& config) {
  if (config.buckets.size() != 2) fail(ErrorKind::usage, "kl needs exactly two buckets (early, late)");
  const TimeBucket early = parse_time_bucket(config.buckets[0]);
  const TimeBucket late = parse_time_bucket(config.buckets[1]);
  const auto corpora = detail::load_inputs(config);
  const Corpus corpus = detail::pool(corpora);
  const LogBase base = parse_log_base(config.base);

  KlRun run;
  if (config.categorizer == "sentiment_labels" || config.categorizer == "sentiment") {
    const auto source = detail::label_source(config, corpora);
    run.divergence = temporal_divergence(corpus, early, late, sentiment_categorizer(source.label_of), config.epsilon, base);
  } else if (config.categorizer == "cluster_assignments" || config.categorizer == "cluster") {
    const auto buckets = bucket_by_time(corpus, {early, late});
    std::vector<const Comment*> pooled;
    for (const auto* b : {&early, &late}) {
      const auto& members = buckets.at(b->label).comments;
      if (members.empty()) fail(ErrorKind::insufficient_data, "bucket '" + b->label + "' has no categorized comments");
      for (const auto& c : members) pooled.push_back(&c);
    }
    auto embedded = detail::embed_comments(config, pooled);
    const ClusterRun clustering = cluster_embeddings(config, std::move(embedded.matrix));
    run.divergence = temporal_divergence(corpus, early, late, cluster_categorizer(clustering.model), config.epsilon, base);
  } else {
    fail(ErrorKind::usage, "unknown categorizer '" + config.categorizer + "' (expected sentiment_labels or cluster_assignments)");
  }

  const auto& d = run.divergence;
  Report report("kl");
  report.set("config", config_fingerprint(config));
  report.set("bucket_a", d.bucket_a);
  report.set("bucket_b", d.bucket_b);
  report.set("categorizer", d.categorizer);
  report.set("epsilon", d.epsilon);
  report.set("base", std::string(to_string(d.base)));
  report.set("kl", d.kl);
  report.section("distributions", "category,p_" + d.bucket_a + ",q_" + d.bucket_b);
  for (std::size_t i = 0; i < d.early.categories.size(); ++i)
    report.row(csv::quote(d.early.categories[i]) + "," + format_double(d.early.probs[i]) + "," +
               format_double(d.late.probs[i]));
  run.report = report.str();
  if (!config.output.empty()) detail::write_file(config.output, run.report);
  return run;
}

// ---------------------------------------------------------------------------
// report: the whole pipeline into one directory

/// clean -> embed -> PCA -> elbow/K-means -> admission -> sentiment -> kl.
/// Writes cleaned.jsonl, embeddings.txt, the cluster outputs,
/// sentiment_report.txt, kl_report.txt (when buckets are configured) and
/// report.txt.
inline std::string run_report(const RunConfig& config) {
  if (config.output.empty()) fail(ErrorKind::usage, "report needs an output directory");
  const std::filesystem::path dir = config.output;
  std::filesystem::create_directories(dir);

  RunConfig step = config;
  step.output = (dir / "cleaned.jsonl").string();
  step.inputs = {config.inputs.empty() ? std::string() : config.inputs.front()};
  run_clean(step);

  step = config;
  step.output = (dir / "embeddings.txt").string();
  run_embed(step);

  step = config;
  step.output = dir.string();
  const ClusterRun clustering = run_cluster(step);

  step.output = (dir / "sentiment_report.txt").string();
  const SentimentRun sentiment = run_sentiment(step);

  std::optional<KlRun> kl;
  if (!config.buckets.empty()) {
    step.output = (dir / "kl_report.txt").string();
    kl = run_kl(step);
  }

  Report report("report");
  report.set("config", config_fingerprint(config));
  detail::describe_cluster_run(report, clustering, config);
  report.section("sentiment", "source,weighted_average");
  const auto& headline = sentiment.pooled ? *sentiment.pooled : sentiment.datasets.front();
  report.row(sentiment.source + "," + format_double(headline.summary.weighted_average));
  if (kl) {
    report.section("divergence", "bucket_a,bucket_b,categorizer,epsilon,base,kl");
    const auto& d = kl->divergence;
    report.row(csv::quote(d.bucket_a) + "," + csv::quote(d.bucket_b) + "," + d.categorizer + "," +
               format_double(d.epsilon) + "," + std::string(to_string(d.base)) + "," + format_double(d.kl));
  }
  detail::write_file(dir / "report.txt", report.str());
  return report.str();
}

}  // namespace relatedness
