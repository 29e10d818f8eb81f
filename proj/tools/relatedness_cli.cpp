// relatedness: command-line front end for the comment relatedness pipeline.

#include <cstring>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "relatedness/pipeline.hpp"

namespace {

using relatedness::RunConfig;

void add_run_options(CLI::App& app, RunConfig& c) {
  app.add_option("-i,--input", c.inputs, "Comment file(s), one per dataset");
  app.add_option("--format", c.format, "auto, jsonl or csv")->capture_default_str();
  app.add_option("--schema", c.schema, "Field mapping, e.g. text=body,id=comment_id");
  app.add_option("-o,--output", c.output, "Output file or directory");
  app.add_option("--seed", c.seed, "Seed for every random choice")->capture_default_str();

  app.add_option("--embedding", c.embedding, "hash, word-vectors or matrix")->capture_default_str();
  app.add_option("--word-vectors", c.word_vectors, "Word vector text file (token v1 ... vd)");
  app.add_option("--matrix", c.matrix, "Embedding matrix file (\"n d\" header, then id v1 ... vd)");
  app.add_option("--hash-dim", c.hash_dim, "Hash embedding dimension")->capture_default_str();
  app.add_flag("--normalize,!--no-normalize", c.normalize, "L2-normalize embeddings");

  app.add_flag("--pca,!--no-pca", c.pca, "Reduce with PCA before clustering");
  app.add_option("--pca-components", c.pca_components, "Fixed PCA rank (0: choose by --pca-ratio)");
  app.add_option("--pca-ratio", c.pca_ratio, "Cumulative explained-variance target")->capture_default_str();

  app.add_option("-k,--k", c.k, "Number of clusters (0: elbow scan)");
  app.add_option("--k-min", c.k_min, "Elbow scan lower bound")->capture_default_str();
  app.add_option("--k-max", c.k_max, "Elbow scan upper bound")->capture_default_str();
  app.add_option("--restarts", c.restarts, "K-means restarts per K")->capture_default_str();
  app.add_option("--max-iter", c.max_iter, "Lloyd iteration cap")->capture_default_str();
  app.add_option("--tol", c.tol, "Centroid-shift convergence tolerance")->capture_default_str();
  app.add_option("--admit-threshold", c.admit_threshold, "Cluster cohesion threshold")->capture_default_str();
  app.add_option("--metric", c.metric, "Silhouette metric: euclidean or cosine")->capture_default_str();

  app.add_option("--sentiment-source", c.sentiment_source, "auto, gold, predictions or lexicon")->capture_default_str();
  app.add_option("--predictions", c.predictions, "CSV comment_id,label");
  app.add_option("--lexicon", c.lexicon, "CSV token,valence");
  app.add_option("--lexicon-margin", c.lexicon_margin, "Neutral band half-width")->capture_default_str();
  app.add_option("--filter", c.filter, "Only comments containing this text");

  app.add_option("--bucket", c.buckets, "Time bucket label=start,end (give two)");
  app.add_option("--categorizer", c.categorizer, "sentiment_labels or cluster_assignments")->capture_default_str();
  app.add_option("--epsilon", c.epsilon, "Additive smoothing")->capture_default_str();
  app.add_option("--base", c.base, "natural or log2")->capture_default_str();
}

std::string one_line(std::string text) {
  for (char& ch : text)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig config;
  std::string config_path;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::strcmp(argv[i], "--config") == 0) config_path = argv[i + 1];

  try {
    if (!config_path.empty()) config = relatedness::load_run_config(config_path);
  } catch (const relatedness::Error& e) {
    std::cerr << "error: " << relatedness::to_string(e.kind()) << ": " << one_line(e.what()) << '\n';
    return relatedness::exit_code(e.kind());
  }

  CLI::App app{"Measure relatedness, sentiment and drift in social-media comments"};
  app.require_subcommand(1);
  std::string save_config;

  const char* commands[][2] = {
      {"clean", "Clean comments and write JSONL with clean_text"},
      {"embed", "Embed comments and write an embedding matrix"},
      {"cluster", "PCA, elbow/K-means, silhouette and threshold admission"},
      {"sentiment", "Label distribution and weighted sentiment average"},
      {"kl", "KL divergence of category distributions between two time buckets"},
      {"report", "Run the whole pipeline into one directory"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON RunConfig; flags override it");
    sub->add_option("--save-config", save_config, "Write the effective RunConfig as JSON");
    add_run_options(*sub, config);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: usage: " << one_line(e.what()) << '\n';
    return 1;
  }

  try {
    if (!save_config.empty()) {
      std::ofstream out(save_config);
      out << nlohmann::json(config).dump(2) << '\n';
    }
    const std::string command = app.get_subcommands().front()->get_name();
    if (command == "clean") {
      relatedness::run_clean(config);
    } else if (command == "embed") {
      relatedness::run_embed(config);
    } else if (command == "cluster") {
      relatedness::run_cluster(config);
    } else if (command == "sentiment") {
      const auto run = relatedness::run_sentiment(config);
      if (config.output.empty()) std::cout << run.report;
    } else if (command == "kl") {
      const auto run = relatedness::run_kl(config);
      if (config.output.empty()) std::cout << run.report;
    } else if (command == "report") {
      relatedness::run_report(config);
    }
  } catch (const relatedness::Error& e) {
    std::cerr << "error: " << relatedness::to_string(e.kind()) << ": " << one_line(e.what()) << '\n';
    return relatedness::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: io: " << one_line(e.what()) << '\n';
    return 2;
  }
  return 0;
}
