#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "topicvec/topic_model.hpp"

namespace topicvec {

// Raised for bad configuration values or unusable inputs; the CLI maps it to
// exit code 1 (runtime failures exit with 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  // Model hyperparameters (defaults follow the train subcommand docs).
  int num_topics = 15;     // topics per topic set, including the null topic
  double alpha = 0.1;      // symmetric Dirichlet concentration
  double gamma = 7.0;      // topic hyperball radius
  double lambda0 = 0.1;    // initial learning rate
  int l0 = 500;            // document-length threshold of the rate schedule
  int gem_iters = 100;
  double e_tol = 1e-4;
  int e_max = 100;
  double init_norm = 0.1;  // random topic init magnitude; 0 keeps topics at zero
  std::uint64_t seed = 1;

  // Paths.
  std::string corpus;          // training corpus
  std::string test_corpus;
  std::string corpus_format = "dir-per-category";  // or "labeled-lines"
  std::string embeddings;
  std::string stopwords;       // empty -> built-in list
  std::string unigrams;        // empty -> corpus MLE with add-0.5 smoothing
  std::string checkpoint;      // empty -> <output_dir>/model.tvec
  std::string output_dir = ".";
  std::string doc;             // single document for the topics subcommand

  // Modes.
  std::string sharing = "auto";          // auto | on | off
  std::string representation = "topicvec";  // topicvec | meanwv | tv+meanwv | bow
  std::string estimator = "dirichlet_mean";  // dirichlet_mean | pi_mean
  std::string split = "test";            // train | test (features subcommand)
  int top_topics = 6;
  int top_words = 10;

  // Classifier.
  std::string train_features;
  std::string test_features;
  double l1_penalty = 1e-4;
  int epochs = 50;

  // Synthetic generator.
  int synth_classes = 1;
  int synth_dim = 10;
  int synth_vocab = 50;
  int synth_docs = 200;
  int synth_doc_len = 100;

  Hyperparams hyperparams() const;
  std::string checkpoint_path() const;
};

struct ConfigKey {
  std::string name;
  std::string description;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Single source of truth for the flat "key = value" config file, the
// TOPICVEC_<KEY> environment overrides, and the --<key> CLI flags.
const std::vector<ConfigKey>& config_keys();

// Parses "key = value" lines ('#' comments allowed) into cfg.
void apply_config_file(RunConfig& cfg, const std::string& path);

// Applies TOPICVEC_<UPPERCASE_KEY> environment variables.
void apply_env_overrides(RunConfig& cfg);

// Value-range validation shared by all subcommands; throws ConfigError.
void validate_values(const RunConfig& cfg);

// Throws ConfigError unless path exists; `what` names the flag in the message.
void require_path(const std::string& path, const std::string& what);

}  // namespace topicvec
