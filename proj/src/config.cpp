#include "topicvec/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace topicvec {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': '" + value + "' is not an integer");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': '" + value + "' is not a number");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': '" + value + "' is not an unsigned integer");
  }
}

ConfigKey int_key(const std::string& name, const std::string& desc, int RunConfig::*field) {
  return {name, desc,
          [name, field](RunConfig& c, const std::string& v) { c.*field = parse_int(name, v); },
          [field](const RunConfig& c) { return std::to_string(c.*field); }};
}

ConfigKey double_key(const std::string& name, const std::string& desc,
                     double RunConfig::*field) {
  return {name, desc,
          [name, field](RunConfig& c, const std::string& v) { c.*field = parse_double(name, v); },
          [field](const RunConfig& c) {
            std::ostringstream ss;
            ss << c.*field;
            return ss.str();
          }};
}

ConfigKey string_key(const std::string& name, const std::string& desc,
                     std::string RunConfig::*field) {
  return {name, desc,
          [field](RunConfig& c, const std::string& v) { c.*field = v; },
          [field](const RunConfig& c) { return c.*field; }};
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> kKeys = {
      int_key("num_topics", "topics per topic set, including the null topic",
              &RunConfig::num_topics),
      double_key("alpha", "symmetric Dirichlet concentration", &RunConfig::alpha),
      double_key("gamma", "topic hyperball radius", &RunConfig::gamma),
      double_key("lambda0", "initial learning rate", &RunConfig::lambda0),
      int_key("l0", "document-length threshold of the learning-rate schedule",
              &RunConfig::l0),
      int_key("gem_iters", "outer GEM iterations", &RunConfig::gem_iters),
      double_key("e_tol", "E-step convergence tolerance on max |delta theta|",
                 &RunConfig::e_tol),
      int_key("e_max", "E-step max pi/theta alternations", &RunConfig::e_max),
      double_key("init_norm", "random topic init magnitude (0 keeps topics at zero)",
                 &RunConfig::init_norm),
      {"seed", "random seed",
       [](RunConfig& c, const std::string& v) { c.seed = parse_u64("seed", v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      string_key("corpus", "training corpus path", &RunConfig::corpus),
      string_key("test_corpus", "held-out corpus path", &RunConfig::test_corpus),
      string_key("corpus_format", "dir-per-category | labeled-lines",
                 &RunConfig::corpus_format),
      string_key("embeddings", "word embedding file (optionally .gz)",
                 &RunConfig::embeddings),
      string_key("stopwords", "stopword file, one token per line",
                 &RunConfig::stopwords),
      string_key("unigrams", "external unigram file, 'word prob' per line",
                 &RunConfig::unigrams),
      string_key("checkpoint", "model checkpoint path", &RunConfig::checkpoint),
      string_key("output_dir", "directory for generated files", &RunConfig::output_dir),
      string_key("doc", "single document path for the topics subcommand",
                 &RunConfig::doc),
      string_key("sharing", "per-category topic sharing: auto | on | off",
                 &RunConfig::sharing),
      string_key("representation", "topicvec | meanwv | tv+meanwv | bow",
                 &RunConfig::representation),
      string_key("estimator", "topic proportion estimator: dirichlet_mean | pi_mean",
                 &RunConfig::estimator),
      string_key("split", "which corpus the features subcommand reads: train | test",
                 &RunConfig::split),
      int_key("top_topics", "topics exported in the topic cloud", &RunConfig::top_topics),
      int_key("top_words", "words per topic in the topic cloud", &RunConfig::top_words),
      string_key("train_features", "training feature file for eval",
                 &RunConfig::train_features),
      string_key("test_features", "test feature file for eval", &RunConfig::test_features),
      double_key("l1_penalty", "classifier L1 penalty", &RunConfig::l1_penalty),
      int_key("epochs", "classifier training epochs", &RunConfig::epochs),
      int_key("synth_classes", "synthetic classes (one topic set each)",
              &RunConfig::synth_classes),
      int_key("synth_dim", "synthetic embedding dimension", &RunConfig::synth_dim),
      int_key("synth_vocab", "synthetic vocabulary size", &RunConfig::synth_vocab),
      int_key("synth_docs", "synthetic documents per class", &RunConfig::synth_docs),
      int_key("synth_doc_len", "synthetic words per document", &RunConfig::synth_doc_len),
  };
  return kKeys;
}

Hyperparams RunConfig::hyperparams() const {
  Hyperparams h = Hyperparams::with_symmetric_alpha(num_topics, alpha);
  h.gamma = gamma;
  h.lambda0 = lambda0;
  h.L0 = l0;
  h.gem_iters = gem_iters;
  h.e_tol = e_tol;
  h.e_max = e_max;
  h.init_norm = init_norm;
  h.seed = seed;
  return h;
}

std::string RunConfig::checkpoint_path() const {
  if (!checkpoint.empty()) return checkpoint;
  return output_dir + "/model.tvec";
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file '" + path + "'");
  }
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config file line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    bool found = false;
    for (const auto& k : config_keys()) {
      if (k.name == key) {
        k.set(cfg, value);
        found = true;
        break;
      }
    }
    if (!found) {
      throw ConfigError("config file line " + std::to_string(lineno) +
                        ": unknown key '" + key + "'");
    }
  }
}

void apply_env_overrides(RunConfig& cfg) {
  for (const auto& k : config_keys()) {
    std::string env_name = "TOPICVEC_" + k.name;
    std::transform(env_name.begin(), env_name.end(), env_name.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    if (const char* value = std::getenv(env_name.c_str())) {
      k.set(cfg, value);
    }
  }
}

void validate_values(const RunConfig& cfg) {
  if (cfg.num_topics < 1) throw ConfigError("num_topics must be >= 1");
  if (!(cfg.alpha > 0.0)) throw ConfigError("alpha must be > 0");
  if (!(cfg.gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (!(cfg.lambda0 > 0.0)) throw ConfigError("lambda0 must be > 0");
  if (cfg.l0 < 1) throw ConfigError("l0 must be >= 1");
  if (cfg.gem_iters < 0) throw ConfigError("gem_iters must be >= 0");
  if (!(cfg.e_tol > 0.0)) throw ConfigError("e_tol must be > 0");
  if (cfg.e_max < 1) throw ConfigError("e_max must be >= 1");
  if (cfg.init_norm < 0.0) throw ConfigError("init_norm must be >= 0");
  if (cfg.top_topics < 0 || cfg.top_words < 0) {
    throw ConfigError("top_topics and top_words must be >= 0");
  }
  if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (cfg.l1_penalty < 0.0) throw ConfigError("l1_penalty must be >= 0");
  if (cfg.sharing != "auto" && cfg.sharing != "on" && cfg.sharing != "off") {
    throw ConfigError("sharing must be auto, on or off");
  }
  if (cfg.representation != "topicvec" && cfg.representation != "meanwv" &&
      cfg.representation != "tv+meanwv" && cfg.representation != "bow") {
    throw ConfigError("unknown representation tag '" + cfg.representation + "'");
  }
  if (cfg.estimator != "dirichlet_mean" && cfg.estimator != "pi_mean") {
    throw ConfigError("estimator must be dirichlet_mean or pi_mean");
  }
  if (cfg.split != "train" && cfg.split != "test") {
    throw ConfigError("split must be train or test");
  }
  if (cfg.corpus_format != "dir-per-category" && cfg.corpus_format != "labeled-lines") {
    throw ConfigError("unknown corpus format tag '" + cfg.corpus_format + "'");
  }
  if (cfg.synth_classes < 1 || cfg.synth_dim < 1 || cfg.synth_vocab < 1 ||
      cfg.synth_docs < 1 || cfg.synth_doc_len < 0) {
    throw ConfigError("synthetic generator sizes must be positive");
  }
}

void require_path(const std::string& path, const std::string& what) {
  if (path.empty()) {
    throw ConfigError("missing required path: " + what);
  }
  if (!std::filesystem::exists(path)) {
    throw ConfigError(what + " '" + path + "' does not exist");
  }
}

}  // namespace topicvec
