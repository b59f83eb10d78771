#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "topicvec/config.hpp"
#include "topicvec/corpus.hpp"
#include "topicvec/embedding.hpp"
#include "topicvec/eval.hpp"
#include "topicvec/generator.hpp"
#include "topicvec/model_io.hpp"
#include "topicvec/relevance.hpp"
#include "topicvec/representation.hpp"
#include "topicvec/topic_model.hpp"

namespace fs = std::filesystem;
using namespace topicvec;

namespace {

struct FlagCapture {
  const ConfigKey* key;
  std::string value;
  CLI::Option* opt;
};

void add_config_flags(CLI::App* sub, std::string& config_path,
                      std::vector<FlagCapture>& captures) {
  sub->add_option("--config", config_path, "flat 'key = value' config file");
  // Pre-size so the value references handed to CLI11 stay valid.
  captures.reserve(config_keys().size());
  for (const auto& key : config_keys()) {
    captures.push_back({&key, "", nullptr});
    auto& cap = captures.back();
    cap.opt = sub->add_option("--" + key.name, cap.value, key.description);
  }
}

RunConfig resolve_config(const std::string& config_path,
                         const std::vector<FlagCapture>& captures) {
  RunConfig cfg;
  if (!config_path.empty()) {
    apply_config_file(cfg, config_path);
  }
  apply_env_overrides(cfg);
  for (const auto& cap : captures) {
    if (cap.opt->count() > 0) {
      cap.key->set(cfg, cap.value);
    }
  }
  validate_values(cfg);
  return cfg;
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr - buf);
}

TokenSet resolve_stopwords(const RunConfig& cfg) {
  if (cfg.stopwords.empty()) return default_stopwords();
  require_path(cfg.stopwords, "stopword file");
  return load_stopwords(cfg.stopwords);
}

struct TrainingInputs {
  Corpus corpus;
  EmbeddingMatrix V;
  TokenSet stopwords;
};

TrainingInputs load_training_inputs(const RunConfig& cfg) {
  require_path(cfg.corpus, "corpus path");
  require_path(cfg.embeddings, "embeddings path");
  TrainingInputs in;
  in.stopwords = resolve_stopwords(cfg);
  const EmbeddingFile emb = load_embeddings(cfg.embeddings);
  const TokenSet keep(emb.words.begin(), emb.words.end());
  std::optional<std::map<std::string, double>> external;
  if (!cfg.unigrams.empty()) {
    require_path(cfg.unigrams, "unigram file");
    external = load_unigrams(cfg.unigrams);
  }
  CorpusLoadOptions opts;
  opts.stopwords = in.stopwords;
  opts.keep_set = &keep;
  opts.external_unigrams = external ? &*external : nullptr;
  in.corpus = load_corpus(cfg.corpus, parse_corpus_format(cfg.corpus_format), opts);
  in.V = align(in.corpus.vocabulary, emb);
  return in;
}

bool resolve_sharing(const RunConfig& cfg, const Corpus& corpus) {
  if (cfg.sharing == "on") return true;
  if (cfg.sharing == "off") return false;
  for (const auto& doc : corpus.documents) {
    if (!doc.label.has_value()) return false;
  }
  return !corpus.documents.empty();
}

int cmd_train(const RunConfig& cfg) {
  TrainingInputs in = load_training_inputs(cfg);
  const FitResult fit =
      gem_fit(in.corpus, in.V, cfg.hyperparams(), resolve_sharing(cfg, in.corpus));
  fs::create_directories(cfg.output_dir);
  const std::string ckpt = cfg.checkpoint_path();
  save_checkpoint(fit.state, in.corpus.vocabulary.hash(), ckpt);
  const std::string trace = cfg.output_dir + "/elbo_trace.txt";
  save_elbo_trace(fit.state.elbo_trace, trace);
  std::cout << "trained " << fit.state.topic_sets.size() << " topic set(s), K="
            << cfg.num_topics << ", N=" << in.V.dim << ", vocabulary "
            << in.corpus.vocabulary.size() << " words\n";
  if (!fit.state.elbo_trace.empty()) {
    std::cout << "final elbo " << shortest(fit.state.elbo_trace.back()) << "\n";
  }
  std::cout << "checkpoint: " << ckpt << "\nelbo trace: " << trace << "\n";
  return 0;
}

Eigen::VectorXd bow_vector(const Document& doc, int W) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(W);
  for (int w : doc.tokens) counts(w) += 1.0;
  return counts;
}

int cmd_features(const RunConfig& cfg) {
  require_path(cfg.checkpoint_path(), "checkpoint");
  const Checkpoint ckpt = load_checkpoint(cfg.checkpoint_path());
  TrainingInputs in = load_training_inputs(cfg);
  verify_vocab_hash(ckpt, in.corpus.vocabulary);

  const Eigen::VectorXd& u = in.corpus.vocabulary.unigram_probs;
  const MergedTopicSpace merged = merge_topic_sets(ckpt.state, in.V, u);
  const TopicSet ts = merged.as_topic_set();
  const Eigen::VectorXd alpha = merged_alpha(ckpt.state, merged);

  std::vector<Document> docs;
  if (cfg.split == "train") {
    docs = in.corpus.documents;
  } else {
    require_path(cfg.test_corpus, "test corpus path");
    docs = project_documents(
        read_raw_documents(cfg.test_corpus, parse_corpus_format(cfg.corpus_format)),
        in.stopwords, in.corpus.vocabulary);
  }

  const ProportionEstimator estimator = cfg.estimator == "pi_mean"
                                            ? ProportionEstimator::kPiMean
                                            : ProportionEstimator::kDirichletMean;
  const bool needs_inference =
      cfg.representation == "topicvec" || cfg.representation == "tv+meanwv";

  Eigen::MatrixXd features;
  std::vector<std::string> labels;
  labels.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const Document& doc = docs[i];
    Eigen::VectorXd feat;
    if (cfg.representation == "bow") {
      feat = bow_vector(doc, in.corpus.vocabulary.size());
    } else if (cfg.representation == "meanwv") {
      feat = mean_word_vector(doc, in.V);
    } else {
      Eigen::VectorXd prop;
      if (needs_inference) {
        const DocVariational var =
            infer_new_document(doc, ts, alpha, in.V, cfg.e_tol, cfg.e_max);
        prop = doc_topic_proportions(var, estimator);
      }
      feat = cfg.representation == "topicvec"
                 ? prop
                 : combined_features(prop, mean_word_vector(doc, in.V));
    }
    if (features.rows() == 0) {
      features.resize(static_cast<Eigen::Index>(docs.size()), feat.size());
    }
    features.row(static_cast<Eigen::Index>(i)) = feat.transpose();
    labels.push_back(doc.label.value_or("unlabeled"));
  }
  if (docs.empty()) {
    throw ConfigError("no documents in the " + cfg.split + " split");
  }

  fs::create_directories(cfg.output_dir);
  const std::string out = cfg.output_dir + "/features_" + cfg.split + ".txt";
  export_features(features, labels, out);
  std::cout << "wrote " << features.rows() << " x " << features.cols()
            << " features (" << cfg.representation << ") to " << out << "\n";
  return 0;
}

int cmd_topics(const RunConfig& cfg) {
  require_path(cfg.doc, "document path");
  require_path(cfg.embeddings, "embeddings path");
  const TokenSet stopwords = resolve_stopwords(cfg);

  std::ifstream docfile(cfg.doc);
  std::ostringstream text;
  text << docfile.rdbuf();

  fs::create_directories(cfg.output_dir);
  const std::string out = cfg.output_dir + "/topic_cloud.json";

  if (!cfg.checkpoint.empty()) {
    // Infer against an existing model.
    require_path(cfg.checkpoint, "checkpoint");
    const Checkpoint ckpt = load_checkpoint(cfg.checkpoint);
    TrainingInputs in = load_training_inputs(cfg);
    verify_vocab_hash(ckpt, in.corpus.vocabulary);
    std::vector<Document> projected = project_documents(
        {{cfg.doc, std::nullopt, text.str()}}, stopwords, in.corpus.vocabulary);
    if (projected[0].tokens.empty()) {
      throw std::runtime_error("document is empty after preprocessing");
    }
    const Eigen::VectorXd& u = in.corpus.vocabulary.unigram_probs;
    const MergedTopicSpace merged = merge_topic_sets(ckpt.state, in.V, u);
    const TopicSet ts = merged.as_topic_set();
    const DocVariational var =
        infer_new_document(projected[0], ts, merged_alpha(ckpt.state, merged),
                           in.V, cfg.e_tol, cfg.e_max);
    const TopicCloud cloud =
        build_topic_cloud(projected[0], var, in.corpus.vocabulary, in.V, ts,
                          cfg.top_topics, cfg.top_words);
    export_topic_cloud(cloud, out);
  } else {
    // Single-document mode: learn the topics from this one document.
    const EmbeddingFile emb = load_embeddings(cfg.embeddings);
    const TokenSet keep(emb.words.begin(), emb.words.end());
    const auto tokens = preprocess(text.str(), stopwords, &keep);
    if (tokens.empty()) {
      throw std::runtime_error("document is empty after preprocessing");
    }
    std::optional<std::map<std::string, double>> external;
    if (!cfg.unigrams.empty()) {
      require_path(cfg.unigrams, "unigram file");
      external = load_unigrams(cfg.unigrams);
    }
    Corpus corpus;
    corpus.vocabulary = build_vocabulary({tokens}, external ? &*external : nullptr);
    Document doc;
    doc.doc_id = cfg.doc;
    for (const auto& tok : tokens) {
      doc.tokens.push_back(corpus.vocabulary.index.at(tok));
    }
    corpus.documents.push_back(std::move(doc));
    const EmbeddingMatrix V = align(corpus.vocabulary, emb);
    const FitResult fit = gem_fit(corpus, V, cfg.hyperparams(), false);
    const TopicSet& ts = fit.state.topic_sets.at("global");
    const TopicCloud cloud =
        build_topic_cloud(corpus.documents[0], fit.doc_states[0],
                          corpus.vocabulary, V, ts, cfg.top_topics, cfg.top_words);
    export_topic_cloud(cloud, out);
  }
  std::cout << "topic cloud: " << out << "\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  require_path(cfg.train_features, "train feature file");
  require_path(cfg.test_features, "test feature file");
  const SparseDataset train = load_feature_file(cfg.train_features);
  const SparseDataset test = load_feature_file(cfg.test_features);
  if (train.features.cols() != test.features.cols()) {
    throw ConfigError("feature dimension mismatch: train has " +
                      std::to_string(train.features.cols()) + ", test has " +
                      std::to_string(test.features.cols()));
  }
  const LinearClassifier clf = train_linear_classifier(
      train.features, train.labels, cfg.l1_penalty, cfg.epochs, cfg.seed);
  const ClassificationReport report =
      macro_metrics(predict_all(clf, test.features), test.labels);
  std::cout << format_report(report);
  fs::create_directories(cfg.output_dir);
  const std::string out = cfg.output_dir + "/eval_report.txt";
  write_report(report, out);
  std::cout << "report: " << out << "\n";
  return 0;
}

int cmd_synth(const RunConfig& cfg) {
  SyntheticSpec spec = SyntheticSpec::with_symmetric_alpha(cfg.num_topics, cfg.alpha);
  spec.N = cfg.synth_dim;
  spec.W = cfg.synth_vocab;
  spec.M = cfg.synth_docs;
  spec.doc_length = cfg.synth_doc_len;
  spec.gamma = cfg.gamma;
  spec.seed = cfg.seed;

  Corpus corpus;
  EmbeddingMatrix V;
  ModelState truth;
  truth.hyper = cfg.hyperparams();
  if (cfg.synth_classes == 1) {
    SyntheticData data = generate_synthetic_corpus(spec, nullptr, "class0");
    corpus = std::move(data.corpus);
    V = std::move(data.embeddings);
    data.topics.owner = "class0";
    truth.topic_sets.emplace("class0", std::move(data.topics));
  } else {
    MulticlassSynthetic data = generate_multiclass_corpus(spec, cfg.synth_classes);
    corpus = std::move(data.corpus);
    V = std::move(data.embeddings);
    truth.topic_sets = std::move(data.topics);
  }

  fs::create_directories(cfg.output_dir);
  const std::string corpus_path = cfg.output_dir + "/corpus.tsv";
  std::ofstream corpus_out(corpus_path);
  for (const auto& doc : corpus.documents) {
    corpus_out << doc.label.value_or("class0");
    char sep = '\t';
    for (int w : doc.tokens) {
      corpus_out << sep << corpus.vocabulary.words[w];
      sep = ' ';
    }
    corpus_out << '\n';
  }
  const std::string emb_path = cfg.output_dir + "/embeddings.txt";
  save_embeddings(corpus.vocabulary.words, V.V, emb_path);
  const std::string uni_path = cfg.output_dir + "/unigrams.txt";
  std::ofstream uni_out(uni_path);
  for (int i = 0; i < corpus.vocabulary.size(); ++i) {
    uni_out << corpus.vocabulary.words[i] << ' '
            << shortest(corpus.vocabulary.unigram_probs(i)) << '\n';
  }
  const std::string truth_path = cfg.output_dir + "/truth.tvec";
  save_checkpoint(truth, corpus.vocabulary.hash(), truth_path);
  std::cout << "corpus: " << corpus_path << "\nembeddings: " << emb_path
            << "\nunigrams: " << uni_path << "\nplanted truth: " << truth_path
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"topicvec: topic embeddings and document representations "
               "over pre-trained word vectors"};
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::vector<FlagCapture>> captures;

  auto* train = app.add_subcommand("train", "learn topic embeddings from a corpus");
  auto* features = app.add_subcommand("features", "export document feature vectors");
  auto* topics = app.add_subcommand("topics", "export a topic cloud for one document");
  auto* eval = app.add_subcommand("eval", "train and score the built-in classifier");
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with planted topics");
  for (auto* sub : {train, features, topics, eval, synth}) {
    add_config_flags(sub, config_path, captures[sub->get_name()]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const RunConfig cfg = resolve_config(config_path, captures[sub->get_name()]);
    if (sub == train) return cmd_train(cfg);
    if (sub == features) return cmd_features(cfg);
    if (sub == topics) return cmd_topics(cfg);
    if (sub == eval) return cmd_eval(cfg);
    return cmd_synth(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
