#include "topicvec/generator.hpp"

#include <cmath>
#include <stdexcept>

namespace topicvec {

SyntheticSpec SyntheticSpec::with_symmetric_alpha(int K, double alpha_value) {
  SyntheticSpec spec;
  spec.K = K;
  spec.alpha = Eigen::VectorXd::Constant(K, alpha_value);
  return spec;
}

void SyntheticSpec::validate() const {
  if (K < 1 || N < 1 || W < 1 || M < 1 || doc_length < 0) {
    throw std::invalid_argument("synthetic spec: counts must be >= 1");
  }
  if (alpha.size() != K || (alpha.array() <= 0.0).any()) {
    throw std::invalid_argument("synthetic spec: alpha must have K positive entries");
  }
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("synthetic spec: gamma must be > 0");
  }
}

Eigen::VectorXd sample_from_hyperball(int N, double gamma, Rng& rng) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("hyperball radius must be > 0");
  }
  Eigen::VectorXd dir(N);
  double norm = 0.0;
  do {
    for (int i = 0; i < N; ++i) dir(i) = rng.gaussian();
    norm = dir.norm();
  } while (norm == 0.0);
  const double radius = gamma * std::pow(rng.uniform(), 1.0 / N);
  return (radius / norm) * dir;
}

namespace {

Vocabulary uniform_vocabulary(int W) {
  Vocabulary vocab;
  vocab.words.reserve(W);
  for (int i = 0; i < W; ++i) {
    vocab.words.push_back("w" + std::to_string(i));
    vocab.index.emplace(vocab.words.back(), i);
  }
  vocab.unigram_probs = Eigen::VectorXd::Constant(W, 1.0 / W);
  return vocab;
}

// P(. | k) columns: u_w exp(v_w . t_k + r_k), renormalized for sampling.
Eigen::MatrixXd topic_word_distributions(const EmbeddingMatrix& V,
                                         const Eigen::VectorXd& u,
                                         const TopicSet& ts) {
  Eigen::MatrixXd probs(V.V.rows(), ts.K());
  for (int k = 0; k < ts.K(); ++k) {
    Eigen::VectorXd logp =
        (V.V * ts.T.col(k)).array() + u.array().log() + ts.r(k);
    logp.array() -= logp.maxCoeff();
    probs.col(k) = logp.array().exp();
    probs.col(k) /= probs.col(k).sum();
  }
  return probs;
}

}  // namespace

SyntheticData generate_synthetic_corpus(const SyntheticSpec& spec,
                                        const Eigen::MatrixXd* fixed_embeddings,
                                        const std::string& label) {
  spec.validate();
  Rng rng(spec.seed);
  SyntheticData data;
  data.corpus.vocabulary = uniform_vocabulary(spec.W);

  if (fixed_embeddings != nullptr) {
    if (fixed_embeddings->rows() != spec.W || fixed_embeddings->cols() != spec.N) {
      throw std::invalid_argument("fixed embeddings have the wrong shape");
    }
    data.embeddings.V = *fixed_embeddings;
  } else {
    data.embeddings.V.resize(spec.W, spec.N);
    for (int i = 0; i < spec.W; ++i) {
      for (int j = 0; j < spec.N; ++j) {
        data.embeddings.V(i, j) = rng.gaussian();
      }
    }
  }
  data.embeddings.dim = spec.N;

  data.topics = TopicSet::zeros(spec.N, spec.K);
  for (int k = 1; k < spec.K; ++k) {
    data.topics.T.col(k) = sample_from_hyperball(spec.N, spec.gamma, rng);
  }
  const Eigen::VectorXd& u = data.corpus.vocabulary.unigram_probs;
  data.topics.r = compute_topic_residuals(data.embeddings, u, data.topics.T);

  const Eigen::MatrixXd word_probs =
      topic_word_distributions(data.embeddings, u, data.topics);

  data.phi.resize(spec.M, spec.K);
  data.corpus.documents.reserve(spec.M);
  for (int m = 0; m < spec.M; ++m) {
    Document doc;
    doc.doc_id = (label.empty() ? std::string("doc") : label + "_doc") + std::to_string(m);
    if (!label.empty()) doc.label = label;
    const Eigen::VectorXd phi = rng.dirichlet(spec.alpha);
    data.phi.row(m) = phi.transpose();
    doc.tokens.reserve(spec.doc_length);
    for (int j = 0; j < spec.doc_length; ++j) {
      const int z = rng.categorical(phi);
      doc.tokens.push_back(rng.categorical(word_probs.col(z)));
    }
    data.corpus.documents.push_back(std::move(doc));
  }
  return data;
}

MulticlassSynthetic generate_multiclass_corpus(const SyntheticSpec& per_class,
                                               int num_classes) {
  per_class.validate();
  if (num_classes < 1) {
    throw std::invalid_argument("num_classes must be >= 1");
  }
  MulticlassSynthetic data;
  data.corpus.vocabulary = uniform_vocabulary(per_class.W);

  Rng rng(per_class.seed);
  data.embeddings.V.resize(per_class.W, per_class.N);
  for (int i = 0; i < per_class.W; ++i) {
    for (int j = 0; j < per_class.N; ++j) {
      data.embeddings.V(i, j) = rng.gaussian();
    }
  }
  data.embeddings.dim = per_class.N;

  for (int c = 0; c < num_classes; ++c) {
    const std::string label = "class" + std::to_string(c);
    SyntheticSpec spec = per_class;
    // Distinct but deterministic stream per class.
    spec.seed = rng.next_u64();
    SyntheticData part =
        generate_synthetic_corpus(spec, &data.embeddings.V, label);
    part.topics.owner = label;
    data.topics.emplace(label, std::move(part.topics));
    data.phi.emplace(label, std::move(part.phi));
    for (auto& doc : part.corpus.documents) {
      data.corpus.documents.push_back(std::move(doc));
    }
  }
  return data;
}

}  // namespace topicvec
