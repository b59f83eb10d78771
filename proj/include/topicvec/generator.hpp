#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <Eigen/Core>

#include "topicvec/corpus.hpp"
#include "topicvec/embedding.hpp"
#include "topicvec/rng.hpp"
#include "topicvec/topic_model.hpp"

namespace topicvec {

struct SyntheticSpec {
  int K = 5;             // topics, including the null topic
  int N = 10;            // embedding dimension
  int W = 50;            // vocabulary size
  int M = 200;           // documents
  int doc_length = 100;  // words per document
  Eigen::VectorXd alpha;
  double gamma = 7.0;
  std::uint64_t seed = 0;

  static SyntheticSpec with_symmetric_alpha(int K, double alpha_value);
  void validate() const;
};

// Uniform over the solid ball of radius gamma: spherically symmetric
// direction, radius gamma * U^(1/N).
Eigen::VectorXd sample_from_hyperball(int N, double gamma, Rng& rng);

struct SyntheticData {
  Corpus corpus;               // uniform unigram distribution, words "w0".."w{W-1}"
  EmbeddingMatrix embeddings;  // aligned to the vocabulary
  TopicSet topics;             // planted truth: null column plus hyperball draws
  Eigen::MatrixXd phi;         // M x K planted mixing proportions
};

// Samples the generative process: topics from the hyperball (null topic
// pinned), per document phi ~ Dir(alpha), per word z ~ Cat(phi) and
// w ~ u_w exp(v_w . t_z + r_z). Word embeddings are spherical Gaussian
// draws unless fixed_embeddings (W x N) is supplied. Deterministic in seed.
// Documents are labeled `label` when it is non-empty.
SyntheticData generate_synthetic_corpus(
    const SyntheticSpec& spec, const Eigen::MatrixXd* fixed_embeddings = nullptr,
    const std::string& label = "");

struct MulticlassSynthetic {
  Corpus corpus;  // labels "class0".."class{C-1}", M docs per class
  EmbeddingMatrix embeddings;
  std::map<std::string, TopicSet> topics;       // per-class planted sets
  std::map<std::string, Eigen::MatrixXd> phi;   // per-class M x K
};

// Shared embeddings and vocabulary; each class gets its own planted topic
// set drawn from the continuing stream of the seeded generator.
MulticlassSynthetic generate_multiclass_corpus(const SyntheticSpec& per_class,
                                               int num_classes);

}  // namespace topicvec
