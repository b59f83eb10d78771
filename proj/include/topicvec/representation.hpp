#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "topicvec/embedding.hpp"
#include "topicvec/topic_model.hpp"

namespace topicvec {

struct TopicOrigin {
  std::string category;  // empty for the shared null topic
  int local_index = 0;   // column in the category's own set
};

// Concatenation of every category's non-null topics behind a single shared
// null column: K_total = sum_cat (K - 1) + 1.
struct MergedTopicSpace {
  Eigen::MatrixXd topics;     // N x K_total
  Eigen::VectorXd residuals;  // K_total, recomputed against the global u
  std::vector<TopicOrigin> origin;

  int K_total() const { return static_cast<int>(topics.cols()); }
  TopicSet as_topic_set() const;
};

MergedTopicSpace merge_topic_sets(const ModelState& state,
                                  const EmbeddingMatrix& V,
                                  const Eigen::VectorXd& u);

// Dirichlet concentrations for the merged space: each merged topic keeps the
// alpha entry of its source column.
Eigen::VectorXd merged_alpha(const ModelState& state,
                             const MergedTopicSpace& space);

enum class ProportionEstimator {
  kDirichletMean,  // theta / sum(theta), the posterior mean of phi
  kPiMean,         // column means of pi (falls back to the Dirichlet mean at L = 0)
};

Eigen::VectorXd doc_topic_proportions(
    const DocVariational& var,
    ProportionEstimator estimator = ProportionEstimator::kDirichletMean);

// Unweighted mean of the token embeddings; an empty document yields the zero
// vector with a warning on stderr.
Eigen::VectorXd mean_word_vector(const Document& doc, const EmbeddingMatrix& V);

// Proportions first, then the mean word vector.
Eigen::VectorXd combined_features(const Eigen::VectorXd& proportions,
                                  const Eigen::VectorXd& mean_wv);

// S_jk = cosine(t_j, t_k); rows/columns of zero-norm topics (the null topic)
// are 0 off the diagonal and 1 on it.
Eigen::MatrixXd topic_similarity_matrix(const MergedTopicSpace& space);

// p' S q: document similarity that credits distinct-but-similar topics from
// different category sets.
double adjusted_doc_similarity(const Eigen::VectorXd& p,
                               const Eigen::VectorXd& q,
                               const Eigen::MatrixXd& S);

}  // namespace topicvec
