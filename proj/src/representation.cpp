#include "topicvec/representation.hpp"

#include <iostream>
#include <stdexcept>

namespace topicvec {

TopicSet MergedTopicSpace::as_topic_set() const {
  TopicSet ts;
  ts.T = topics;
  ts.r = residuals;
  ts.owner = "merged";
  return ts;
}

MergedTopicSpace merge_topic_sets(const ModelState& state,
                                  const EmbeddingMatrix& V,
                                  const Eigen::VectorXd& u) {
  if (state.topic_sets.empty()) {
    throw std::invalid_argument("merge_topic_sets: no topic sets");
  }
  const int N = state.topic_sets.begin()->second.dim();
  int k_total = 1;
  for (const auto& [name, ts] : state.topic_sets) {
    if (ts.dim() != N) {
      throw std::invalid_argument("merge_topic_sets: topic sets disagree on N");
    }
    k_total += ts.K() - 1;
  }
  MergedTopicSpace space;
  space.topics = Eigen::MatrixXd::Zero(N, k_total);
  space.origin.reserve(k_total);
  space.origin.push_back({"", 0});  // the single retained null topic
  int col = 1;
  for (const auto& [name, ts] : state.topic_sets) {
    for (int k = 1; k < ts.K(); ++k) {
      space.topics.col(col) = ts.T.col(k);
      space.origin.push_back({name, k});
      ++col;
    }
  }
  space.residuals = compute_topic_residuals(V, u, space.topics);
  return space;
}

Eigen::VectorXd merged_alpha(const ModelState& state,
                             const MergedTopicSpace& space) {
  Eigen::VectorXd alpha(space.K_total());
  for (int k = 0; k < space.K_total(); ++k) {
    alpha(k) = state.hyper.alpha(space.origin[k].local_index);
  }
  return alpha;
}

Eigen::VectorXd doc_topic_proportions(const DocVariational& var,
                                      ProportionEstimator estimator) {
  if (estimator == ProportionEstimator::kPiMean && var.pi.rows() > 0) {
    Eigen::VectorXd mean = var.pi.colwise().mean().transpose();
    return mean / mean.sum();
  }
  return var.theta / var.theta.sum();
}

Eigen::VectorXd mean_word_vector(const Document& doc, const EmbeddingMatrix& V) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(V.dim);
  if (doc.tokens.empty()) {
    std::cerr << "warning: mean word vector of empty document '" << doc.doc_id
              << "' is zero\n";
    return mean;
  }
  for (int w : doc.tokens) {
    mean += V.V.row(w).transpose();
  }
  return mean / static_cast<double>(doc.tokens.size());
}

Eigen::VectorXd combined_features(const Eigen::VectorXd& proportions,
                                  const Eigen::VectorXd& mean_wv) {
  Eigen::VectorXd out(proportions.size() + mean_wv.size());
  out << proportions, mean_wv;
  return out;
}

Eigen::MatrixXd topic_similarity_matrix(const MergedTopicSpace& space) {
  const int K = space.K_total();
  Eigen::VectorXd norms(K);
  for (int k = 0; k < K; ++k) {
    norms(k) = space.topics.col(k).norm();
  }
  Eigen::MatrixXd S(K, K);
  for (int j = 0; j < K; ++j) {
    S(j, j) = 1.0;
    for (int k = j + 1; k < K; ++k) {
      double s = 0.0;
      if (norms(j) > 0.0 && norms(k) > 0.0) {
        s = space.topics.col(j).dot(space.topics.col(k)) / (norms(j) * norms(k));
      }
      S(j, k) = s;
      S(k, j) = s;
    }
  }
  return S;
}

double adjusted_doc_similarity(const Eigen::VectorXd& p,
                               const Eigen::VectorXd& q,
                               const Eigen::MatrixXd& S) {
  return p.dot(S * q);
}

}  // namespace topicvec
