#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "topicvec/corpus.hpp"
#include "topicvec/embedding.hpp"

namespace topicvec {

struct Hyperparams {
  int K = 15;                 // topics per topic set, including the null topic
  Eigen::VectorXd alpha;      // K Dirichlet concentrations, all > 0
  double gamma = 7.0;         // hyperball radius
  double lambda0 = 0.1;       // initial learning rate
  int L0 = 500;               // document-length threshold in the rate schedule
  int gem_iters = 100;
  double e_tol = 1e-4;        // E-step convergence: max |delta theta|
  int e_max = 100;            // E-step max pi/theta alternations
  double init_norm = 0.1;     // norm of the random non-null topic init; 0 keeps T = 0
  std::uint64_t seed = 1;

  static Hyperparams with_symmetric_alpha(int K, double alpha_value);
  void validate() const;  // throws std::invalid_argument
};

// N x K topic matrix with column 0 pinned to the zero vector (the null
// topic, under which a word's probability is its unigram probability) and
// the residual vector r making P(w|k) = u_w * exp(v_w . t_k + r_k) sum to 1.
struct TopicSet {
  Eigen::MatrixXd T;  // N x K, column k = topic embedding t_k
  Eigen::VectorXd r;  // K residuals; r(0) == 0
  std::string owner = "global";

  int K() const { return static_cast<int>(T.cols()); }
  int dim() const { return static_cast<int>(T.rows()); }
  static TopicSet zeros(int N, int K, std::string owner = "global");
};

// Mean-field state of one document: responsibilities pi (rows sum to 1) and
// the Dirichlet parameter theta of the mixing proportions.
struct DocVariational {
  Eigen::MatrixXd pi;     // L x K
  Eigen::VectorXd theta;  // K
  // pi/theta alternations the E-step ran; equal to e_max when the tolerance
  // was not reached (not an error, just reported here).
  int alternations = 0;
};

struct ModelState {
  std::map<std::string, TopicSet> topic_sets;  // category -> set; ordered for determinism
  Hyperparams hyper;
  std::vector<double> elbo_trace;  // one value per GEM iteration
};

inline std::vector<bool> all_active(int K) { return std::vector<bool>(K, true); }

// r_k = -log sum_s u_s exp(v_s . t_k), max-shifted. Exactly-zero columns get
// r_k = 0 so the null topic reduces to the unigram distribution exactly.
// Throws "embedding overflow" on non-finite inner products.
Eigen::VectorXd compute_topic_residuals(const EmbeddingMatrix& V,
                                        const Eigen::VectorXd& u,
                                        const Eigen::MatrixXd& T);

// log u_w + v_w . t_k + r_k
double log_word_topic_prob(int word, int k, const TopicSet& ts,
                           const EmbeddingMatrix& V, const Eigen::VectorXd& u);

// One responsibility row per word: pi_j^k proportional to
// exp(psi(theta_k) + v_wj . t_k + r_k) over active topics, exact 0 elsewhere.
Eigen::MatrixXd update_pi(const Document& doc, const Eigen::VectorXd& theta,
                          const TopicSet& ts, const EmbeddingMatrix& V,
                          const std::vector<bool>& active);

// theta_k = sum_j pi_j^k + alpha_k
Eigen::VectorXd update_theta(const Eigen::MatrixXd& pi,
                             const Eigen::VectorXd& alpha);

// Coordinate ascent on (pi, theta) from theta = alpha + L/K_active, until
// max |delta theta| < e_tol or e_max alternations. When elbo_trace is given,
// the document's ELBO contribution is appended after every half-update.
DocVariational e_step_document(const Document& doc, const TopicSet& ts,
                               const EmbeddingMatrix& V, const Hyperparams& hyper,
                               const std::vector<bool>& active,
                               std::vector<double>* elbo_trace = nullptr);

// This document's share of L(q,T) - C1: the Dirichlet expectation term, the
// topic/residual alignment terms, and the entropy of q (0*log 0 := 0).
double doc_elbo(const Document& doc, const DocVariational& var,
                const TopicSet& ts, const EmbeddingMatrix& V,
                const Eigen::VectorXd& alpha);

// Sum of doc_elbo over the corpus; doc_topic_set[i] is document i's set.
double elbo_core(const std::vector<Document>& docs,
                 const std::vector<DocVariational>& vars,
                 const std::vector<const TopicSet*>& doc_topic_set,
                 const EmbeddingMatrix& V, const Eigen::VectorXd& alpha);

// d r_k / d t_k = -(sum_s u_s e^{v_s.t_k} v_s) / (sum_s u_s e^{v_s.t_k}),
// computed with a shared max shift.
Eigen::VectorXd residual_gradient(const TopicSet& ts, const EmbeddingMatrix& V,
                                  const Eigen::VectorXd& u, int k);

// Ascent direction for a topic set shared by `docs`:
// sum_docs sum_j v_wj pi_j^T plus per-column mbar_k * dr_k/dt_k, with the
// null column zeroed before return.
Eigen::MatrixXd topic_gradient(const std::vector<const Document*>& docs,
                               const std::vector<const DocVariational*>& vars,
                               const TopicSet& ts, const EmbeddingMatrix& V,
                               const Eigen::VectorXd& u);

// lambda(l, L) = L0 * lambda0 / (l * max(L, L0))
double learning_rate(int iteration, std::int64_t total_length,
                     const Hyperparams& hyper);

// T += lambda * gradient; columns above the gamma ball are radially
// projected back to norm gamma; the null column is reset to zero and the
// residuals are recomputed.
void m_step(TopicSet& ts, const Eigen::MatrixXd& gradient, int iteration,
            std::int64_t total_length, const Hyperparams& hyper,
            const EmbeddingMatrix& V, const Eigen::VectorXd& u);

struct GemIterationView {
  int iteration;  // 1-based
  const std::map<std::string, TopicSet>& topic_sets;
  const std::vector<DocVariational>& doc_states;  // parallel to corpus.documents
  double elbo;
};
using GemObserver = std::function<void(const GemIterationView&)>;

struct FitResult {
  ModelState state;
  // Final variational states, refreshed against the final topics so they are
  // consistent with what infer_new_document would produce.
  std::vector<DocVariational> doc_states;
};

// The outer GEM loop: per-iteration full E-step over all documents followed
// by one gradient M-step per topic set (gradients summed over the documents
// owning the set), recording elbo_core after each iteration. Deterministic
// given inputs and hyperparameters. With per_category on, every document
// must carry a label.
FitResult gem_fit(const Corpus& corpus, const EmbeddingMatrix& V,
                  const Hyperparams& hyper, bool per_category,
                  const GemObserver& observer = {});

// One E-step against a frozen topic set (typically the merged space); no
// topic update. Deterministic.
DocVariational infer_new_document(const Document& doc, const TopicSet& topics,
                                  const Eigen::VectorXd& alpha,
                                  const EmbeddingMatrix& V, double e_tol,
                                  int e_max);

}  // namespace topicvec
