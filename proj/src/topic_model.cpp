#include "topicvec/topic_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "topicvec/numerics.hpp"
#include "topicvec/rng.hpp"

namespace topicvec {

Hyperparams Hyperparams::with_symmetric_alpha(int K, double alpha_value) {
  Hyperparams h;
  h.K = K;
  h.alpha = Eigen::VectorXd::Constant(K, alpha_value);
  return h;
}

void Hyperparams::validate() const {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (alpha.size() != K) throw std::invalid_argument("alpha must have K entries");
  if ((alpha.array() <= 0.0).any()) throw std::invalid_argument("alpha entries must be > 0");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  if (!(lambda0 > 0.0)) throw std::invalid_argument("lambda0 must be > 0");
  if (L0 < 1) throw std::invalid_argument("L0 must be >= 1");
  if (gem_iters < 0) throw std::invalid_argument("gem_iters must be >= 0");
  if (!(e_tol > 0.0)) throw std::invalid_argument("e_tol must be > 0");
  if (e_max < 1) throw std::invalid_argument("e_max must be >= 1");
  if (init_norm < 0.0) throw std::invalid_argument("init_norm must be >= 0");
}

TopicSet TopicSet::zeros(int N, int K, std::string owner) {
  TopicSet ts;
  ts.T = Eigen::MatrixXd::Zero(N, K);
  ts.r = Eigen::VectorXd::Zero(K);
  ts.owner = std::move(owner);
  return ts;
}

Eigen::VectorXd compute_topic_residuals(const EmbeddingMatrix& V,
                                        const Eigen::VectorXd& u,
                                        const Eigen::MatrixXd& T) {
  const Eigen::MatrixXd inner = V.V * T;  // W x K
  if (!inner.allFinite()) {
    throw std::runtime_error("embedding overflow");
  }
  const int K = static_cast<int>(T.cols());
  Eigen::VectorXd r(K);
  for (int k = 0; k < K; ++k) {
    if (T.col(k).isZero(0.0)) {
      // exp(0) = 1 and u sums to one, so the residual is analytically zero;
      // setting it exactly keeps the null topic at the unigram distribution.
      r(k) = 0.0;
      continue;
    }
    r(k) = -log_sum_exp_weighted(inner.col(k), u);
  }
  return r;
}

double log_word_topic_prob(int word, int k, const TopicSet& ts,
                           const EmbeddingMatrix& V, const Eigen::VectorXd& u) {
  return std::log(u(word)) + V.V.row(word).dot(ts.T.col(k)) + ts.r(k);
}

namespace {

int count_active(const std::vector<bool>& active) {
  int n = 0;
  for (bool b : active) n += b ? 1 : 0;
  return n;
}

// Word scores v_wj . t_k + r_k for every word of the document; the part of
// the pi update that does not change across alternations.
Eigen::MatrixXd word_topic_scores(const Document& doc, const TopicSet& ts,
                                  const EmbeddingMatrix& V) {
  const int L = doc.length();
  Eigen::MatrixXd base(L, ts.K());
  for (int j = 0; j < L; ++j) {
    base.row(j) = V.V.row(doc.tokens[j]) * ts.T;
  }
  base.rowwise() += ts.r.transpose();
  return base;
}

// Row-wise max-shifted softmax of base_jk + psi(theta_k) over active topics;
// inactive entries are exactly zero.
Eigen::MatrixXd pi_from_scores(const Eigen::MatrixXd& base,
                               const Eigen::VectorXd& theta,
                               const std::vector<bool>& active) {
  const int K = static_cast<int>(base.cols());
  const int L = static_cast<int>(base.rows());
  if (count_active(active) == 0) {
    throw std::invalid_argument("no active topics");
  }
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(K);
  for (int k = 0; k < K; ++k) {
    if (active[k]) psi(k) = digamma(theta(k));
  }
  Eigen::MatrixXd pi(L, K);
  for (int j = 0; j < L; ++j) {
    double m = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      if (active[k]) m = std::max(m, base(j, k) + psi(k));
    }
    double z = 0.0;
    for (int k = 0; k < K; ++k) {
      if (active[k]) {
        pi(j, k) = std::exp(base(j, k) + psi(k) - m);
        z += pi(j, k);
      } else {
        pi(j, k) = 0.0;
      }
    }
    for (int k = 0; k < K; ++k) pi(j, k) /= z;
  }
  return pi;
}

}  // namespace

Eigen::MatrixXd update_pi(const Document& doc, const Eigen::VectorXd& theta,
                          const TopicSet& ts, const EmbeddingMatrix& V,
                          const std::vector<bool>& active) {
  return pi_from_scores(word_topic_scores(doc, ts, V), theta, active);
}

Eigen::VectorXd update_theta(const Eigen::MatrixXd& pi,
                             const Eigen::VectorXd& alpha) {
  if (pi.rows() == 0) return alpha;
  return pi.colwise().sum().transpose() + alpha;
}

DocVariational e_step_document(const Document& doc, const TopicSet& ts,
                               const EmbeddingMatrix& V, const Hyperparams& hyper,
                               const std::vector<bool>& active,
                               std::vector<double>* elbo_trace) {
  const int K = ts.K();
  const int K_active = count_active(active);
  if (K_active == 0) {
    throw std::invalid_argument("no active topics");
  }
  const Eigen::MatrixXd base = word_topic_scores(doc, ts, V);

  DocVariational var;
  var.theta = hyper.alpha;
  for (int k = 0; k < K; ++k) {
    if (active[k]) var.theta(k) += static_cast<double>(doc.length()) / K_active;
  }
  for (int it = 0; it < hyper.e_max; ++it) {
    var.pi = pi_from_scores(base, var.theta, active);
    if (elbo_trace != nullptr) {
      elbo_trace->push_back(doc_elbo(doc, var, ts, V, hyper.alpha));
    }
    Eigen::VectorXd next = update_theta(var.pi, hyper.alpha);
    const double delta = (next - var.theta).cwiseAbs().maxCoeff();
    var.theta = std::move(next);
    var.alternations = it + 1;
    if (elbo_trace != nullptr) {
      elbo_trace->push_back(doc_elbo(doc, var, ts, V, hyper.alpha));
    }
    if (delta < hyper.e_tol) break;
  }
  return var;
}

double doc_elbo(const Document& doc, const DocVariational& var,
                const TopicSet& ts, const EmbeddingMatrix& V,
                const Eigen::VectorXd& alpha) {
  const int K = ts.K();
  const Eigen::VectorXd& theta = var.theta;
  const double theta0 = theta.sum();
  const double psi0 = digamma(theta0);

  Eigen::VectorXd mbar = Eigen::VectorXd::Zero(K);
  if (var.pi.rows() > 0) mbar = var.pi.colwise().sum().transpose();

  double value = 0.0;
  // E_q[log p(phi, Z)] Dirichlet-expectation part.
  for (int k = 0; k < K; ++k) {
    value += (mbar(k) + alpha(k) - 1.0) * (digamma(theta(k)) - psi0);
  }
  // Topic alignment Tr(T' sum_j v_j pi_j') and residual mass r' sum_j pi_j.
  for (int j = 0; j < doc.length(); ++j) {
    value += (V.V.row(doc.tokens[j]) * ts.T).dot(var.pi.row(j));
  }
  value += ts.r.dot(mbar);
  // Entropy of q: Dirichlet part plus the categorical part.
  for (int k = 0; k < K; ++k) {
    value += std::lgamma(theta(k)) - (theta(k) - 1.0) * digamma(theta(k));
  }
  value += -std::lgamma(theta0) + (theta0 - K) * psi0;
  for (Eigen::Index j = 0; j < var.pi.rows(); ++j) {
    for (int k = 0; k < K; ++k) {
      value += entropy_term(var.pi(j, k));
    }
  }
  return value;
}

double elbo_core(const std::vector<Document>& docs,
                 const std::vector<DocVariational>& vars,
                 const std::vector<const TopicSet*>& doc_topic_set,
                 const EmbeddingMatrix& V, const Eigen::VectorXd& alpha) {
  double total = 0.0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    total += doc_elbo(docs[i], vars[i], *doc_topic_set[i], V, alpha);
  }
  return total;
}

Eigen::VectorXd residual_gradient(const TopicSet& ts, const EmbeddingMatrix& V,
                                  const Eigen::VectorXd& u, int k) {
  const Eigen::VectorXd a = V.V * ts.T.col(k);  // W
  const double m = a.maxCoeff();
  const Eigen::VectorXd w = u.array() * (a.array() - m).exp();
  const double denom = w.sum();
  Eigen::VectorXd num = V.V.transpose() * w;  // N
  return -num / denom;
}

Eigen::MatrixXd topic_gradient(const std::vector<const Document*>& docs,
                               const std::vector<const DocVariational*>& vars,
                               const TopicSet& ts, const EmbeddingMatrix& V,
                               const Eigen::VectorXd& u) {
  if (docs.size() != vars.size()) {
    throw std::invalid_argument("topic_gradient: document/state count mismatch");
  }
  const int K = ts.K();
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(ts.dim(), K);
  Eigen::VectorXd mbar = Eigen::VectorXd::Zero(K);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const Document& doc = *docs[d];
    const Eigen::MatrixXd& pi = vars[d]->pi;
    for (int j = 0; j < doc.length(); ++j) {
      grad += V.V.row(doc.tokens[j]).transpose() * pi.row(j);
    }
    if (pi.rows() > 0) mbar += pi.colwise().sum().transpose();
  }
  for (int k = 1; k < K; ++k) {
    grad.col(k) += mbar(k) * residual_gradient(ts, V, u, k);
  }
  grad.col(0).setZero();
  return grad;
}

double learning_rate(int iteration, std::int64_t total_length,
                     const Hyperparams& hyper) {
  const double denom = static_cast<double>(iteration) *
                       static_cast<double>(std::max<std::int64_t>(total_length, hyper.L0));
  return hyper.L0 * hyper.lambda0 / denom;
}

void m_step(TopicSet& ts, const Eigen::MatrixXd& gradient, int iteration,
            std::int64_t total_length, const Hyperparams& hyper,
            const EmbeddingMatrix& V, const Eigen::VectorXd& u) {
  if (iteration < 1) {
    throw std::invalid_argument("m_step: iteration index must be >= 1");
  }
  if (gradient.rows() != ts.T.rows() || gradient.cols() != ts.T.cols()) {
    throw std::invalid_argument("m_step: gradient shape does not match the topic matrix");
  }
  ts.T += learning_rate(iteration, total_length, hyper) * gradient;
  for (int k = 0; k < ts.K(); ++k) {
    const double norm = ts.T.col(k).norm();
    if (norm > hyper.gamma) {
      ts.T.col(k) *= hyper.gamma / norm;
    }
  }
  ts.T.col(0).setZero();
  ts.r = compute_topic_residuals(V, u, ts.T);
}

namespace {

// Document indices per topic-set key, in a deterministic (sorted) order.
std::map<std::string, std::vector<int>> partition_documents(const Corpus& corpus,
                                                            bool per_category) {
  std::map<std::string, std::vector<int>> groups;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    std::string key = "global";
    if (per_category) {
      if (!corpus.documents[i].label.has_value()) {
        throw std::invalid_argument("per-category sharing requires a label on document '" +
                                    corpus.documents[i].doc_id + "'");
      }
      key = *corpus.documents[i].label;
    }
    groups[key].push_back(static_cast<int>(i));
  }
  return groups;
}

// Single-topic fit: the embedding direction maximizing
// sum_w f_w (v_w . t + r(t)) over the gamma ball for an empirical word
// distribution f. The objective is concave (linear plus -log-sum-exp) but
// very flat once the tilted distribution is nearly matched, so the ascent
// uses an adaptive step with backtracking.
Eigen::VectorXd fit_topic_to_distribution(const Eigen::VectorXd& f,
                                          const EmbeddingMatrix& V,
                                          const Eigen::VectorXd& u,
                                          double gamma) {
  const Eigen::VectorXd target = V.V.transpose() * f;  // empirical mean embedding
  auto objective = [&](const Eigen::VectorXd& t) {
    const Eigen::VectorXd a = V.V * t;
    return t.dot(target) - log_sum_exp_weighted(a, u);
  };
  auto project = [&](Eigen::VectorXd t) {
    const double norm = t.norm();
    if (norm > gamma) t *= gamma / norm;
    return t;
  };
  double vmax_sq = 0.0;
  for (Eigen::Index w = 0; w < V.V.rows(); ++w) {
    vmax_sq = std::max(vmax_sq, V.V.row(w).squaredNorm());
  }
  double step = vmax_sq > 0.0 ? 1.0 / vmax_sq : 1.0;
  Eigen::VectorXd t = Eigen::VectorXd::Zero(V.dim);
  double obj = objective(t);
  for (int it = 0; it < 2000; ++it) {
    const Eigen::VectorXd a = V.V * t;
    const Eigen::VectorXd w = u.array() * (a.array() - a.maxCoeff()).exp();
    const Eigen::VectorXd tilted = V.V.transpose() * w / w.sum();
    const Eigen::VectorXd grad = target - tilted;
    if (grad.norm() < 1e-8) break;
    Eigen::VectorXd next = project(t + step * grad);
    double next_obj = objective(next);
    int backtracks = 0;
    while (next_obj < obj && backtracks < 30) {
      step *= 0.5;
      next = project(t + step * grad);
      next_obj = objective(next);
      ++backtracks;
    }
    if (next_obj <= obj && backtracks >= 30) break;
    t = std::move(next);
    obj = next_obj;
    step *= 1.3;
  }
  return t;
}

// Initial directions for the non-null topics of one set. A strictly zero
// init is a fixed point of the symmetric updates (all non-null topics would
// receive identical gradients forever). Documents of the group are
// clustered by their word-count vectors (a sparse Dirichlet makes most
// documents nearly pure), and each cluster's empirical word distribution
// is fitted to a topic direction; random directions of magnitude
// `fallback_norm` top up sets with fewer usable documents than non-null
// topics. Deterministic given the rng state.
void seed_topic_set(TopicSet& ts, const Corpus& corpus,
                    const std::vector<int>& doc_idxs, const EmbeddingMatrix& V,
                    const Eigen::VectorXd& u, double gamma, double fallback_norm,
                    Rng& rng) {
  const int N = ts.dim();
  const int W = static_cast<int>(V.V.rows());

  std::vector<Eigen::VectorXd> doc_tf;      // unit word-count vectors
  std::vector<Eigen::VectorXd> doc_counts;  // raw counts
  for (int i : doc_idxs) {
    const Document& doc = corpus.documents[i];
    if (doc.tokens.empty()) continue;
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(W);
    for (int w : doc.tokens) counts(w) += 1.0;
    doc_counts.push_back(counts);
    doc_tf.push_back(counts / counts.norm());
  }

  // Center the unit tf vectors so the shared bulk (null-topic words) does
  // not dominate the cosines, then cluster on the centered directions.
  if (!doc_tf.empty()) {
    Eigen::VectorXd center = Eigen::VectorXd::Zero(W);
    for (const auto& tf : doc_tf) center += tf;
    center /= static_cast<double>(doc_tf.size());
    for (auto& tf : doc_tf) {
      tf -= center;
      const double norm = tf.norm();
      if (norm > 0.0) tf /= norm;
    }
  }

  const int clusters = std::min<int>(ts.K() - 1, static_cast<int>(doc_tf.size()));
  std::vector<int> assignment(doc_tf.size(), 0);
  if (clusters > 0) {
    double best_objective = -std::numeric_limits<double>::infinity();
    std::vector<int> best_assignment(doc_tf.size(), 0);
    for (int restart = 0; restart < 8; ++restart) {
      // Spherical k-means with a k-means++ start (cosine distance).
      std::vector<Eigen::VectorXd> centroids;
      const std::size_t first = rng.next_u64() % doc_tf.size();
      centroids.push_back(doc_tf[first]);
      while (static_cast<int>(centroids.size()) < clusters) {
        std::vector<double> weight(doc_tf.size());
        double total = 0.0;
        for (std::size_t d = 0; d < doc_tf.size(); ++d) {
          double closest = -1.0;
          for (const auto& c : centroids) {
            closest = std::max(closest, c.dot(doc_tf[d]));
          }
          const double dist = std::max(1.0 - closest, 0.0);
          weight[d] = dist * dist;
          total += weight[d];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
          const double threshold = rng.uniform() * total;
          double cum = 0.0;
          for (std::size_t d = 0; d < doc_tf.size(); ++d) {
            cum += weight[d];
            if (cum >= threshold) {
              pick = d;
              break;
            }
          }
        } else {
          pick = rng.next_u64() % doc_tf.size();
        }
        centroids.push_back(doc_tf[pick]);
      }
      double objective = 0.0;
      for (int sweep = 0; sweep < 20; ++sweep) {
        std::vector<Eigen::VectorXd> sums(clusters, Eigen::VectorXd::Zero(W));
        std::vector<int> counts(clusters, 0);
        objective = 0.0;
        for (std::size_t d = 0; d < doc_tf.size(); ++d) {
          int best_c = 0;
          double best_cos = centroids[0].dot(doc_tf[d]);
          for (int c = 1; c < clusters; ++c) {
            const double cc = centroids[c].dot(doc_tf[d]);
            if (cc > best_cos) {
              best_cos = cc;
              best_c = c;
            }
          }
          assignment[d] = best_c;
          objective += best_cos;
          sums[best_c] += doc_tf[d];
          ++counts[best_c];
        }
        for (int c = 0; c < clusters; ++c) {
          if (counts[c] == 0 || sums[c].norm() == 0.0) continue;
          centroids[c] = sums[c] / sums[c].norm();
        }
      }
      if (objective > best_objective) {
        best_objective = objective;
        best_assignment = assignment;
      }
    }
    assignment = best_assignment;
  }

  for (int k = 1; k < ts.K(); ++k) {
    if (k <= clusters) {
      Eigen::VectorXd f = Eigen::VectorXd::Zero(W);
      for (std::size_t d = 0; d < doc_counts.size(); ++d) {
        if (assignment[d] == k - 1) f += doc_counts[d];
      }
      if (f.sum() > 0.0) {
        ts.T.col(k) = fit_topic_to_distribution(f / f.sum(), V, u, gamma);
        continue;
      }
    }
    Eigen::VectorXd dir(N);
    do {
      for (int n = 0; n < N; ++n) dir(n) = rng.gaussian();
    } while (dir.norm() == 0.0);
    ts.T.col(k) = fallback_norm * dir / dir.norm();
  }
}

}  // namespace

FitResult gem_fit(const Corpus& corpus, const EmbeddingMatrix& V,
                  const Hyperparams& hyper, bool per_category,
                  const GemObserver& observer) {
  hyper.validate();
  if (V.V.rows() != corpus.vocabulary.size()) {
    throw std::invalid_argument("embedding matrix is not aligned to the vocabulary");
  }
  const Eigen::VectorXd& u = corpus.vocabulary.unigram_probs;
  const int N = V.dim;

  const auto groups = partition_documents(corpus, per_category);

  FitResult result;
  result.state.hyper = hyper;
  Rng rng(hyper.seed);
  for (const auto& [key, idxs] : groups) {
    TopicSet ts = TopicSet::zeros(N, hyper.K, key);
    if (hyper.gem_iters >= 1 && hyper.init_norm > 0.0) {
      seed_topic_set(ts, corpus, idxs, V, u, hyper.gamma,
                     std::min(hyper.init_norm, hyper.gamma), rng);
      ts.r = compute_topic_residuals(V, u, ts.T);
    }
    result.state.topic_sets.emplace(key, std::move(ts));
  }

  std::map<std::string, std::int64_t> group_length;
  for (const auto& [key, idxs] : groups) {
    std::int64_t total = 0;
    for (int i : idxs) total += corpus.documents[i].length();
    group_length[key] = total;
  }

  std::vector<DocVariational> doc_states(corpus.documents.size());
  std::vector<const TopicSet*> doc_set(corpus.documents.size());
  const std::vector<bool> active = all_active(hyper.K);

  auto run_e_step = [&] {
    // Documents are independent given the topics; processed in index order
    // so reductions over them are reproducible.
    for (const auto& [key, idxs] : groups) {
      const TopicSet& ts = result.state.topic_sets.at(key);
      for (int i : idxs) {
        doc_states[i] = e_step_document(corpus.documents[i], ts, V, hyper, active);
        doc_set[i] = &ts;
      }
    }
  };

  for (int l = 1; l <= hyper.gem_iters; ++l) {
    run_e_step();
    for (const auto& [key, idxs] : groups) {
      TopicSet& ts = result.state.topic_sets.at(key);
      std::vector<const Document*> docs;
      std::vector<const DocVariational*> vars;
      docs.reserve(idxs.size());
      vars.reserve(idxs.size());
      for (int i : idxs) {
        docs.push_back(&corpus.documents[i]);
        vars.push_back(&doc_states[i]);
      }
      const Eigen::MatrixXd grad = topic_gradient(docs, vars, ts, V, u);
      m_step(ts, grad, l, group_length.at(key), hyper, V, u);
    }
    const double elbo =
        elbo_core(corpus.documents, doc_states, doc_set, V, hyper.alpha);
    result.state.elbo_trace.push_back(elbo);
    if (observer) {
      observer({l, result.state.topic_sets, doc_states, elbo});
    }
  }

  // Refresh the variational states against the final topics so that
  // re-inferring a training document reproduces them.
  run_e_step();
  result.doc_states = std::move(doc_states);
  return result;
}

DocVariational infer_new_document(const Document& doc, const TopicSet& topics,
                                  const Eigen::VectorXd& alpha,
                                  const EmbeddingMatrix& V, double e_tol,
                                  int e_max) {
  Hyperparams hyper;
  hyper.K = topics.K();
  hyper.alpha = alpha;
  hyper.e_tol = e_tol;
  hyper.e_max = e_max;
  return e_step_document(doc, topics, V, hyper, all_active(topics.K()));
}

}  // namespace topicvec
