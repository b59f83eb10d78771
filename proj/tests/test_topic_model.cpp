#include "doctest.h"

#include <cmath>
#include <filesystem>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "topicvec/generator.hpp"
#include "topicvec/model_io.hpp"
#include "topicvec/rng.hpp"
#include "topicvec/topic_model.hpp"

namespace fs = std::filesystem;
using namespace topicvec;

namespace {

// --------------------------------------------------------------------------
// Test-side oracles, deliberately written as plain loops without the
// max-shift machinery of the implementation.
// --------------------------------------------------------------------------

// Direct summation of sum_s u_s exp(v_s . t_k).
double residual_oracle(const Eigen::MatrixXd& V, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& t) {
  double total = 0.0;
  for (Eigen::Index s = 0; s < V.rows(); ++s) {
    total += u(s) * std::exp(V.row(s).dot(t));
  }
  return -std::log(total);
}

// The same two closed-form E-step updates, run for a fixed 200 alternations
// with boost's digamma and naive normalization.
Eigen::VectorXd e_step_oracle_theta(const Document& doc, const TopicSet& ts,
                                    const EmbeddingMatrix& V,
                                    const Eigen::VectorXd& alpha) {
  const int K = ts.K();
  const int L = doc.length();
  Eigen::VectorXd theta = alpha;
  for (int k = 0; k < K; ++k) theta(k) += static_cast<double>(L) / K;
  Eigen::MatrixXd pi(L, K);
  for (int it = 0; it < 200; ++it) {
    for (int j = 0; j < L; ++j) {
      double z = 0.0;
      for (int k = 0; k < K; ++k) {
        pi(j, k) = std::exp(boost::math::digamma(theta(k)) +
                            V.V.row(doc.tokens[j]).dot(ts.T.col(k)) + ts.r(k));
        z += pi(j, k);
      }
      for (int k = 0; k < K; ++k) pi(j, k) /= z;
    }
    for (int k = 0; k < K; ++k) {
      theta(k) = alpha(k);
      for (int j = 0; j < L; ++j) theta(k) += pi(j, k);
    }
  }
  return theta;
}

// Term-by-term re-implementation of the per-document bound.
double doc_elbo_oracle(const Document& doc, const DocVariational& var,
                       const TopicSet& ts, const EmbeddingMatrix& V,
                       const Eigen::VectorXd& alpha) {
  const int K = ts.K();
  const int L = doc.length();
  double theta0 = 0.0;
  for (int k = 0; k < K; ++k) theta0 += var.theta(k);
  double value = 0.0;
  for (int k = 0; k < K; ++k) {
    double mbar = 0.0;
    for (int j = 0; j < L; ++j) mbar += var.pi(j, k);
    value += (mbar + alpha(k) - 1.0) *
             (boost::math::digamma(var.theta(k)) - boost::math::digamma(theta0));
    value += ts.r(k) * mbar;
  }
  for (int j = 0; j < L; ++j) {
    for (int k = 0; k < K; ++k) {
      value += var.pi(j, k) * V.V.row(doc.tokens[j]).dot(ts.T.col(k));
    }
  }
  for (int k = 0; k < K; ++k) {
    value += boost::math::lgamma(var.theta(k)) -
             (var.theta(k) - 1.0) * boost::math::digamma(var.theta(k));
  }
  value += -boost::math::lgamma(theta0) +
           (theta0 - K) * boost::math::digamma(theta0);
  for (int j = 0; j < L; ++j) {
    for (int k = 0; k < K; ++k) {
      if (var.pi(j, k) > 0.0) value -= var.pi(j, k) * std::log(var.pi(j, k));
    }
  }
  return value;
}

struct SmallInstance {
  EmbeddingMatrix V;
  Eigen::VectorXd u;
  TopicSet ts;
  Document doc;
};

SmallInstance random_instance(std::uint64_t seed, int W, int N, int K, int L) {
  Rng rng(seed);
  SmallInstance inst;
  inst.V.dim = N;
  inst.V.V.resize(W, N);
  for (int i = 0; i < W; ++i) {
    for (int j = 0; j < N; ++j) inst.V.V(i, j) = rng.gaussian();
  }
  inst.u.resize(W);
  for (int i = 0; i < W; ++i) inst.u(i) = rng.uniform() + 0.05;
  inst.u /= inst.u.sum();
  inst.ts = TopicSet::zeros(N, K);
  for (int k = 1; k < K; ++k) {
    inst.ts.T.col(k) = sample_from_hyperball(N, 2.0, rng);
  }
  inst.ts.r = compute_topic_residuals(inst.V, inst.u, inst.ts.T);
  inst.doc.doc_id = "doc";
  for (int j = 0; j < L; ++j) {
    inst.doc.tokens.push_back(static_cast<int>(rng.next_u64() % W));
  }
  return inst;
}

Hyperparams hyper_for(const SmallInstance& inst, double alpha = 0.1) {
  Hyperparams h = Hyperparams::with_symmetric_alpha(inst.ts.K(), alpha);
  return h;
}

}  // namespace

// --------------------------------------------------------------------------
// compute_topic_residuals
// --------------------------------------------------------------------------

TEST_CASE("residuals are zero for zero topics") {
  SmallInstance inst = random_instance(1, 6, 3, 3, 0);
  const Eigen::VectorXd r = compute_topic_residuals(
      inst.V, inst.u, Eigen::MatrixXd::Zero(3, 3));
  CHECK(r.isZero(0.0));  // exactly zero by the null-column rule
}

TEST_CASE("residual of a two-word vocabulary matches direct summation") {
  EmbeddingMatrix V;
  V.dim = 2;
  V.V.resize(2, 2);
  V.V << 1, 0, 0, 1;
  Eigen::VectorXd u(2);
  u << 0.5, 0.5;
  Eigen::MatrixXd T(2, 2);
  T.col(0).setZero();
  T.col(1) << 1, 0;
  const Eigen::VectorXd r = compute_topic_residuals(V, u, T);
  // Oracle: -log((e + 1) / 2), frozen value -0.62011450695827855.
  CHECK(r(1) == doctest::Approx(-std::log((std::exp(1.0) + 1.0) / 2.0)).epsilon(1e-14));
  CHECK(r(1) == doctest::Approx(-0.62011450695827855).epsilon(1e-12));
}

TEST_CASE("single-word vocabulary has the closed form r = -v.t") {
  EmbeddingMatrix V;
  V.dim = 1;
  V.V.resize(1, 1);
  V.V << 2.0;
  Eigen::VectorXd u(1);
  u << 1.0;
  Eigen::MatrixXd T(1, 2);
  T << 0.0, 3.0;
  const Eigen::VectorXd r = compute_topic_residuals(V, u, T);
  CHECK(r(1) == doctest::Approx(-6.0).epsilon(1e-14));
}

TEST_CASE("residual normalization identity holds on random instances") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SmallInstance inst = random_instance(seed, 20, 4, 4, 0);
    for (int k = 0; k < 4; ++k) {
      double mass = 0.0;
      for (int s = 0; s < 20; ++s) {
        mass += inst.u(s) *
                std::exp(inst.V.V.row(s).dot(inst.ts.T.col(k)) + inst.ts.r(k));
      }
      CHECK(std::abs(mass - 1.0) <= 1e-10);
    }
    // Cross-check against the naive oracle.
    for (int k = 1; k < 4; ++k) {
      CHECK(inst.ts.r(k) ==
            doctest::Approx(residual_oracle(inst.V.V, inst.u, inst.ts.T.col(k)))
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("non-finite inner products raise embedding overflow") {
  EmbeddingMatrix V;
  V.dim = 1;
  V.V.resize(1, 1);
  V.V << 1e200;
  Eigen::VectorXd u(1);
  u << 1.0;
  Eigen::MatrixXd T(1, 1);
  T << 1e200;
  CHECK_THROWS_WITH(compute_topic_residuals(V, u, T), "embedding overflow");
}

// --------------------------------------------------------------------------
// log_word_topic_prob
// --------------------------------------------------------------------------

TEST_CASE("null topic probability reduces to the unigram probability exactly") {
  SmallInstance inst = random_instance(3, 12, 3, 3, 0);
  for (int w = 0; w < 12; ++w) {
    CHECK(log_word_topic_prob(w, 0, inst.ts, inst.V, inst.u) ==
          std::log(inst.u(w)));
  }
}

TEST_CASE("word probabilities normalize over the vocabulary") {
  SmallInstance inst = random_instance(4, 15, 4, 3, 0);
  for (int k = 0; k < 3; ++k) {
    double mass = 0.0;
    for (int w = 0; w < 15; ++w) {
      mass += std::exp(log_word_topic_prob(w, k, inst.ts, inst.V, inst.u));
    }
    CHECK(std::abs(mass - 1.0) <= 1e-10);
  }
}

TEST_CASE("two-word example probability") {
  EmbeddingMatrix V;
  V.dim = 2;
  V.V.resize(2, 2);
  V.V << 1, 0, 0, 1;
  Eigen::VectorXd u(2);
  u << 0.5, 0.5;
  TopicSet ts = TopicSet::zeros(2, 2);
  ts.T.col(1) << 1, 0;
  ts.r = compute_topic_residuals(V, u, ts.T);
  const double p = std::exp(log_word_topic_prob(0, 1, ts, V, u));
  CHECK(p == doctest::Approx(0.5 * std::exp(1.0) / ((std::exp(1.0) + 1.0) / 2.0))
                 .epsilon(1e-12));
}

// --------------------------------------------------------------------------
// update_pi / update_theta
// --------------------------------------------------------------------------

TEST_CASE("symmetric scores give uniform responsibilities") {
  SmallInstance inst = random_instance(5, 10, 3, 4, 6);
  inst.ts = TopicSet::zeros(3, 4);  // T = 0, r = 0
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(4, 1.7);
  const Eigen::MatrixXd pi =
      update_pi(inst.doc, theta, inst.ts, inst.V, all_active(4));
  for (int j = 0; j < 6; ++j) {
    for (int k = 0; k < 4; ++k) {
      CHECK(pi(j, k) == doctest::Approx(0.25).epsilon(1e-14));
    }
  }
}

TEST_CASE("hand-normalized responsibility row") {
  // K=2, theta=(1,1), r=(0,0), v.t = (0, ln 3): psi(1) cancels, row = (1,3)/4.
  EmbeddingMatrix V;
  V.dim = 1;
  V.V.resize(1, 1);
  V.V << 1.0;
  TopicSet ts = TopicSet::zeros(1, 2);
  ts.T(0, 1) = std::log(3.0);
  ts.r.setZero();
  Document doc;
  doc.tokens = {0};
  const Eigen::MatrixXd pi =
      update_pi(doc, Eigen::VectorXd::Ones(2), ts, V, all_active(2));
  CHECK(pi(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(pi(0, 1) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("K=1 responsibilities are degenerate") {
  SmallInstance inst = random_instance(6, 8, 2, 1, 5);
  const Eigen::MatrixXd pi = update_pi(inst.doc, Eigen::VectorXd::Ones(1),
                                       inst.ts, inst.V, all_active(1));
  CHECK(pi.rows() == 5);
  for (int j = 0; j < 5; ++j) CHECK(pi(j, 0) == 1.0);
}

TEST_CASE("inactive topics get exactly zero and all-inactive throws") {
  SmallInstance inst = random_instance(7, 10, 3, 4, 5);
  std::vector<bool> active = {true, false, true, false};
  const Eigen::MatrixXd pi = update_pi(inst.doc, Eigen::VectorXd::Ones(4),
                                       inst.ts, inst.V, active);
  for (int j = 0; j < 5; ++j) {
    CHECK(pi(j, 1) == 0.0);
    CHECK(pi(j, 3) == 0.0);
    CHECK(pi.row(j).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS(update_pi(inst.doc, Eigen::VectorXd::Ones(4), inst.ts, inst.V,
                         std::vector<bool>(4, false)));
}

TEST_CASE("responsibilities are invariant to a shared exponent shift") {
  SmallInstance inst = random_instance(8, 14, 3, 3, 7);
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(3, 0.8);
  const Eigen::MatrixXd pi =
      update_pi(inst.doc, theta, inst.ts, inst.V, all_active(3));
  TopicSet shifted = inst.ts;
  shifted.r.array() += 123.456;
  const Eigen::MatrixXd pi2 =
      update_pi(inst.doc, theta, shifted, inst.V, all_active(3));
  CHECK((pi - pi2).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("update_theta sums responsibilities plus alpha") {
  Eigen::VectorXd alpha(2);
  alpha << 0.1, 0.1;
  // Empty document.
  CHECK(update_theta(Eigen::MatrixXd(0, 2), alpha) == alpha);
  // Literal column sums.
  Eigen::MatrixXd pi(2, 2);
  pi << 0.2, 0.8, 0.4, 0.6;
  const Eigen::VectorXd theta = update_theta(pi, alpha);
  CHECK(theta(0) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(theta(1) == doctest::Approx(1.5).epsilon(1e-15));
  // Mass identity when rows sum to one.
  CHECK(theta.sum() == doctest::Approx(2.0 + 0.2).epsilon(1e-12));
}

// --------------------------------------------------------------------------
// e_step_document
// --------------------------------------------------------------------------

TEST_CASE("symmetric setup reaches the uniform fixed point immediately") {
  SmallInstance inst = random_instance(9, 10, 3, 4, 8);
  inst.ts = TopicSet::zeros(3, 4);
  Hyperparams hyper = hyper_for(inst);
  const DocVariational var =
      e_step_document(inst.doc, inst.ts, inst.V, hyper, all_active(4));
  CHECK(var.alternations <= 2);
  for (int j = 0; j < 8; ++j) {
    for (int k = 0; k < 4; ++k) {
      CHECK(var.pi(j, k) == doctest::Approx(0.25).epsilon(1e-14));
    }
  }
  CHECK(var.theta(0) == doctest::Approx(0.1 + 8.0 / 4.0).epsilon(1e-12));
}

TEST_CASE("e-step matches the 200-alternation coordinate-ascent oracle") {
  SmallInstance inst = random_instance(10, 5, 2, 2, 4);
  Hyperparams hyper = hyper_for(inst);
  hyper.e_tol = 1e-9;
  hyper.e_max = 300;
  const DocVariational var =
      e_step_document(inst.doc, inst.ts, inst.V, hyper, all_active(2));
  const Eigen::VectorXd oracle =
      e_step_oracle_theta(inst.doc, inst.ts, inst.V, hyper.alpha);
  CHECK((var.theta - oracle).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("empty document yields theta = alpha and an empty pi") {
  SmallInstance inst = random_instance(11, 6, 2, 3, 0);
  Hyperparams hyper = hyper_for(inst);
  const DocVariational var =
      e_step_document(inst.doc, inst.ts, inst.V, hyper, all_active(3));
  CHECK(var.pi.rows() == 0);
  CHECK(var.theta == hyper.alpha);
}

TEST_CASE("e-step keeps the variational invariants") {
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    SmallInstance inst = random_instance(seed, 18, 4, 4, 15);
    Hyperparams hyper = hyper_for(inst);
    const DocVariational var =
        e_step_document(inst.doc, inst.ts, inst.V, hyper, all_active(4));
    for (int j = 0; j < var.pi.rows(); ++j) {
      CHECK(std::abs(var.pi.row(j).sum() - 1.0) <= 1e-10);
    }
    for (int k = 0; k < 4; ++k) CHECK(var.theta(k) >= hyper.alpha(k));
    CHECK(std::abs(var.theta.sum() - (15.0 + hyper.alpha.sum())) <= 1e-8);
  }
}

TEST_CASE("per-document bound is non-decreasing across alternations") {
  for (std::uint64_t seed = 30; seed < 34; ++seed) {
    SmallInstance inst = random_instance(seed, 15, 3, 3, 12);
    Hyperparams hyper = hyper_for(inst);
    std::vector<double> trace;
    (void)e_step_document(inst.doc, inst.ts, inst.V, hyper, all_active(3), &trace);
    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i) {
      CHECK(trace[i] - trace[i - 1] >= -1e-8);
    }
  }
}

// --------------------------------------------------------------------------
// elbo_core
// --------------------------------------------------------------------------

TEST_CASE("elbo of an empty corpus is zero") {
  EmbeddingMatrix V;
  V.dim = 2;
  V.V.resize(0, 2);
  CHECK(elbo_core({}, {}, {}, V, Eigen::VectorXd::Constant(2, 0.1)) == 0.0);
}

TEST_CASE("K=1 document: categorical entropy vanishes, bound is zero") {
  SmallInstance inst = random_instance(12, 7, 2, 1, 9);
  Hyperparams hyper = hyper_for(inst, 0.4);
  const DocVariational var =
      e_step_document(inst.doc, inst.ts, inst.V, hyper, all_active(1));
  // pi is all ones, theta = alpha + L; every term cancels with K = 1 and
  // the null-only topic set.
  CHECK(var.theta(0) == doctest::Approx(0.4 + 9.0).epsilon(1e-12));
  CHECK(doc_elbo(inst.doc, var, inst.ts, inst.V, hyper.alpha) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("elbo matches the term-by-term oracle on random instances") {
  for (std::uint64_t seed = 40; seed < 46; ++seed) {
    SmallInstance inst = random_instance(seed, 16, 4, 3, 10);
    Hyperparams hyper = hyper_for(inst);
    const DocVariational var =
        e_step_document(inst.doc, inst.ts, inst.V, hyper, all_active(3));
    const double got = doc_elbo(inst.doc, var, inst.ts, inst.V, hyper.alpha);
    const double want = doc_elbo_oracle(inst.doc, var, inst.ts, inst.V, hyper.alpha);
    CHECK(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)));
  }
}

// --------------------------------------------------------------------------
// gradients
// --------------------------------------------------------------------------

TEST_CASE("residual gradient at zero is the negative unigram mean embedding") {
  SmallInstance inst = random_instance(50, 12, 3, 3, 0);
  inst.ts = TopicSet::zeros(3, 3);
  const Eigen::VectorXd g = residual_gradient(inst.ts, inst.V, inst.u, 1);
  const Eigen::VectorXd expected = -(inst.V.V.transpose() * inst.u);
  CHECK((g - expected).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("single-word vocabulary has constant residual gradient") {
  EmbeddingMatrix V;
  V.dim = 1;
  V.V.resize(1, 1);
  V.V << 2.0;
  Eigen::VectorXd u(1);
  u << 1.0;
  TopicSet ts = TopicSet::zeros(1, 2);
  for (double t : {0.0, -1.5, 3.0}) {
    ts.T(0, 1) = t;
    ts.r = compute_topic_residuals(V, u, ts.T);
    CHECK(residual_gradient(ts, V, u, 1)(0) == doctest::Approx(-2.0).epsilon(1e-14));
  }
}

TEST_CASE("residual gradient matches central finite differences") {
  const double h = 1e-5;
  for (std::uint64_t seed = 60; seed < 64; ++seed) {
    SmallInstance inst = random_instance(seed, 20, 5, 3, 0);
    for (int k = 1; k < 3; ++k) {
      const Eigen::VectorXd g = residual_gradient(inst.ts, inst.V, inst.u, k);
      Eigen::VectorXd fd(5);
      for (int n = 0; n < 5; ++n) {
        Eigen::MatrixXd tp = inst.ts.T, tm = inst.ts.T;
        tp(n, k) += h;
        tm(n, k) -= h;
        fd(n) = (compute_topic_residuals(inst.V, inst.u, tp)(k) -
                 compute_topic_residuals(inst.V, inst.u, tm)(k)) /
                (2.0 * h);
      }
      CHECK((fd - g).norm() / std::max(fd.norm(), 1e-12) <= 1e-5);
    }
  }
}

TEST_CASE("topic gradient: all mass on the null topic zeroes the update") {
  SmallInstance inst = random_instance(70, 10, 3, 3, 6);
  DocVariational var;
  var.pi = Eigen::MatrixXd::Zero(6, 3);
  var.pi.col(0).setOnes();
  var.theta = update_theta(var.pi, Eigen::VectorXd::Constant(3, 0.1));
  const Eigen::MatrixXd g = topic_gradient({&inst.doc}, {&var}, inst.ts,
                                           inst.V, inst.u);
  CHECK(g.isZero(1e-14));
}

TEST_CASE("topic gradient hand case: one word fully on a zero topic") {
  SmallInstance inst = random_instance(71, 9, 3, 2, 1);
  inst.ts = TopicSet::zeros(3, 2);
  DocVariational var;
  var.pi.resize(1, 2);
  var.pi << 0.0, 1.0;
  var.theta = update_theta(var.pi, Eigen::VectorXd::Constant(2, 0.1));
  const Eigen::MatrixXd g = topic_gradient({&inst.doc}, {&var}, inst.ts,
                                           inst.V, inst.u);
  const Eigen::VectorXd expected =
      inst.V.V.row(inst.doc.tokens[0]).transpose() -
      inst.V.V.transpose() * inst.u;
  CHECK(g.col(0).isZero(0.0));
  CHECK((g.col(1) - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("topic gradient matches finite differences of the bound") {
  const double h = 1e-5;
  for (std::uint64_t seed = 80; seed < 83; ++seed) {
    SmallInstance inst = random_instance(seed, 14, 4, 3, 9);
    Hyperparams hyper = hyper_for(inst);
    const DocVariational var =
        e_step_document(inst.doc, inst.ts, inst.V, hyper, all_active(3));
    const Eigen::MatrixXd g = topic_gradient({&inst.doc}, {&var}, inst.ts,
                                             inst.V, inst.u);
    Eigen::MatrixXd fd = Eigen::MatrixXd::Zero(4, 3);
    for (int k = 1; k < 3; ++k) {
      for (int n = 0; n < 4; ++n) {
        TopicSet tp = inst.ts, tm = inst.ts;
        tp.T(n, k) += h;
        tm.T(n, k) -= h;
        tp.r = compute_topic_residuals(inst.V, inst.u, tp.T);
        tm.r = compute_topic_residuals(inst.V, inst.u, tm.T);
        fd(n, k) = (doc_elbo(inst.doc, var, tp, inst.V, hyper.alpha) -
                    doc_elbo(inst.doc, var, tm, inst.V, hyper.alpha)) /
                   (2.0 * h);
      }
    }
    CHECK((fd - g).norm() / std::max(fd.norm(), 1e-12) <= 1e-4);
  }
}

// --------------------------------------------------------------------------
// m_step
// --------------------------------------------------------------------------

TEST_CASE("learning rate schedule") {
  Hyperparams hyper = Hyperparams::with_symmetric_alpha(2, 0.1);
  hyper.lambda0 = 0.1;
  hyper.L0 = 500;
  CHECK(learning_rate(1, 1000, hyper) == doctest::Approx(0.1 / 2.0).epsilon(1e-15));
  // Short documents are clamped by L0.
  CHECK(learning_rate(1, 100, hyper) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(learning_rate(4, 100, hyper) == doctest::Approx(0.025).epsilon(1e-15));
}

TEST_CASE("m_step with a zero gradient is a no-op up to residual recompute") {
  SmallInstance inst = random_instance(90, 12, 3, 3, 0);
  TopicSet ts = inst.ts;
  Hyperparams hyper = hyper_for(inst);
  m_step(ts, Eigen::MatrixXd::Zero(3, 3), 1, 100, hyper, inst.V, inst.u);
  CHECK(ts.T == inst.ts.T);
  CHECK((ts.r - inst.ts.r).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK_THROWS(m_step(ts, Eigen::MatrixXd::Zero(3, 3), 0, 100, hyper, inst.V,
                      inst.u));
}

TEST_CASE("m_step projects overlong columns back to the gamma sphere") {
  SmallInstance inst = random_instance(91, 12, 3, 2, 0);
  TopicSet ts = TopicSet::zeros(3, 2);
  Hyperparams hyper = hyper_for(inst);
  hyper.gamma = 7.0;
  Eigen::VectorXd dir(3);
  dir << 3.0, 0.0, 4.0;  // norm 5
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(3, 2);
  const double lambda = learning_rate(1, 100, hyper);
  grad.col(1) = (10.0 / 5.0) * dir / lambda;  // lands at norm 10
  m_step(ts, grad, 1, 100, hyper, inst.V, inst.u);
  CHECK(ts.T.col(1).norm() == doctest::Approx(7.0).epsilon(1e-12));
  const Eigen::VectorXd unit = ts.T.col(1) / ts.T.col(1).norm();
  CHECK((unit - dir / dir.norm()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(ts.T.col(0).isZero(0.0));
}

// --------------------------------------------------------------------------
// gem_fit / infer_new_document / checkpoints
// --------------------------------------------------------------------------

namespace {

SyntheticData small_fixture() {
  SyntheticSpec spec = SyntheticSpec::with_symmetric_alpha(3, 0.1);
  spec.N = 5;
  spec.W = 25;
  spec.M = 40;
  spec.doc_length = 30;
  spec.gamma = 5.0;
  spec.seed = 2;
  return generate_synthetic_corpus(spec);
}

}  // namespace

TEST_CASE("gem_fit with zero iterations leaves zero topics and one E-step state") {
  const SyntheticData data = small_fixture();
  Hyperparams hyper = Hyperparams::with_symmetric_alpha(3, 0.1);
  hyper.gamma = 5.0;
  hyper.gem_iters = 0;
  const FitResult fit = gem_fit(data.corpus, data.embeddings, hyper, false);
  const TopicSet& ts = fit.state.topic_sets.at("global");
  CHECK(ts.T.isZero(0.0));
  CHECK(ts.r.isZero(0.0));
  CHECK(fit.state.elbo_trace.empty());
  REQUIRE(fit.doc_states.size() == data.corpus.documents.size());
  // Against T = 0 the responsibilities are uniform.
  CHECK(fit.doc_states[0].pi(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("gem_fit is deterministic given seed and inputs") {
  const SyntheticData data = small_fixture();
  Hyperparams hyper = Hyperparams::with_symmetric_alpha(3, 0.1);
  hyper.gamma = 5.0;
  hyper.gem_iters = 8;
  hyper.seed = 17;
  const FitResult a = gem_fit(data.corpus, data.embeddings, hyper, false);
  const FitResult b = gem_fit(data.corpus, data.embeddings, hyper, false);
  CHECK(a.state.topic_sets.at("global").T == b.state.topic_sets.at("global").T);
  CHECK(a.state.elbo_trace == b.state.elbo_trace);
}

TEST_CASE("gem_fit keeps structural invariants during training") {
  const SyntheticData data = small_fixture();
  Hyperparams hyper = Hyperparams::with_symmetric_alpha(3, 0.1);
  hyper.gamma = 5.0;
  hyper.gem_iters = 6;
  bool observed = false;
  const GemObserver obs = [&](const GemIterationView& view) {
    observed = true;
    for (const auto& [name, ts] : view.topic_sets) {
      CHECK(ts.T.col(0).isZero(0.0));
      CHECK(ts.r(0) == 0.0);
      for (int k = 0; k < ts.K(); ++k) {
        CHECK(ts.T.col(k).norm() <= hyper.gamma + 1e-12);
      }
    }
  };
  (void)gem_fit(data.corpus, data.embeddings, hyper, false, obs);
  CHECK(observed);
}

TEST_CASE("gem_fit elbo trace is non-decreasing after the early iterations") {
  const SyntheticData data = small_fixture();
  Hyperparams hyper = Hyperparams::with_symmetric_alpha(3, 0.1);
  hyper.gamma = 5.0;
  hyper.gem_iters = 25;
  hyper.lambda0 = 0.02;
  const FitResult fit = gem_fit(data.corpus, data.embeddings, hyper, false);
  const auto& trace = fit.state.elbo_trace;
  REQUIRE(trace.size() == 25);
  for (std::size_t i = 3; i < trace.size(); ++i) {
    CHECK(trace[i] >= trace[i - 1] - 1e-8 * std::abs(trace[i - 1]));
  }
}

TEST_CASE("per-category sharing requires labels") {
  const SyntheticData data = small_fixture();  // unlabeled documents
  Hyperparams hyper = Hyperparams::with_symmetric_alpha(3, 0.1);
  hyper.gem_iters = 1;
  CHECK_THROWS(gem_fit(data.corpus, data.embeddings, hyper, true));
}

TEST_CASE("infer_new_document is deterministic and honors empty documents") {
  const SyntheticData data = small_fixture();
  Hyperparams hyper = Hyperparams::with_symmetric_alpha(3, 0.1);
  hyper.gamma = 5.0;
  hyper.gem_iters = 6;
  const FitResult fit = gem_fit(data.corpus, data.embeddings, hyper, false);
  const TopicSet& ts = fit.state.topic_sets.at("global");

  const Document& doc = data.corpus.documents[0];
  const DocVariational a =
      infer_new_document(doc, ts, hyper.alpha, data.embeddings, 1e-4, 100);
  const DocVariational b =
      infer_new_document(doc, ts, hyper.alpha, data.embeddings, 1e-4, 100);
  CHECK(a.theta == b.theta);
  CHECK(a.pi == b.pi);

  Document empty;
  empty.doc_id = "empty";
  const DocVariational e =
      infer_new_document(empty, ts, hyper.alpha, data.embeddings, 1e-4, 100);
  CHECK(e.theta == hyper.alpha);

  // A training document re-infers to its final training state.
  const DocVariational again =
      infer_new_document(doc, ts, hyper.alpha, data.embeddings, hyper.e_tol,
                         hyper.e_max);
  CHECK((again.theta - fit.doc_states[0].theta).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("checkpoints round-trip exactly and verify the vocabulary hash") {
  const SyntheticData data = small_fixture();
  Hyperparams hyper = Hyperparams::with_symmetric_alpha(3, 0.1);
  hyper.gamma = 5.0;
  hyper.gem_iters = 4;
  const FitResult fit = gem_fit(data.corpus, data.embeddings, hyper, false);

  const fs::path dir = fs::temp_directory_path() / "tv_ckpt_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string path = (dir / "model.tvec").string();
  save_checkpoint(fit.state, data.corpus.vocabulary.hash(), path);

  const Checkpoint ckpt = load_checkpoint(path);
  CHECK(ckpt.vocab_hash == data.corpus.vocabulary.hash());
  CHECK(ckpt.state.hyper.K == 3);
  CHECK(ckpt.state.hyper.gamma == 5.0);
  CHECK(ckpt.state.hyper.alpha == hyper.alpha);
  REQUIRE(ckpt.state.topic_sets.count("global") == 1);
  CHECK(ckpt.state.topic_sets.at("global").T ==
        fit.state.topic_sets.at("global").T);
  CHECK(ckpt.state.topic_sets.at("global").r ==
        fit.state.topic_sets.at("global").r);

  verify_vocab_hash(ckpt, data.corpus.vocabulary);
  const Vocabulary other = build_vocabulary({{"zzz"}});
  CHECK_THROWS(verify_vocab_hash(ckpt, other));

  CHECK_THROWS(load_checkpoint((dir / "missing.tvec").string()));
}

TEST_CASE("hyperparameter validation rejects bad values") {
  Hyperparams h = Hyperparams::with_symmetric_alpha(3, 0.1);
  CHECK_NOTHROW(h.validate());
  h.gamma = 0.0;
  CHECK_THROWS(h.validate());
  h = Hyperparams::with_symmetric_alpha(3, -0.1);
  CHECK_THROWS(h.validate());
  h = Hyperparams::with_symmetric_alpha(3, 0.1);
  h.alpha.resize(2);
  CHECK_THROWS(h.validate());
}
