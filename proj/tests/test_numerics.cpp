#include "doctest.h"

#include <cmath>

#include <boost/math/special_functions/digamma.hpp>

#include "topicvec/numerics.hpp"
#include "topicvec/rng.hpp"

using namespace topicvec;

TEST_CASE("digamma matches the boost implementation to 1e-12") {
  // Known values first.
  CHECK(digamma(1.0) == doctest::Approx(-0.57721566490153286).epsilon(1e-12));
  CHECK(digamma(2.0) == doctest::Approx(1.0 - 0.57721566490153286).epsilon(1e-12));
  CHECK(digamma(0.5) ==
        doctest::Approx(-0.57721566490153286 - 2.0 * std::log(2.0)).epsilon(1e-12));

  for (double x : {1e-3, 5e-3, 0.04, 0.1, 0.35, 0.9, 1.5, 3.7, 8.0, 12.5, 99.25,
                   1234.5}) {
    const double ref = boost::math::digamma(x);
    CHECK(std::abs(digamma(x) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
  }
  CHECK_THROWS(digamma(0.0));
  CHECK_THROWS(digamma(-1.0));
}

TEST_CASE("digamma recurrence psi(x+1) = psi(x) + 1/x") {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const double x = 1e-3 + 20.0 * rng.uniform();
    CHECK(digamma(x + 1.0) == doctest::Approx(digamma(x) + 1.0 / x).epsilon(1e-11));
  }
}

TEST_CASE("log_sum_exp is shift invariant and handles extremes") {
  Eigen::VectorXd x(3);
  x << 1.0, 2.0, 3.0;
  const double direct = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0));
  CHECK(log_sum_exp(x) == doctest::Approx(direct).epsilon(1e-15));
  // Values that would overflow a naive implementation.
  Eigen::VectorXd big(2);
  big << 1000.0, 1000.0;
  CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
  CHECK(std::isinf(log_sum_exp(Eigen::VectorXd())));
}

TEST_CASE("weighted log_sum_exp against direct summation") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(5), w(5);
    for (int i = 0; i < 5; ++i) {
      x(i) = 10.0 * (rng.uniform() - 0.5);
      w(i) = rng.uniform() + 0.01;
    }
    const double direct = std::log((w.array() * x.array().exp()).sum());
    CHECK(log_sum_exp_weighted(x, w) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("entropy term treats 0 log 0 as 0") {
  CHECK(entropy_term(0.0) == 0.0);
  CHECK(entropy_term(1.0) == 0.0);
  CHECK(entropy_term(0.5) == doctest::Approx(0.5 * std::log(2.0)));
}

TEST_CASE("rng streams are deterministic and distributions sane") {
  Rng a(123), b(123);
  for (int i = 0; i < 50; ++i) {
    CHECK(a.uniform() == b.uniform());
  }
  Rng g(7);
  double mean = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) mean += g.gaussian();
  mean /= n;
  CHECK(std::abs(mean) < 0.03);

  Rng d(11);
  const Eigen::VectorXd alpha = Eigen::VectorXd::Constant(4, 0.5);
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd phi = d.dirichlet(alpha);
    CHECK(phi.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(phi.minCoeff() >= 0.0);
  }
}
