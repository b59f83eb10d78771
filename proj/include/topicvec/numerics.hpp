#pragma once

#include <vector>

#include <Eigen/Core>

namespace topicvec {

// Digamma psi(x) = d/dx log Gamma(x). Upward recurrence into the asymptotic
// region, then the Bernoulli series. Absolute error < 1e-12 for x >= 1e-3.
double digamma(double x);

// log(sum_i exp(x_i)) with max shift. Empty input -> -inf.
double log_sum_exp(const Eigen::VectorXd& x);

// log(sum_i w_i exp(x_i)) for nonnegative weights, shared max shift.
double log_sum_exp_weighted(const Eigen::VectorXd& x, const Eigen::VectorXd& w);

// -p*log(p) with 0*log(0) := 0.
inline double entropy_term(double p) {
  return p > 0.0 ? -p * std::log(p) : 0.0;
}

}  // namespace topicvec
