#include "topicvec/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace topicvec {

double Rng::gaussian() {
  const double u1 = uniform_pos();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) {
    throw std::domain_error("gamma: shape must be positive");
  }
  if (shape < 1.0) {
    const double u = uniform_pos();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = gaussian();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform_pos();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
      return d * v;
    }
  }
}

Eigen::VectorXd Rng::dirichlet(const Eigen::VectorXd& alpha) {
  Eigen::VectorXd g(alpha.size());
  for (Eigen::Index k = 0; k < alpha.size(); ++k) {
    g(k) = gamma(alpha(k));
  }
  const double total = g.sum();
  if (total <= 0.0) {
    // All gamma draws underflowed (possible for tiny alpha); fall back to
    // a single winning component.
    Eigen::VectorXd out = Eigen::VectorXd::Zero(alpha.size());
    out(static_cast<Eigen::Index>(next_u64() % alpha.size())) = 1.0;
    return out;
  }
  return g / total;
}

int Rng::categorical(const Eigen::VectorXd& probs) {
  const double total = probs.sum();
  if (!(total > 0.0)) {
    throw std::domain_error("categorical: probabilities sum to zero");
  }
  const double threshold = uniform() * total;
  double cum = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    cum += probs(i);
    if (cum >= threshold) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

}  // namespace topicvec
