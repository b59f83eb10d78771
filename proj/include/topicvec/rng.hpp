#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace topicvec {

// Deterministic random source. All distributions are derived from the raw
// mt19937_64 stream rather than std:: distributions, whose output is
// implementation-defined; sequences are therefore reproducible across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return state_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // (0, 1)
  double uniform_pos() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return u;
  }

  // Standard normal, Box-Muller (cosine branch only).
  double gaussian();

  // Gamma(shape, 1), Marsaglia-Tsang with the boost trick for shape < 1.
  double gamma(double shape);

  Eigen::VectorXd dirichlet(const Eigen::VectorXd& alpha);

  // Index sampled with probability probs[i] / sum(probs).
  int categorical(const Eigen::VectorXd& probs);

 private:
  std::mt19937_64 state_;
};

}  // namespace topicvec
