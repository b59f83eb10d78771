#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "topicvec/topic_model.hpp"

namespace topicvec {

struct Checkpoint {
  ModelState state;
  std::uint64_t vocab_hash = 0;
};

// Binary container (little-endian): magic "TVEC", version, N, K, gamma,
// alpha, the vocabulary hash, then per category the topic matrix (row-major,
// 8-byte floats) and residuals. Writing the same state twice produces
// byte-identical files.
void save_checkpoint(const ModelState& state, std::uint64_t vocab_hash,
                     const std::string& path);

Checkpoint load_checkpoint(const std::string& path);

// Throws when the checkpoint was trained against a different vocabulary.
void verify_vocab_hash(const Checkpoint& ckpt, const Vocabulary& vocab);

// One value per line, shortest round-trip decimals.
void save_elbo_trace(const std::vector<double>& trace, const std::string& path);

}  // namespace topicvec
