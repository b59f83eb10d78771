#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "topicvec/corpus.hpp"

namespace topicvec {

// Pre-trained word embeddings aligned to a vocabulary: row i is the vector
// of word i. Frozen after align; concurrent reads are safe.
struct EmbeddingMatrix {
  Eigen::MatrixXd V;  // W x N
  int dim = 0;        // N
};

struct EmbeddingFile {
  std::vector<std::string> words;
  Eigen::MatrixXd vectors;  // one row per word
  int dim = 0;
};

// Text format: optional first header line "W N", then "word f1 ... fN" per
// line. Files ending in .gz are read through zlib. Duplicate words keep the
// first occurrence (with a warning on stderr); a dimension mismatch reports
// the offending line number.
EmbeddingFile load_embeddings(const std::string& path);

// Rows permuted to vocabulary id order. Every vocabulary word must be
// present; the error lists up to 10 missing words.
EmbeddingMatrix align(const Vocabulary& vocab,
                      const std::vector<std::string>& words,
                      const Eigen::MatrixXd& vectors);

inline EmbeddingMatrix align(const Vocabulary& vocab, const EmbeddingFile& file) {
  return align(vocab, file.words, file.vectors);
}

// Writes the text format above (with header), shortest round-trip decimals.
void save_embeddings(const std::vector<std::string>& words,
                     const Eigen::MatrixXd& vectors, const std::string& path);

}  // namespace topicvec
