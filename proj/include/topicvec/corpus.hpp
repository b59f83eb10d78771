#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

namespace topicvec {

using TokenSet = std::unordered_set<std::string>;

// Word <-> id map plus the unigram distribution u. Immutable after
// construction; safe for concurrent reads.
struct Vocabulary {
  std::vector<std::string> words;                 // id -> token
  std::unordered_map<std::string, int> index;     // token -> id
  Eigen::VectorXd unigram_probs;                  // strictly positive, sums to 1

  int size() const { return static_cast<int>(words.size()); }

  // -1 when the token is unknown.
  int id_of(const std::string& w) const {
    auto it = index.find(w);
    return it == index.end() ? -1 : it->second;
  }

  // Order-sensitive FNV-1a over the word list; used to pin checkpoints to
  // the vocabulary they were trained against.
  std::uint64_t hash() const;
};

struct Document {
  std::string doc_id;
  std::vector<int> tokens;              // word ids, all < W
  std::optional<std::string> label;

  int length() const { return static_cast<int>(tokens.size()); }
};

struct Corpus {
  std::vector<Document> documents;
  Vocabulary vocabulary;
};

// Lowercases, splits on non-alphanumeric boundaries, drops stopwords and
// (when keep_set is non-null) tokens outside keep_set. Empty output is valid.
std::vector<std::string> preprocess(const std::string& raw_text,
                                    const TokenSet& stopwords,
                                    const TokenSet* keep_set);

// Vocabulary over all observed tokens, in first-occurrence order.
// With external unigrams: restrict to observed words and renormalize
// (missing or non-positive entries are an error). Otherwise maximum
// likelihood frequencies with add-0.5 smoothing.
// Throws "empty vocabulary" when no token was observed.
Vocabulary build_vocabulary(
    const std::vector<std::vector<std::string>>& sequences,
    const std::map<std::string, double>* external_unigrams = nullptr);

enum class CorpusFormat {
  kDirPerCategory,  // subdirectory name = label, each file a document
  kLabeledLines,    // each line "label<TAB>text"
};

// "dir-per-category" / "labeled-lines"; anything else throws.
CorpusFormat parse_corpus_format(const std::string& tag);

struct RawDocument {
  std::string doc_id;
  std::optional<std::string> label;
  std::string text;
};

// Reads documents without tokenizing. Directory entries are visited in
// sorted order so corpus construction is reproducible.
std::vector<RawDocument> read_raw_documents(const std::string& path,
                                            CorpusFormat format);

struct CorpusLoadOptions {
  TokenSet stopwords;
  const TokenSet* keep_set = nullptr;  // typically the embedding vocabulary
  const std::map<std::string, double>* external_unigrams = nullptr;
};

Corpus load_corpus(const std::string& path, CorpusFormat format,
                   const CorpusLoadOptions& opts);

// Tokenizes raw documents against an existing vocabulary (unknown tokens are
// dropped). Used to put held-out documents into a trained model's id space.
std::vector<Document> project_documents(const std::vector<RawDocument>& raw,
                                        const TokenSet& stopwords,
                                        const Vocabulary& vocab);

// Fixed English stopword list shipped with the library (~150 entries, stored
// post-tokenization: "don't" appears as "don" and "t").
const TokenSet& default_stopwords();

// One token per line, UTF-8. '#' lines and blanks are skipped.
TokenSet load_stopwords(const std::string& path);

// "word<SP>prob" per line.
std::map<std::string, double> load_unigrams(const std::string& path);

}  // namespace topicvec
