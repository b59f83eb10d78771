#include "topicvec/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace topicvec {

std::uint64_t Vocabulary::hash() const {
  // FNV-1a, with a separator byte between words so concatenations collide
  // less trivially.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ull;
  };
  for (const auto& w : words) {
    for (unsigned char c : w) mix(c);
    mix(0x1f);
  }
  return h;
}

std::vector<std::string> preprocess(const std::string& raw_text,
                                    const TokenSet& stopwords,
                                    const TokenSet* keep_set) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&]() {
    if (cur.empty()) return;
    if (stopwords.count(cur) == 0 &&
        (keep_set == nullptr || keep_set->count(cur) > 0)) {
      out.push_back(cur);
    }
    cur.clear();
  };
  for (unsigned char c : raw_text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

Vocabulary build_vocabulary(
    const std::vector<std::vector<std::string>>& sequences,
    const std::map<std::string, double>* external_unigrams) {
  Vocabulary vocab;
  std::vector<long long> counts;
  long long total = 0;
  for (const auto& seq : sequences) {
    for (const auto& tok : seq) {
      auto [it, inserted] = vocab.index.try_emplace(tok, vocab.size());
      if (inserted) {
        vocab.words.push_back(tok);
        counts.push_back(0);
      }
      ++counts[it->second];
      ++total;
    }
  }
  if (total == 0) {
    throw std::runtime_error("empty vocabulary");
  }
  const int W = vocab.size();
  vocab.unigram_probs.resize(W);
  if (external_unigrams != nullptr) {
    for (int i = 0; i < W; ++i) {
      auto it = external_unigrams->find(vocab.words[i]);
      if (it == external_unigrams->end() || !(it->second > 0.0)) {
        throw std::runtime_error("unigram file has no positive probability for observed word '" +
                                 vocab.words[i] + "'");
      }
      vocab.unigram_probs(i) = it->second;
    }
    vocab.unigram_probs /= vocab.unigram_probs.sum();
  } else {
    // Add-0.5 smoothing keeps every probability strictly positive.
    const double denom = static_cast<double>(total) + 0.5 * W;
    for (int i = 0; i < W; ++i) {
      vocab.unigram_probs(i) = (static_cast<double>(counts[i]) + 0.5) / denom;
    }
  }
  return vocab;
}

CorpusFormat parse_corpus_format(const std::string& tag) {
  if (tag == "dir-per-category") return CorpusFormat::kDirPerCategory;
  if (tag == "labeled-lines") return CorpusFormat::kLabeledLines;
  throw std::runtime_error("unknown corpus format tag '" + tag + "'");
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read file '" + p.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<fs::path> sorted_entries(const fs::path& dir) {
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(dir)) {
    entries.push_back(e.path());
  }
  std::sort(entries.begin(), entries.end());
  return entries;
}

}  // namespace

std::vector<RawDocument> read_raw_documents(const std::string& path,
                                            CorpusFormat format) {
  std::vector<RawDocument> docs;
  if (format == CorpusFormat::kDirPerCategory) {
    if (!fs::is_directory(path)) {
      throw std::runtime_error("corpus path '" + path + "' is not a readable directory");
    }
    for (const auto& sub : sorted_entries(path)) {
      if (!fs::is_directory(sub)) continue;
      const std::string label = sub.filename().string();
      for (const auto& file : sorted_entries(sub)) {
        if (!fs::is_regular_file(file)) continue;
        docs.push_back({label + "/" + file.filename().string(), label, read_file(file)});
      }
    }
  } else {
    std::ifstream in(path);
    if (!in) {
      throw std::runtime_error("cannot read corpus file '" + path + "'");
    }
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw std::runtime_error("labeled-lines corpus: missing tab at line " +
                                 std::to_string(lineno));
      }
      docs.push_back({"line-" + std::to_string(lineno), line.substr(0, tab),
                      line.substr(tab + 1)});
    }
  }
  return docs;
}

Corpus load_corpus(const std::string& path, CorpusFormat format,
                   const CorpusLoadOptions& opts) {
  const auto raw = read_raw_documents(path, format);
  std::vector<std::vector<std::string>> sequences;
  sequences.reserve(raw.size());
  for (const auto& rd : raw) {
    sequences.push_back(preprocess(rd.text, opts.stopwords, opts.keep_set));
  }
  Corpus corpus;
  corpus.vocabulary = build_vocabulary(sequences, opts.external_unigrams);
  corpus.documents.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    Document doc;
    doc.doc_id = raw[i].doc_id;
    doc.label = raw[i].label;
    doc.tokens.reserve(sequences[i].size());
    for (const auto& tok : sequences[i]) {
      doc.tokens.push_back(corpus.vocabulary.index.at(tok));
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

std::vector<Document> project_documents(const std::vector<RawDocument>& raw,
                                        const TokenSet& stopwords,
                                        const Vocabulary& vocab) {
  std::vector<Document> docs;
  docs.reserve(raw.size());
  for (const auto& rd : raw) {
    Document doc;
    doc.doc_id = rd.doc_id;
    doc.label = rd.label;
    for (const auto& tok : preprocess(rd.text, stopwords, nullptr)) {
      const int id = vocab.id_of(tok);
      if (id >= 0) doc.tokens.push_back(id);
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

const TokenSet& default_stopwords() {
  // Tokenizer-split forms: contractions appear as their pieces
  // ("don't" -> "don", "t").
  static const TokenSet kStopwords = {
      "a", "about", "above", "after", "again", "against", "all", "am", "an",
      "and", "any", "are", "aren", "as", "at", "be", "because", "been",
      "before", "being", "below", "between", "both", "but", "by", "can",
      "cannot", "could", "couldn", "d", "did", "didn", "do", "does", "doesn",
      "doing", "don", "down", "during", "each", "few", "for", "from",
      "further", "had", "hadn", "has", "hasn", "have", "haven", "having",
      "he", "her", "here", "hers", "herself", "him", "himself", "his", "how",
      "i", "if", "in", "into", "is", "isn", "it", "its", "itself", "just",
      "let", "ll", "m", "me", "more", "most", "mustn", "my", "myself", "no",
      "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other",
      "ought", "our", "ours", "ourselves", "out", "over", "own", "re", "s",
      "same", "shan", "she", "should", "shouldn", "so", "some", "such", "t",
      "than", "that", "the", "their", "theirs", "them", "themselves", "then",
      "there", "these", "they", "this", "those", "through", "to", "too",
      "under", "until", "up", "ve", "very", "was", "wasn", "we", "were",
      "weren", "what", "when", "where", "which", "while", "who", "whom",
      "why", "will", "with", "won", "would", "wouldn", "you", "your",
      "yours", "yourself", "yourselves",
  };
  return kStopwords;
}

TokenSet load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read stopword file '" + path + "'");
  }
  TokenSet out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n' ||
                             line.back() == ' ' || line.back() == '\t')) {
      line.pop_back();
    }
    if (line.empty() || line[0] == '#') continue;
    out.insert(line);
  }
  return out;
}

std::map<std::string, double> load_unigrams(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read unigram file '" + path + "'");
  }
  std::map<std::string, double> out;
  std::string word;
  double prob;
  while (in >> word >> prob) {
    out[word] = prob;
  }
  return out;
}

}  // namespace topicvec
