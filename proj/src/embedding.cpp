#include "topicvec/embedding.hpp"

#include <zlib.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace topicvec {

namespace {

// Pulls lines out of either a plain stream or a gzip stream.
class LineReader {
 public:
  explicit LineReader(const std::string& path) {
    if (path.size() > 3 && path.substr(path.size() - 3) == ".gz") {
      gz_ = gzopen(path.c_str(), "rb");
      if (gz_ == nullptr) {
        throw std::runtime_error("cannot open '" + path + "'");
      }
    } else {
      file_.open(path);
      if (!file_) {
        throw std::runtime_error("cannot open '" + path + "'");
      }
    }
  }

  ~LineReader() {
    if (gz_ != nullptr) gzclose(gz_);
  }

  bool next(std::string& line) {
    bool got = false;
    if (gz_ == nullptr) {
      got = static_cast<bool>(std::getline(file_, line));
    } else {
      line.clear();
      char buf[4096];
      while (gzgets(gz_, buf, sizeof(buf)) != nullptr) {
        got = true;
        line += buf;
        if (!line.empty() && line.back() == '\n') {
          line.pop_back();
          break;
        }
      }
    }
    if (got && !line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    return got;
  }

 private:
  std::ifstream file_;
  gzFile gz_ = nullptr;
};

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

bool is_positive_int(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return s != "0" || s.size() > 1;
}

double parse_double(const std::string& tok, int lineno) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') {
    throw std::runtime_error("embedding file: bad number '" + tok + "' at line " +
                             std::to_string(lineno));
  }
  return v;
}

}  // namespace

EmbeddingFile load_embeddings(const std::string& path) {
  LineReader reader(path);
  EmbeddingFile out;
  std::vector<std::vector<double>> rows;
  std::unordered_map<std::string, int> seen;

  std::string line;
  int lineno = 0;
  int expected = -1;
  bool first_content_line = true;
  while (reader.next(line)) {
    ++lineno;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (first_content_line && toks.size() == 2 && is_positive_int(toks[0]) &&
        is_positive_int(toks[1])) {
      // Header "W N".
      expected = std::stoi(toks[1]);
      first_content_line = false;
      continue;
    }
    first_content_line = false;
    if (toks.size() < 2) {
      throw std::runtime_error("embedding file: no values at line " +
                               std::to_string(lineno));
    }
    const int n = static_cast<int>(toks.size()) - 1;
    if (expected < 0) {
      expected = n;
    } else if (n != expected) {
      throw std::runtime_error("embedding file: dimension mismatch at line " +
                               std::to_string(lineno) + ": expected " +
                               std::to_string(expected) + " values, got " +
                               std::to_string(n));
    }
    if (seen.count(toks[0]) > 0) {
      std::cerr << "warning: duplicate embedding for '" << toks[0]
                << "' at line " << lineno << ", keeping first\n";
      continue;
    }
    seen.emplace(toks[0], static_cast<int>(out.words.size()));
    out.words.push_back(toks[0]);
    std::vector<double> row(n);
    for (int j = 0; j < n; ++j) {
      row[j] = parse_double(toks[j + 1], lineno);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw std::runtime_error("embedding file '" + path + "' is empty");
  }
  out.dim = expected;
  out.vectors.resize(static_cast<Eigen::Index>(rows.size()), expected);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < expected; ++j) {
      out.vectors(static_cast<Eigen::Index>(i), j) = rows[i][j];
    }
  }
  return out;
}

EmbeddingMatrix align(const Vocabulary& vocab,
                      const std::vector<std::string>& words,
                      const Eigen::MatrixXd& vectors) {
  std::unordered_map<std::string, int> pos;
  pos.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    pos.try_emplace(words[i], static_cast<int>(i));
  }
  std::vector<std::string> missing;
  for (const auto& w : vocab.words) {
    if (pos.count(w) == 0) missing.push_back(w);
  }
  if (!missing.empty()) {
    std::string msg = "embeddings missing for " + std::to_string(missing.size()) +
                      " vocabulary word(s):";
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) {
      msg += " " + missing[i];
    }
    if (missing.size() > 10) {
      msg += " (and " + std::to_string(missing.size() - 10) + " more)";
    }
    throw std::runtime_error(msg);
  }
  EmbeddingMatrix out;
  out.dim = static_cast<int>(vectors.cols());
  out.V.resize(vocab.size(), vectors.cols());
  for (int i = 0; i < vocab.size(); ++i) {
    out.V.row(i) = vectors.row(pos.at(vocab.words[i]));
  }
  return out;
}

void save_embeddings(const std::vector<std::string>& words,
                     const Eigen::MatrixXd& vectors, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  out << words.size() << " " << vectors.cols() << "\n";
  char buf[64];
  for (std::size_t i = 0; i < words.size(); ++i) {
    out << words[i];
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
      auto res = std::to_chars(buf, buf + sizeof(buf), vectors(static_cast<Eigen::Index>(i), j));
      out << ' ' << std::string_view(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

}  // namespace topicvec
