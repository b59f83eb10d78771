#include "topicvec/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "topicvec/rng.hpp"

namespace topicvec {

namespace {

double soft_threshold(double w, double t) {
  if (w > t) return w - t;
  if (w < -t) return w + t;
  return 0.0;
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr - buf);
}

}  // namespace

LinearClassifier train_linear_classifier(const Eigen::MatrixXd& features,
                                         const std::vector<std::string>& labels,
                                         double l1_penalty, int epochs,
                                         std::uint64_t seed) {
  const int M = static_cast<int>(features.rows());
  const int F = static_cast<int>(features.cols());
  if (static_cast<int>(labels.size()) != M) {
    throw std::invalid_argument("feature/label count mismatch");
  }
  std::set<std::string> class_set(labels.begin(), labels.end());
  if (class_set.size() < 2) {
    throw std::invalid_argument("classifier needs at least two classes");
  }
  LinearClassifier clf;
  clf.classes.assign(class_set.begin(), class_set.end());
  const int C = static_cast<int>(clf.classes.size());
  clf.weights = Eigen::MatrixXd::Zero(C, F + 1);

  constexpr double kLr0 = 0.5;
  for (int c = 0; c < C; ++c) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(F);
    double bias = 0.0;
    // Same permutation stream for every binary problem, so the classes can
    // be trained independently and still assemble deterministically.
    Rng rng(seed);
    std::vector<int> order(M);
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < epochs; ++epoch) {
      const double lr = kLr0 / (1.0 + epoch);
      for (int i = M - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_u64() % (i + 1));
        std::swap(order[i], order[j]);
      }
      for (int idx : order) {
        const double y = labels[idx] == clf.classes[c] ? 1.0 : -1.0;
        const double z = w.dot(features.row(idx)) + bias;
        // d/dz log(1 + exp(-yz)) = -y * sigmoid(-yz)
        const double g = -y / (1.0 + std::exp(y * z));
        w -= lr * g * features.row(idx).transpose();
        for (int f = 0; f < F; ++f) {
          w(f) = soft_threshold(w(f), lr * l1_penalty);
        }
        bias -= lr * g;
      }
    }
    clf.weights.row(c).head(F) = w.transpose();
    clf.weights(c, F) = bias;
  }
  return clf;
}

std::string predict(const LinearClassifier& clf, const Eigen::VectorXd& x) {
  const int F = static_cast<int>(clf.weights.cols()) - 1;
  if (x.size() != F) {
    throw std::invalid_argument("feature dimension mismatch");
  }
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < static_cast<int>(clf.classes.size()); ++c) {
    const double score = clf.weights.row(c).head(F).dot(x) + clf.weights(c, F);
    if (score > best_score) {
      best_score = score;
      best = c;
    }
  }
  return clf.classes[best];
}

std::vector<std::string> predict_all(const LinearClassifier& clf,
                                     const Eigen::MatrixXd& features) {
  std::vector<std::string> out;
  out.reserve(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    out.push_back(predict(clf, features.row(i).transpose()));
  }
  return out;
}

ClassificationReport macro_metrics(const std::vector<std::string>& predicted,
                                   const std::vector<std::string>& truth) {
  if (predicted.size() != truth.size() || truth.empty()) {
    throw std::invalid_argument("macro_metrics: label vectors must have equal nonzero length");
  }
  std::map<std::string, int> tp, fp, fn;
  std::set<std::string> classes(truth.begin(), truth.end());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == truth[i]) {
      ++tp[truth[i]];
    } else {
      ++fp[predicted[i]];
      ++fn[truth[i]];
    }
  }
  ClassificationReport report;
  for (const auto& c : classes) {
    ClassMetrics m;
    m.name = c;
    const double p_den = tp[c] + fp[c];
    const double r_den = tp[c] + fn[c];
    m.precision = p_den > 0 ? tp[c] / p_den : 0.0;
    m.recall = r_den > 0 ? tp[c] / r_den : 0.0;
    const double f_den = m.precision + m.recall;
    m.f1 = f_den > 0 ? 2.0 * m.precision * m.recall / f_den : 0.0;
    report.macro_precision += m.precision;
    report.macro_recall += m.recall;
    report.macro_f1 += m.f1;
    report.per_class.push_back(std::move(m));
  }
  const double n = static_cast<double>(classes.size());
  report.macro_precision /= n;
  report.macro_recall /= n;
  report.macro_f1 /= n;
  return report;
}

void export_features(const Eigen::MatrixXd& features,
                     const std::vector<std::string>& labels,
                     const std::string& path) {
  if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
    throw std::invalid_argument("feature/label count mismatch");
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write feature file '" + path + "'");
  }
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    if (labels[i].find_first_of(" \t") != std::string::npos) {
      throw std::invalid_argument("label '" + labels[i] + "' contains whitespace");
    }
    out << labels[i];
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      const double v = features(i, j);
      if (v == 0.0) continue;
      out << ' ' << (j + 1) << ':' << shortest(v);
    }
    out << '\n';
  }
}

SparseDataset load_feature_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read feature file '" + path + "'");
  }
  std::vector<std::string> labels;
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::string line;
  int max_index = 0;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string label;
    ss >> label;
    labels.push_back(label);
    std::vector<std::pair<int, double>> row;
    std::string tok;
    while (ss >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) {
        throw std::runtime_error("feature file: bad entry '" + tok + "' at line " +
                                 std::to_string(lineno));
      }
      const int idx = std::atoi(tok.substr(0, colon).c_str());
      if (idx < 1) {
        throw std::runtime_error("feature file: indices are 1-based (line " +
                                 std::to_string(lineno) + ")");
      }
      const double value = std::strtod(tok.c_str() + colon + 1, nullptr);
      row.push_back({idx, value});
      max_index = std::max(max_index, idx);
    }
    rows.push_back(std::move(row));
  }
  SparseDataset data;
  data.labels = std::move(labels);
  data.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), max_index);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [idx, value] : rows[i]) {
      data.features(static_cast<Eigen::Index>(i), idx - 1) = value;
    }
  }
  return data;
}

std::string format_report(const ClassificationReport& report) {
  std::ostringstream out;
  for (const auto& m : report.per_class) {
    out << "class " << m.name << " precision " << shortest(m.precision)
        << " recall " << shortest(m.recall) << " f1 " << shortest(m.f1) << '\n';
  }
  out << "macro precision " << shortest(report.macro_precision) << " recall "
      << shortest(report.macro_recall) << " f1 " << shortest(report.macro_f1)
      << '\n';
  return out.str();
}

void write_report(const ClassificationReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write report '" + path + "'");
  }
  out << format_report(report);
}

ClassificationReport parse_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read report '" + path + "'");
  }
  ClassificationReport report;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string head;
    ss >> head;
    std::string key;
    if (head == "class") {
      ClassMetrics m;
      ss >> m.name;
      ss >> key >> m.precision >> key >> m.recall >> key >> m.f1;
      report.per_class.push_back(std::move(m));
    } else if (head == "macro") {
      ss >> key >> report.macro_precision >> key >> report.macro_recall >> key >>
          report.macro_f1;
    }
  }
  return report;
}

}  // namespace topicvec
