#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "topicvec/corpus.hpp"

namespace topicvec {

// One-vs-rest L1-regularized logistic regression trained by deterministic
// epoch-ordered proximal (soft-threshold) gradient steps.
struct LinearClassifier {
  std::vector<std::string> classes;  // sorted
  Eigen::MatrixXd weights;           // C x (F + 1); last column is the bias
};

// Throws when fewer than two classes are present. Fixed seed and inputs give
// bit-identical weights.
LinearClassifier train_linear_classifier(const Eigen::MatrixXd& features,
                                         const std::vector<std::string>& labels,
                                         double l1_penalty, int epochs,
                                         std::uint64_t seed);

std::string predict(const LinearClassifier& clf, const Eigen::VectorXd& x);
std::vector<std::string> predict_all(const LinearClassifier& clf,
                                     const Eigen::MatrixXd& features);

struct ClassMetrics {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ClassificationReport {
  std::vector<ClassMetrics> per_class;  // classes present in the true labels
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

// Per-class precision/recall/F1 with 0/0 := 0; macro values are unweighted
// means over the classes present in the true labels.
ClassificationReport macro_metrics(const std::vector<std::string>& predicted,
                                   const std::vector<std::string>& truth);

// Sparse text format, one line per document: "label idx:value ..." with
// 1-based indices, zeros omitted, shortest round-trip decimals.
void export_features(const Eigen::MatrixXd& features,
                     const std::vector<std::string>& labels,
                     const std::string& path);

struct SparseDataset {
  Eigen::MatrixXd features;
  std::vector<std::string> labels;
};

// Reads the format above; the feature dimension is the largest index seen.
SparseDataset load_feature_file(const std::string& path);

void write_report(const ClassificationReport& report, const std::string& path);
ClassificationReport parse_report(const std::string& path);
std::string format_report(const ClassificationReport& report);

}  // namespace topicvec
