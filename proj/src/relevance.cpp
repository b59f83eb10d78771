#include "topicvec/relevance.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"

#include "topicvec/representation.hpp"

namespace topicvec {

double word_topic_relevance(int word, int k, const EmbeddingMatrix& V,
                            const TopicSet& ts, double freq) {
  const double tn = ts.T.col(k).norm();
  const double vn = V.V.row(word).norm();
  if (tn == 0.0 || vn == 0.0) return 0.0;
  return freq * V.V.row(word).dot(ts.T.col(k)) / (vn * tn);
}

TopicCloud build_topic_cloud(const Document& doc, const DocVariational& var,
                             const Vocabulary& vocab, const EmbeddingMatrix& V,
                             const TopicSet& ts, int top_n_topics,
                             int top_n_words) {
  if (top_n_topics < 1) {
    throw std::invalid_argument("top_n_topics must be >= 1");
  }
  const Eigen::VectorXd proportions = doc_topic_proportions(var);
  const int K = ts.K();

  std::vector<int> order(K);
  for (int k = 0; k < K; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return proportions(a) > proportions(b);
  });
  const int n_topics = std::min(top_n_topics, K);

  double selected_mass = 0.0;
  for (int i = 0; i < n_topics; ++i) selected_mass += proportions(order[i]);

  // Distinct document words with their counts, in first-occurrence order.
  std::vector<std::pair<int, int>> word_counts;
  std::map<int, int> count_index;
  for (int w : doc.tokens) {
    auto [it, inserted] = count_index.try_emplace(w, static_cast<int>(word_counts.size()));
    if (inserted) {
      word_counts.push_back({w, 1});
    } else {
      ++word_counts[it->second].second;
    }
  }

  TopicCloud cloud;
  cloud.entries.reserve(n_topics);
  for (int i = 0; i < n_topics; ++i) {
    TopicCloudEntry entry;
    entry.topic_id = order[i];
    entry.proportion = proportions(order[i]) / selected_mass;
    std::vector<std::pair<double, int>> scored;  // (relevance, word id)
    scored.reserve(word_counts.size());
    for (const auto& [w, count] : word_counts) {
      scored.push_back({word_topic_relevance(w, entry.topic_id, V, ts, count), w});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.first > b.first;
    });
    const int n_words = std::min<int>(top_n_words, static_cast<int>(scored.size()));
    for (int j = 0; j < n_words; ++j) {
      entry.words.push_back({vocab.words[scored[j].second], scored[j].first});
    }
    cloud.entries.push_back(std::move(entry));
  }
  return cloud;
}

void export_topic_cloud(const TopicCloud& cloud, const std::string& path) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& entry : cloud.entries) {
    nlohmann::json words = nlohmann::json::array();
    for (const auto& [word, relevance] : entry.words) {
      words.push_back({{"word", word}, {"relevance", relevance}});
    }
    out.push_back({{"topic_id", entry.topic_id},
                   {"proportion", entry.proportion},
                   {"words", words}});
  }
  std::ofstream file(path);
  if (!file) {
    throw std::runtime_error("cannot write topic cloud '" + path + "'");
  }
  file << out.dump(2) << '\n';
}

}  // namespace topicvec
