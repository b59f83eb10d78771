#pragma once

#include <string>
#include <utility>
#include <vector>

#include "topicvec/corpus.hpp"
#include "topicvec/embedding.hpp"
#include "topicvec/topic_model.hpp"

namespace topicvec {

// freq * cosine(v_w, t_k); the cosine against a zero-norm topic (the null
// topic) is defined as 0.
double word_topic_relevance(int word, int k, const EmbeddingMatrix& V,
                            const TopicSet& ts, double freq);

struct TopicCloudEntry {
  int topic_id = 0;
  double proportion = 0.0;  // renormalized over the exported topics
  std::vector<std::pair<std::string, double>> words;  // descending relevance
};

struct TopicCloud {
  std::vector<TopicCloudEntry> entries;  // descending proportion
};

// Top topics of one inferred document with their most relevant document
// words (relevance = within-document count times cosine).
TopicCloud build_topic_cloud(const Document& doc, const DocVariational& var,
                             const Vocabulary& vocab, const EmbeddingMatrix& V,
                             const TopicSet& ts, int top_n_topics,
                             int top_n_words);

// JSON array of {topic_id, proportion, words: [{word, relevance}]}.
void export_topic_cloud(const TopicCloud& cloud, const std::string& path);

}  // namespace topicvec
