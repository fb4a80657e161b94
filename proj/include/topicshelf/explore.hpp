#pragma once

// Document browsing over one trained model: similarity ranking around a
// focal document, re-sorting by a topic, top documents for a topic, label
// autocompletion and topic-mediated term search.

#include <algorithm>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topicshelf/corpus.hpp"
#include "topicshelf/error.hpp"
#include "topicshelf/lda.hpp"
#include "topicshelf/metrics.hpp"

namespace topicshelf::explore {

struct RankedDocument {
  std::size_t index = 0;  // position in the corpus document list
  std::string doc_id;
  double similarity = 0.0;
  std::vector<double> topic_mix;
};

namespace detail {

inline void check_model(const lda::TopicModel& model, const Corpus& corpus) {
  if (model.num_documents() != corpus.num_documents() ||
      model.vocab_hash() != corpus.vocabulary().hash()) {
    throw Error(ErrorKind::VocabularyMismatch, "model was not trained on this corpus");
  }
}

inline void check_topic(const lda::TopicModel& model, std::size_t topic) {
  if (topic >= model.num_topics()) {
    throw Error(ErrorKind::IndexOutOfRange,
                "topic " + std::to_string(topic) + " >= K=" + std::to_string(model.num_topics()));
  }
}

inline RankedDocument make_ranked(const lda::TopicModel& model, const Corpus& corpus,
                                  std::size_t d, double similarity) {
  const auto row = model.theta_row(d);
  return {d, corpus.documents()[d].doc_id, similarity, {row.begin(), row.end()}};
}

inline void sort_desc(std::vector<RankedDocument>& docs) {
  std::sort(docs.begin(), docs.end(), [](const RankedDocument& a, const RankedDocument& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.doc_id < b.doc_id;
  });
}

inline void truncate(std::vector<RankedDocument>& docs, std::size_t limit) {
  if (docs.size() > limit) docs.resize(limit);
}

}  // namespace detail

/// Every document scored against the focal document's topic mixture. The
/// focal document always comes first (similarity 1); the rest are ordered
/// by similarity, then doc_id.
inline std::vector<RankedDocument> similar_documents(const lda::TopicModel& model,
                                                     const Corpus& corpus,
                                                     std::string_view focal_id,
                                                     std::size_t limit) {
  detail::check_model(model, corpus);
  const auto focal = corpus.find_document(focal_id);
  if (!focal) throw Error(ErrorKind::UnknownDocument, std::string(focal_id));
  const auto focal_mix = model.theta_row(*focal);
  std::vector<RankedDocument> rest;
  rest.reserve(corpus.num_documents());
  for (std::size_t d = 0; d < corpus.num_documents(); ++d) {
    if (d == *focal) continue;
    rest.push_back(detail::make_ranked(
        model, corpus, d, metrics::similarity_unchecked(focal_mix, model.theta_row(d))));
  }
  detail::sort_desc(rest);
  std::vector<RankedDocument> out;
  out.reserve(rest.size() + 1);
  out.push_back(detail::make_ranked(model, corpus, *focal, 1.0));
  for (auto& r : rest) out.push_back(std::move(r));
  detail::truncate(out, limit);
  return out;
}

/// Reorders candidates by their proportion of `topic`, ties by doc_id.
inline std::vector<RankedDocument> sort_by_topic(std::vector<RankedDocument> candidates,
                                                 std::size_t topic) {
  for (const auto& c : candidates) {
    if (topic >= c.topic_mix.size()) {
      throw Error(ErrorKind::IndexOutOfRange, "topic " + std::to_string(topic) + " out of range");
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [topic](const RankedDocument& a, const RankedDocument& b) {
                     if (a.topic_mix[topic] != b.topic_mix[topic]) {
                       return a.topic_mix[topic] > b.topic_mix[topic];
                     }
                     return a.doc_id < b.doc_id;
                   });
  return candidates;
}

/// All documents ranked by theta[d][topic]; `similarity` carries that
/// proportion.
inline std::vector<RankedDocument> top_documents_for_topic(const lda::TopicModel& model,
                                                           const Corpus& corpus,
                                                           std::size_t topic, std::size_t limit) {
  detail::check_model(model, corpus);
  detail::check_topic(model, topic);
  std::vector<RankedDocument> out;
  out.reserve(corpus.num_documents());
  for (std::size_t d = 0; d < corpus.num_documents(); ++d) {
    out.push_back(detail::make_ranked(model, corpus, d, model.theta(d, topic)));
  }
  detail::sort_desc(out);
  detail::truncate(out, limit);
  return out;
}

struct TermSearchResult {
  std::vector<std::string> terms_used;
  std::vector<std::string> dropped_terms;  // out of vocabulary
  std::vector<double> word_weights;        // per used term
  std::vector<double> topic_similarity;    // s_k before normalization
  std::vector<double> pseudo_topic_mix;    // normalized s_k
  std::vector<RankedDocument> documents;
};

/// Topic-mediated search. The query terms become a word-space
/// pseudo-document with equal mass on each distinct known term; its
/// similarity to every topic's word distribution, normalized to sum to one,
/// is a topic mixture against which all documents are ranked.
inline TermSearchResult term_search(const lda::TopicModel& model, const Corpus& corpus,
                                    const std::vector<std::string>& terms,
                                    std::size_t limit = static_cast<std::size_t>(-1)) {
  detail::check_model(model, corpus);
  TermSearchResult result;
  std::set<WordId> ids;
  for (const auto& t : terms) {
    if (auto id = corpus.vocabulary().find(t)) {
      if (ids.insert(*id).second) result.terms_used.push_back(t);
    } else {
      result.dropped_terms.push_back(t);
    }
  }
  if (ids.empty()) throw Error(ErrorKind::NoKnownTerms, "no query term is in the vocabulary");

  std::vector<double> query(model.vocab_size(), 0.0);
  const double mass = 1.0 / static_cast<double>(ids.size());
  for (WordId id : ids) query[id] = mass;
  result.word_weights.assign(result.terms_used.size(), mass);

  const std::size_t num_topics = model.num_topics();
  result.topic_similarity.resize(num_topics);
  double total = 0.0;
  for (std::size_t k = 0; k < num_topics; ++k) {
    result.topic_similarity[k] = metrics::similarity_unchecked(query, model.phi_row(k));
    total += result.topic_similarity[k];
  }
  result.pseudo_topic_mix.resize(num_topics);
  for (std::size_t k = 0; k < num_topics; ++k) {
    result.pseudo_topic_mix[k] = total > 0.0 ? result.topic_similarity[k] / total
                                             : 1.0 / static_cast<double>(num_topics);
  }

  result.documents.reserve(corpus.num_documents());
  for (std::size_t d = 0; d < corpus.num_documents(); ++d) {
    result.documents.push_back(detail::make_ranked(
        model, corpus, d, metrics::similarity_unchecked(result.pseudo_topic_mix, model.theta_row(d))));
  }
  detail::sort_desc(result.documents);
  detail::truncate(result.documents, limit);
  return result;
}

inline constexpr std::size_t kDefaultAutocompleteLimit = 50;

/// Case-sensitive substring match over labels, sorted, at most `limit`.
inline std::vector<std::string> autocomplete(std::span<const std::string> labels,
                                             std::string_view query,
                                             std::size_t limit = kDefaultAutocompleteLimit) {
  std::vector<std::string> out;
  for (const auto& label : labels) {
    if (label.find(query) != std::string::npos) out.push_back(label);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.size() > limit) out.resize(limit);
  return out;
}

}  // namespace topicshelf::explore
