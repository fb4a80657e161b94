#pragma once

// Latent Dirichlet allocation trained by collapsed Gibbs sampling.
//
// Each token's topic is resampled from
//   p(z = k | rest) ∝ (n_dk + alpha) * (n_kw + beta) / (n_k + V * beta)
// with the token's own assignment removed from the counts. Point estimates
// of phi (topic-word) and theta (document-topic) come from the counts of the
// final sweep plus the priors.
//
// Randomness: std::mt19937_64 seeded with the 64-bit seed. A uniform double
// in [0, 1) is (x >> 11) * 2^-53 for each 64-bit output x; initial topics are
// floor(u * K). This is fully specified, so runs are reproducible across
// platforms and implementations.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "topicshelf/binary_io.hpp"
#include "topicshelf/corpus.hpp"
#include "topicshelf/error.hpp"

namespace topicshelf::lda {

inline constexpr double kDefaultBeta = 0.01;
inline constexpr std::string_view kRngName = "mt19937_64";

struct TrainConfig {
  std::size_t num_topics = 0;
  std::size_t iterations = 0;
  double alpha = 0.0;
  double beta = kDefaultBeta;
  std::uint64_t seed = 0;

  /// alpha = 50 / K, beta = 0.01.
  static TrainConfig with_defaults(std::size_t num_topics, std::size_t iterations,
                                   std::uint64_t seed) {
    TrainConfig c;
    c.num_topics = num_topics;
    c.iterations = iterations;
    c.alpha = num_topics ? 50.0 / static_cast<double>(num_topics) : 0.0;
    c.beta = kDefaultBeta;
    c.seed = seed;
    return c;
  }

  void validate() const {
    if (num_topics < 1) throw Error(ErrorKind::InvalidArgument, "K must be at least 1");
    if (iterations < 1) throw Error(ErrorKind::InvalidArgument, "iterations must be at least 1");
    if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
    if (!(beta > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta must be positive");
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

class Random {
 public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
  }

 private:
  std::mt19937_64 engine_;
};

class TopicModel {
 public:
  TopicModel() = default;
  TopicModel(TrainConfig config, std::uint64_t vocab_hash, std::size_t vocab_size,
             std::vector<double> phi, std::vector<double> theta,
             std::vector<std::vector<std::uint32_t>> assignments)
      : config_(config),
        vocab_hash_(vocab_hash),
        vocab_size_(vocab_size),
        phi_(std::move(phi)),
        theta_(std::move(theta)),
        assignments_(std::move(assignments)) {}

  const TrainConfig& config() const noexcept { return config_; }
  std::size_t num_topics() const noexcept { return config_.num_topics; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  std::size_t num_documents() const noexcept { return assignments_.size(); }
  std::uint64_t vocab_hash() const noexcept { return vocab_hash_; }

  std::span<const double> phi_row(std::size_t topic) const {
    return std::span<const double>(phi_).subspan(topic * vocab_size_, vocab_size_);
  }
  std::span<const double> theta_row(std::size_t doc) const {
    return std::span<const double>(theta_).subspan(doc * num_topics(), num_topics());
  }
  double phi(std::size_t topic, WordId w) const { return phi_[topic * vocab_size_ + w]; }
  double theta(std::size_t doc, std::size_t topic) const { return theta_[doc * num_topics() + topic]; }

  const std::vector<double>& phi_data() const noexcept { return phi_; }
  const std::vector<double>& theta_data() const noexcept { return theta_; }
  const std::vector<std::vector<std::uint32_t>>& assignments() const noexcept { return assignments_; }

  friend bool operator==(const TopicModel&, const TopicModel&) = default;

 private:
  TrainConfig config_;
  std::uint64_t vocab_hash_ = 0;
  std::size_t vocab_size_ = 0;
  std::vector<double> phi_;    // K x V, row-major
  std::vector<double> theta_;  // D x K, row-major
  std::vector<std::vector<std::uint32_t>> assignments_;
};

/// Sampler state exposed to observers between sweeps.
class GibbsSampler {
 public:
  GibbsSampler(const Corpus& corpus, const TrainConfig& config)
      : corpus_(corpus),
        config_(config),
        num_topics_(config.num_topics),
        vocab_size_(corpus.vocab_size()),
        rng_(config.seed) {
    config_.validate();
    if (corpus.total_tokens() == 0) throw Error(ErrorKind::EmptyCorpus, "corpus has no tokens");
    if (vocab_size_ < 2) {
      throw Error(ErrorKind::DegenerateVocabulary,
                  "vocabulary has " + std::to_string(vocab_size_) + " word(s), need at least 2");
    }
    const std::size_t num_docs = corpus.num_documents();
    doc_topic_.assign(num_docs * num_topics_, 0);
    word_topic_.assign(vocab_size_ * num_topics_, 0);
    topic_total_.assign(num_topics_, 0);
    assignments_.resize(num_docs);
    for (std::size_t d = 0; d < num_docs; ++d) {
      const auto& tokens = corpus.documents()[d].tokens;
      auto& z = assignments_[d];
      z.resize(tokens.size());
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto k = static_cast<std::uint32_t>(rng_.below(num_topics_));
        z[i] = k;
        increment(d, tokens[i], k);
      }
    }
    weights_.resize(num_topics_);
  }

  void sweep() {
    const double vbeta = static_cast<double>(vocab_size_) * config_.beta;
    const double alpha = config_.alpha;
    const double beta = config_.beta;
    for (std::size_t d = 0; d < assignments_.size(); ++d) {
      const auto& tokens = corpus_.documents()[d].tokens;
      auto& z = assignments_[d];
      std::uint32_t* nd = &doc_topic_[d * num_topics_];
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const WordId w = tokens[i];
        std::uint32_t* nw = &word_topic_[std::size_t{w} * num_topics_];
        const std::uint32_t old = z[i];
        --nd[old];
        --nw[old];
        --topic_total_[old];
        double total = 0.0;
        for (std::size_t k = 0; k < num_topics_; ++k) {
          total += (nd[k] + alpha) * (nw[k] + beta) / (topic_total_[k] + vbeta);
          weights_[k] = total;
        }
        const double u = rng_.uniform() * total;
        std::size_t k = 0;
        while (k + 1 < num_topics_ && weights_[k] <= u) ++k;
        const auto chosen = static_cast<std::uint32_t>(k);
        z[i] = chosen;
        ++nd[chosen];
        ++nw[chosen];
        ++topic_total_[chosen];
      }
    }
    ++sweeps_;
  }

  std::size_t sweeps_done() const noexcept { return sweeps_; }

  std::uint32_t doc_topic_count(std::size_t d, std::size_t k) const {
    return doc_topic_[d * num_topics_ + k];
  }
  std::uint32_t topic_word_count(std::size_t k, WordId w) const {
    return word_topic_[std::size_t{w} * num_topics_ + k];
  }
  std::uint64_t topic_count(std::size_t k) const { return topic_total_[k]; }
  const std::vector<std::vector<std::uint32_t>>& assignments() const noexcept { return assignments_; }

  TopicModel estimate() const {
    const std::size_t num_docs = assignments_.size();
    std::vector<double> phi(num_topics_ * vocab_size_);
    const double vbeta = static_cast<double>(vocab_size_) * config_.beta;
    for (std::size_t k = 0; k < num_topics_; ++k) {
      const double denom = static_cast<double>(topic_total_[k]) + vbeta;
      for (std::size_t w = 0; w < vocab_size_; ++w) {
        phi[k * vocab_size_ + w] = (word_topic_[w * num_topics_ + k] + config_.beta) / denom;
      }
    }
    std::vector<double> theta(num_docs * num_topics_);
    const double kalpha = static_cast<double>(num_topics_) * config_.alpha;
    for (std::size_t d = 0; d < num_docs; ++d) {
      const double denom = static_cast<double>(assignments_[d].size()) + kalpha;
      for (std::size_t k = 0; k < num_topics_; ++k) {
        theta[d * num_topics_ + k] = (doc_topic_[d * num_topics_ + k] + config_.alpha) / denom;
      }
    }
    return TopicModel(config_, corpus_.vocabulary().hash(), vocab_size_, std::move(phi),
                      std::move(theta), assignments_);
  }

 private:
  void increment(std::size_t d, WordId w, std::uint32_t k) {
    ++doc_topic_[d * num_topics_ + k];
    ++word_topic_[std::size_t{w} * num_topics_ + k];
    ++topic_total_[k];
  }

  const Corpus& corpus_;
  TrainConfig config_;
  std::size_t num_topics_;
  std::size_t vocab_size_;
  Random rng_;
  std::vector<std::uint32_t> doc_topic_;   // D x K
  std::vector<std::uint32_t> word_topic_;  // V x K
  std::vector<std::uint64_t> topic_total_;
  std::vector<std::vector<std::uint32_t>> assignments_;
  std::vector<double> weights_;
  std::size_t sweeps_ = 0;
};

using SweepObserver = std::function<void(const GibbsSampler&)>;

inline TopicModel train(const Corpus& corpus, const TrainConfig& config,
                        const SweepObserver& observer = {}) {
  GibbsSampler sampler(corpus, config);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    sampler.sweep();
    if (observer) observer(sampler);
  }
  return sampler.estimate();
}

/// Per-K seed: splitmix64 finalizer over seed ^ (K * golden ratio).
inline std::uint64_t derive_seed(std::uint64_t seed, std::size_t num_topics) {
  std::uint64_t z = seed ^ (static_cast<std::uint64_t>(num_topics) * 0x9E3779B97F4A7C15ULL);
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct ModelSuite {
  std::shared_ptr<const Corpus> corpus;
  std::map<std::size_t, TopicModel> models;  // keyed by K

  std::vector<std::size_t> ks() const {
    std::vector<std::size_t> out;
    for (const auto& [k, _] : models) out.push_back(k);
    return out;
  }
  const TopicModel& at(std::size_t k) const {
    auto it = models.find(k);
    if (it == models.end()) throw Error(ErrorKind::ModelMissing, "no model with K=" + std::to_string(k));
    return it->second;
  }
};

struct SuiteOptions {
  std::size_t iterations = 1000;
  std::uint64_t seed = 0;
  std::optional<double> alpha;  // default 50 / K
  double beta = kDefaultBeta;
  bool parallel = true;
  /// Called with (K, wall seconds) as each model finishes, possibly from a
  /// worker thread.
  std::function<void(std::size_t, double)> on_model;
};

/// One model per K, each with its own derived seed. Models are independent,
/// so training them concurrently gives the same result as sequentially.
inline ModelSuite train_suite(std::shared_ptr<const Corpus> corpus,
                              const std::vector<std::size_t>& ks, const SuiteOptions& options) {
  std::vector<std::size_t> sorted = ks;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorKind::InvalidArgument, "duplicate K in suite");
  }
  if (sorted.empty()) throw Error(ErrorKind::InvalidArgument, "no K given");
  const auto config_for = [&](std::size_t k) {
    TrainConfig c = TrainConfig::with_defaults(k, options.iterations, derive_seed(options.seed, k));
    if (options.alpha) c.alpha = *options.alpha;
    c.beta = options.beta;
    return c;
  };
  const auto timed = [&](std::size_t k) {
    const auto start = std::chrono::steady_clock::now();
    TopicModel model = train(*corpus, config_for(k));
    if (options.on_model) {
      options.on_model(k, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    return model;
  };
  ModelSuite suite{corpus, {}};
  if (options.parallel && sorted.size() > 1) {
    std::vector<std::future<TopicModel>> jobs;
    for (std::size_t k : sorted) jobs.push_back(std::async(std::launch::async, timed, k));
    for (std::size_t i = 0; i < sorted.size(); ++i) suite.models.emplace(sorted[i], jobs[i].get());
  } else {
    for (std::size_t k : sorted) suite.models.emplace(k, timed(k));
  }
  return suite;
}

struct WordProbability {
  std::string word;
  double probability = 0.0;
};

/// Highest-probability words of a topic; ties by ascending word id.
inline std::vector<WordProbability> top_words(const TopicModel& model, const Vocabulary& vocab,
                                              std::size_t topic, std::size_t n) {
  if (topic >= model.num_topics()) {
    throw Error(ErrorKind::IndexOutOfRange, "topic " + std::to_string(topic) + " >= K=" +
                                                std::to_string(model.num_topics()));
  }
  if (vocab.size() != model.vocab_size()) {
    throw Error(ErrorKind::VocabularyMismatch, "vocabulary size differs from the model");
  }
  const auto row = model.phi_row(topic);
  std::vector<WordId> ids(row.size());
  for (WordId i = 0; i < ids.size(); ++i) ids[i] = i;
  const std::size_t take = std::min(n, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(take), ids.end(),
                    [&](WordId a, WordId b) {
                      if (row[a] != row[b]) return row[a] > row[b];
                      return a < b;
                    });
  std::vector<WordProbability> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back({vocab.word(ids[i]), row[ids[i]]});
  return out;
}

// ---------------------------------------------------------------------------
// Model file, little-endian:
//   magic "TSLDAMDL", u32 version, str rng algorithm,
//   u64 K, u64 iterations, f64 alpha, f64 beta, u64 seed,
//   u64 vocabulary hash, u64 V, u64 D,
//   K*V f64 phi (row-major), D*K f64 theta (row-major),
//   per document: u64 n, n x u32 topic assignment

inline constexpr std::string_view kModelMagic = "TSLDAMDL";
inline constexpr std::uint32_t kModelVersion = 1;

inline void save_model(const TopicModel& model, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  binary::Writer w(out);
  w.bytes(kModelMagic);
  w.u32(kModelVersion);
  w.str(kRngName);
  const auto& c = model.config();
  w.u64(c.num_topics);
  w.u64(c.iterations);
  w.f64(c.alpha);
  w.f64(c.beta);
  w.u64(c.seed);
  w.u64(model.vocab_hash());
  w.u64(model.vocab_size());
  w.u64(model.num_documents());
  for (double v : model.phi_data()) w.f64(v);
  for (double v : model.theta_data()) w.f64(v);
  for (const auto& z : model.assignments()) {
    w.u64(z.size());
    for (std::uint32_t k : z) w.u32(k);
  }
  if (!w.ok()) throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

/// Loads a model; when `expected_vocab_hash` is given the file must have
/// been trained against that vocabulary.
inline TopicModel load_model(const std::filesystem::path& path,
                             std::optional<std::uint64_t> expected_vocab_hash = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ModelMissing, "cannot open " + path.string());
  binary::Reader r(in, path.string());
  if (r.bytes(kModelMagic.size()) != kModelMagic) {
    throw Error(ErrorKind::FormatError, path.string() + ": not a model file");
  }
  if (const auto version = r.u32(); version != kModelVersion) {
    throw Error(ErrorKind::FormatError, path.string() + ": unsupported version " + std::to_string(version));
  }
  if (r.str(64) != kRngName) throw Error(ErrorKind::FormatError, path.string() + ": unknown generator");
  TrainConfig c;
  c.num_topics = r.count(1u << 20);
  c.iterations = r.u64();
  c.alpha = r.f64();
  c.beta = r.f64();
  c.seed = r.u64();
  const std::uint64_t hash = r.u64();
  if (expected_vocab_hash && hash != *expected_vocab_hash) {
    throw Error(ErrorKind::VocabularyMismatch,
                path.string() + " was trained on a different vocabulary");
  }
  const std::uint64_t vocab_size = r.count(std::uint64_t{1} << 32);
  const std::uint64_t num_docs = r.count(std::uint64_t{1} << 32);
  std::vector<double> phi(c.num_topics * vocab_size);
  for (double& v : phi) v = r.f64();
  std::vector<double> theta(num_docs * c.num_topics);
  for (double& v : theta) v = r.f64();
  std::vector<std::vector<std::uint32_t>> z(num_docs);
  for (auto& doc : z) {
    doc.resize(r.count(std::uint64_t{1} << 40));
    for (auto& k : doc) {
      k = r.u32();
      if (k >= c.num_topics) throw Error(ErrorKind::FormatError, path.string() + ": topic out of range");
    }
  }
  if (!r.at_end()) throw Error(ErrorKind::FormatError, path.string() + ": trailing bytes");
  return TopicModel(c, hash, vocab_size, std::move(phi), std::move(theta), std::move(z));
}

}  // namespace topicshelf::lda
