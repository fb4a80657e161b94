#pragma once

// Bag-of-words corpus: vocabulary, per-document token id streams, frequency
// filtering, stoplists and the frequency / IDF reports used to author them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "topicshelf/binary_io.hpp"
#include "topicshelf/error.hpp"
#include "topicshelf/segment.hpp"

namespace topicshelf {

using WordId = std::uint32_t;

class Vocabulary {
 public:
  Vocabulary() = default;

  WordId add(const std::string& word) {
    auto [it, inserted] = ids_.emplace(word, static_cast<WordId>(words_.size()));
    if (inserted) words_.push_back(word);
    return it->second;
  }

  std::optional<WordId> find(std::string_view word) const {
    auto it = ids_.find(std::string(word));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& word(WordId id) const { return words_.at(id); }
  const std::vector<std::string>& words() const noexcept { return words_; }
  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }

  /// Identity of the vocabulary (words and their order) for binding model
  /// files to the corpus they were trained on.
  std::uint64_t hash() const {
    binary::Fnv1a h;
    for (const auto& w : words_) {
      h.update(w);
      h.update("\n");
    }
    return h.value();
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> ids_;
};

struct Document {
  std::string doc_id;
  std::string label;
  std::vector<WordId> tokens;

  friend bool operator==(const Document&, const Document&) = default;
};

/// Effective settings that produced a corpus, in application order.
using Provenance = std::map<std::string, std::string>;

class Corpus {
 public:
  Corpus() = default;
  Corpus(Vocabulary vocab, std::vector<Document> docs, Provenance provenance)
      : vocab_(std::move(vocab)), docs_(std::move(docs)), provenance_(std::move(provenance)) {}

  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  const std::vector<Document>& documents() const noexcept { return docs_; }
  const Provenance& provenance() const noexcept { return provenance_; }
  Provenance& provenance() noexcept { return provenance_; }

  std::size_t num_documents() const noexcept { return docs_.size(); }
  std::size_t vocab_size() const noexcept { return vocab_.size(); }

  std::uint64_t total_tokens() const {
    std::uint64_t n = 0;
    for (const auto& d : docs_) n += d.tokens.size();
    return n;
  }

  /// Corpus frequency of every word, indexed by id.
  std::vector<std::uint64_t> word_counts() const {
    std::vector<std::uint64_t> counts(vocab_.size(), 0);
    for (const auto& d : docs_) {
      for (WordId w : d.tokens) ++counts[w];
    }
    return counts;
  }

  std::optional<std::size_t> find_document(std::string_view doc_id) const {
    for (std::size_t i = 0; i < docs_.size(); ++i) {
      if (docs_[i].doc_id == doc_id) return i;
    }
    return std::nullopt;
  }

  std::vector<std::string> empty_documents() const {
    std::vector<std::string> out;
    for (const auto& d : docs_) {
      if (d.tokens.empty()) out.push_back(d.doc_id);
    }
    return out;
  }

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.vocab_ == b.vocab_ && a.docs_ == b.docs_ && a.provenance_ == b.provenance_;
  }

 private:
  Vocabulary vocab_;
  std::vector<Document> docs_;
  Provenance provenance_;
};

class StopList {
 public:
  StopList() = default;
  template <typename Range>
  explicit StopList(const Range& words) : words_(std::begin(words), std::end(words)) {}

  static StopList load(const std::filesystem::path& path) {
    const std::string raw = detail::read_text_file(path);
    const std::string_view text = detail::strip_bom(raw);
    if (!utf8::is_valid(text)) {
      throw Error(ErrorKind::EncodingError, path.string() + " is not valid UTF-8");
    }
    StopList stops;
    detail::for_each_line(text, [&](std::string_view line) {
      line = detail::trim(line);
      if (!line.empty() && !line.starts_with('#')) stops.words_.emplace(line);
    });
    return stops;
  }

  bool contains(const std::string& w) const { return words_.contains(w); }
  std::size_t size() const noexcept { return words_.size(); }
  const std::set<std::string>& words() const noexcept { return words_; }

 private:
  std::set<std::string> words_;
};

inline constexpr std::uint64_t kDefaultMinFreq = 5;

inline std::string label_from_doc_id(std::string_view doc_id) {
  std::string label(doc_id);
  if (label.ends_with(".txt")) label.resize(label.size() - 4);
  return label;
}

/// Keeps the words whose corpus frequency is strictly greater than
/// `min_freq`. Vocabulary ids follow first occurrence. Documents left with no
/// tokens are retained.
inline Corpus build_corpus(const std::vector<TokenSequence>& docs,
                           std::uint64_t min_freq = kDefaultMinFreq) {
  if (docs.empty()) throw Error(ErrorKind::EmptyCorpus, "no documents");
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& d : docs) {
    for (const auto& t : d.tokens) ++counts[t];
  }
  Vocabulary vocab;
  std::vector<Document> out;
  out.reserve(docs.size());
  std::uint64_t kept_tokens = 0;
  for (const auto& d : docs) {
    Document doc{d.doc_id, label_from_doc_id(d.doc_id), {}};
    for (const auto& t : d.tokens) {
      if (counts[t] > min_freq) doc.tokens.push_back(vocab.add(t));
    }
    kept_tokens += doc.tokens.size();
    out.push_back(std::move(doc));
  }
  if (kept_tokens == 0) {
    throw Error(ErrorKind::EmptyCorpus,
                "every document is empty after removing words with count <= " +
                    std::to_string(min_freq));
  }
  Provenance prov;
  prov["min_freq"] = std::to_string(min_freq);
  Corpus corpus(std::move(vocab), std::move(out), std::move(prov));
  corpus.provenance()["empty_documents"] = std::to_string(corpus.empty_documents().size());
  return corpus;
}

/// Rebuilds the corpus with only the words for which `keep(id)` holds.
/// Surviving words keep their relative order.
template <typename Keep>
Corpus retain_words(const Corpus& corpus, Keep&& keep) {
  const Vocabulary& old = corpus.vocabulary();
  constexpr WordId kDropped = std::numeric_limits<WordId>::max();
  std::vector<WordId> remap(old.size(), kDropped);
  Vocabulary vocab;
  for (WordId id = 0; id < old.size(); ++id) {
    if (keep(id)) remap[id] = vocab.add(old.word(id));
  }
  std::vector<Document> docs;
  docs.reserve(corpus.num_documents());
  for (const auto& d : corpus.documents()) {
    Document doc{d.doc_id, d.label, {}};
    doc.tokens.reserve(d.tokens.size());
    for (WordId w : d.tokens) {
      if (remap[w] != kDropped) doc.tokens.push_back(remap[w]);
    }
    docs.push_back(std::move(doc));
  }
  Corpus out(std::move(vocab), std::move(docs), corpus.provenance());
  out.provenance()["empty_documents"] = std::to_string(out.empty_documents().size());
  return out;
}

inline Corpus apply_stoplist(const Corpus& corpus, const StopList& stops) {
  Corpus out = retain_words(corpus, [&](WordId id) {
    return !stops.contains(corpus.vocabulary().word(id));
  });
  out.provenance()["stoplist_size"] = std::to_string(stops.size());
  return out;
}

struct WordCount {
  std::string word;
  std::uint64_t count = 0;
  friend bool operator==(const WordCount&, const WordCount&) = default;
};

/// The n most frequent words; ties by ascending word id.
inline std::vector<WordCount> frequency_report(const Corpus& corpus, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "n must be at least 1");
  const auto counts = corpus.word_counts();
  std::vector<WordId> ids(counts.size());
  for (WordId i = 0; i < ids.size(); ++i) ids[i] = i;
  const std::size_t take = std::min(n, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(take), ids.end(),
                    [&](WordId a, WordId b) {
                      if (counts[a] != counts[b]) return counts[a] > counts[b];
                      return a < b;
                    });
  std::vector<WordCount> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back({corpus.vocabulary().word(ids[i]), counts[ids[i]]});
  }
  return out;
}

struct WordIdf {
  std::string word;
  double idf = 0.0;
};

/// ln(D / d_w) for every word occurring in at least one document, in id
/// order. A word present in every document scores exactly 0.
inline std::vector<WordIdf> idf_report(const Corpus& corpus) {
  const std::size_t num_docs = corpus.num_documents();
  if (num_docs == 0) throw Error(ErrorKind::EmptyCorpus, "no documents");
  std::vector<std::uint64_t> doc_freq(corpus.vocab_size(), 0);
  std::vector<std::size_t> last_seen(corpus.vocab_size(), num_docs);
  for (std::size_t d = 0; d < num_docs; ++d) {
    for (WordId w : corpus.documents()[d].tokens) {
      if (last_seen[w] != d) {
        last_seen[w] = d;
        ++doc_freq[w];
      }
    }
  }
  std::vector<WordIdf> out;
  for (WordId w = 0; w < doc_freq.size(); ++w) {
    if (doc_freq[w] == 0) continue;
    const double idf = doc_freq[w] == num_docs
                           ? 0.0
                           : std::log(static_cast<double>(num_docs) / static_cast<double>(doc_freq[w]));
    out.push_back({corpus.vocabulary().word(w), idf});
  }
  return out;
}

inline constexpr std::uint64_t kNoUpperBound = std::numeric_limits<std::uint64_t>::max();

struct ThresholdResult {
  Corpus corpus;
  std::uint64_t low_types_removed = 0;
  std::uint64_t low_tokens_removed = 0;
  std::uint64_t high_types_removed = 0;
  std::uint64_t high_tokens_removed = 0;
};

/// Drops words with count < low or count > high.
inline ThresholdResult prep_thresholds(const Corpus& corpus, std::uint64_t low,
                                       std::uint64_t high = kNoUpperBound) {
  if (low > high) {
    throw Error(ErrorKind::InvalidBounds,
                "low " + std::to_string(low) + " exceeds high " + std::to_string(high));
  }
  const auto counts = corpus.word_counts();
  ThresholdResult result;
  for (std::uint64_t c : counts) {
    if (c < low) {
      ++result.low_types_removed;
      result.low_tokens_removed += c;
    } else if (c > high) {
      ++result.high_types_removed;
      result.high_tokens_removed += c;
    }
  }
  result.corpus = retain_words(corpus, [&](WordId id) {
    return counts[id] >= low && counts[id] <= high;
  });
  result.corpus.provenance()["low"] = std::to_string(low);
  result.corpus.provenance()["high"] =
      high == kNoUpperBound ? std::string("inf") : std::to_string(high);
  return result;
}

// ---------------------------------------------------------------------------
// Persistence
//
// <stem>.vocab   UTF-8, one word per line, id = line number (0-based)
// <stem>.corpus  binary, little-endian:
//   magic "TSCORPUS", u32 version,
//   u64 vocabulary hash (FNV-1a 64 over "word\n" in id order), u64 V,
//   u32 provenance entries, then (str key, str value) pairs,
//   u64 D, then per document: str doc_id, str label, u64 n, n x u32 ids
// where str = u32 byte length + bytes.

inline constexpr std::string_view kCorpusMagic = "TSCORPUS";
inline constexpr std::uint32_t kCorpusVersion = 1;

struct CorpusPaths {
  std::filesystem::path vocab;
  std::filesystem::path data;

  static CorpusPaths for_stem(const std::filesystem::path& stem) {
    return {std::filesystem::path(stem.string() + ".vocab"),
            std::filesystem::path(stem.string() + ".corpus")};
  }
};

inline void save_corpus(const Corpus& corpus, const CorpusPaths& paths) {
  if (paths.vocab.has_parent_path()) std::filesystem::create_directories(paths.vocab.parent_path());
  if (paths.data.has_parent_path()) std::filesystem::create_directories(paths.data.parent_path());
  {
    std::ofstream out(paths.vocab, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + paths.vocab.string());
    for (const auto& w : corpus.vocabulary().words()) out << w << '\n';
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + paths.vocab.string());
  }
  std::ofstream out(paths.data, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + paths.data.string());
  binary::Writer w(out);
  w.bytes(kCorpusMagic);
  w.u32(kCorpusVersion);
  w.u64(corpus.vocabulary().hash());
  w.u64(corpus.vocab_size());
  w.u32(static_cast<std::uint32_t>(corpus.provenance().size()));
  for (const auto& [k, v] : corpus.provenance()) {
    w.str(k);
    w.str(v);
  }
  w.u64(corpus.num_documents());
  for (const auto& d : corpus.documents()) {
    w.str(d.doc_id);
    w.str(d.label);
    w.u64(d.tokens.size());
    for (WordId id : d.tokens) w.u32(id);
  }
  if (!w.ok()) throw Error(ErrorKind::IoError, "cannot write " + paths.data.string());
}

inline Corpus load_corpus(const CorpusPaths& paths) {
  Vocabulary vocab;
  {
    const std::string raw = detail::read_text_file(paths.vocab);
    if (!utf8::is_valid(raw)) {
      throw Error(ErrorKind::EncodingError, paths.vocab.string() + " is not valid UTF-8");
    }
    std::size_t start = 0;
    while (start < raw.size()) {
      std::size_t end = raw.find('\n', start);
      if (end == std::string::npos) end = raw.size();
      vocab.add(raw.substr(start, end - start));
      start = end + 1;
    }
  }
  std::ifstream in(paths.data, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + paths.data.string());
  binary::Reader r(in, paths.data.string());
  if (r.bytes(kCorpusMagic.size()) != kCorpusMagic) {
    throw Error(ErrorKind::FormatError, paths.data.string() + ": not a corpus file");
  }
  if (const auto version = r.u32(); version != kCorpusVersion) {
    throw Error(ErrorKind::FormatError,
                paths.data.string() + ": unsupported version " + std::to_string(version));
  }
  const std::uint64_t hash = r.u64();
  const std::uint64_t vocab_size = r.u64();
  if (vocab_size != vocab.size() || hash != vocab.hash()) {
    throw Error(ErrorKind::VocabularyMismatch,
                paths.vocab.string() + " does not match " + paths.data.string());
  }
  Provenance prov;
  const std::uint32_t entries = r.u32();
  for (std::uint32_t i = 0; i < entries; ++i) {
    std::string k = r.str();
    prov[k] = r.str();
  }
  const std::uint64_t num_docs = r.count(std::uint64_t{1} << 32);
  std::vector<Document> docs;
  docs.reserve(num_docs);
  for (std::uint64_t i = 0; i < num_docs; ++i) {
    Document d;
    d.doc_id = r.str();
    d.label = r.str();
    const std::uint64_t n = r.count(std::uint64_t{1} << 40);
    d.tokens.resize(n);
    for (auto& id : d.tokens) {
      id = r.u32();
      if (id >= vocab_size) throw Error(ErrorKind::FormatError, paths.data.string() + ": token id out of range");
    }
    docs.push_back(std::move(d));
  }
  if (!r.at_end()) throw Error(ErrorKind::FormatError, paths.data.string() + ": trailing bytes");
  return Corpus(std::move(vocab), std::move(docs), std::move(prov));
}

}  // namespace topicshelf
