#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "topicshelf/corpus.hpp"
#include "topicshelf/lda.hpp"
#include "topicshelf/segment.hpp"

#ifndef TOPICSHELF_DATA_DIR
#error "TOPICSHELF_DATA_DIR must point at the bundled data directory"
#endif

namespace fixtures {

namespace fs = std::filesystem;

inline fs::path data_dir() { return fs::path(TOPICSHELF_DATA_DIR); }
inline fs::path mini_corpus_dir() { return data_dir() / "mini-corpus"; }
inline fs::path ingest_fixture_dir() { return data_dir() / "ingest-fixture"; }

/// A fresh directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "ts") {
    std::random_device rd;
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = fs::temp_directory_path() / (tag + "-" + std::to_string(stamp) + "-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Segments the bundled mini-corpus the way `init` does and builds the
/// corpus with the default cutoff.
inline topicshelf::Corpus mini_corpus() {
  const auto lexicon = [] {
    auto lex = topicshelf::load_lexicon(data_dir() / "ancient_words.dic");
    lex.set_char_freq(topicshelf::load_char_freq(data_dir() / "chars.tsv"));
    return lex;
  }();
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(mini_corpus_dir())) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), mini_corpus_dir()));
  }
  std::sort(files.begin(), files.end());
  std::vector<topicshelf::TokenSequence> docs;
  for (const auto& rel : files) {
    docs.push_back(topicshelf::segment_document(rel.generic_string(),
                                                read_file(mini_corpus_dir() / rel), lexicon));
  }
  return topicshelf::build_corpus(docs);
}

/// Corpus from pre-tokenized documents named d000, d001, ...
inline topicshelf::Corpus corpus_from_tokens(const std::vector<std::vector<std::string>>& docs,
                                             std::uint64_t min_freq = 0) {
  std::vector<topicshelf::TokenSequence> seqs;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    char id[24];
    std::snprintf(id, sizeof id, "d%03zu", i);
    seqs.push_back({id, docs[i]});
  }
  return topicshelf::build_corpus(seqs, min_freq);
}

/// Two topics over four words and three documents with hand-set phi and
/// theta. Words: 阴 阳 兵 战. Documents: 医/甲, 兵/乙, 杂/丙.
struct TermSearchFixture {
  topicshelf::Corpus corpus;
  topicshelf::lda::TopicModel model;
};

inline TermSearchFixture term_search_fixture() {
  using namespace topicshelf;
  std::vector<TokenSequence> docs = {
      {"医/甲.txt", {"阴", "阳", "阴", "阳", "兵", "战"}},
      {"兵/乙.txt", {"兵", "战", "兵", "战", "阴", "阳"}},
      {"杂/丙.txt", {"阴", "阳", "兵", "战"}},
  };
  Corpus corpus = build_corpus(docs, 0);
  lda::TrainConfig config = lda::TrainConfig::with_defaults(2, 1, 0);
  std::vector<double> phi = {0.4, 0.4, 0.1, 0.1, 0.05, 0.05, 0.45, 0.45};
  std::vector<double> theta = {0.9, 0.1, 0.2, 0.8, 0.5, 0.5};
  std::vector<std::vector<std::uint32_t>> z(3);
  lda::TopicModel model(config, corpus.vocabulary().hash(), 4, phi, theta, z);
  return {std::move(corpus), std::move(model)};
}

}  // namespace fixtures
