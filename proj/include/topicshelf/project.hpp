#pragma once

// The init -> prep -> train pipeline and the `.ini` project file that
// records every step's effective settings.
//
// Layout on disk, relative to the directory holding <name>.ini:
//   models/<name>.raw.{vocab,corpus}    corpus as built by init
//   models/<name>.{vocab,corpus}        corpus after prep
//   models/<name>-k<K>.lda              one trained model per K
//   models/<name>.layout.jsonl          topic map cache

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "topicshelf/corpus.hpp"
#include "topicshelf/error.hpp"
#include "topicshelf/ingest.hpp"
#include "topicshelf/lda.hpp"
#include "topicshelf/segment.hpp"
#include "topicshelf/topicmap.hpp"

namespace topicshelf::project {

namespace fs = std::filesystem;

/// Thin wrapper over a property tree persisted as an INI file.
class ProjectConfig {
 public:
  static ProjectConfig load(const fs::path& path) {
    if (!fs::exists(path)) throw Error(ErrorKind::ConfigMissing, path.string() + " does not exist");
    ProjectConfig c;
    c.path_ = fs::absolute(path);
    try {
      boost::property_tree::ini_parser::read_ini(c.path_.string(), c.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw Error(ErrorKind::FormatError, e.what());
    }
    return c;
  }

  explicit ProjectConfig(fs::path path = {}) : path_(path.empty() ? path : fs::absolute(path)) {}

  void save() const {
    try {
      boost::property_tree::ini_parser::write_ini(path_.string(), tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw Error(ErrorKind::IoError, e.what());
    }
  }

  const fs::path& path() const noexcept { return path_; }
  fs::path dir() const { return path_.parent_path(); }

  std::optional<std::string> get(const std::string& key) const {
    if (auto v = tree_.get_optional<std::string>(key)) return *v;
    return std::nullopt;
  }
  std::string require(const std::string& key) const {
    if (auto v = get(key)) return *v;
    throw Error(ErrorKind::ConfigMissing, path_.string() + " has no " + key);
  }
  void set(const std::string& key, const std::string& value) { tree_.put(key, value); }
  bool has_section(const std::string& name) const { return tree_.get_child_optional(name).has_value(); }
  void erase_section(const std::string& name) { tree_.erase(name); }

  /// Paths are stored relative to the config file's directory when possible.
  fs::path resolve(const std::string& stored) const {
    fs::path p(stored);
    return p.is_absolute() ? p : dir() / p;
  }
  std::string store(const fs::path& p) const {
    return fs::proximate(fs::absolute(p), dir()).generic_string();
  }

 private:
  fs::path path_;
  boost::property_tree::ptree tree_;
};

inline fs::path models_dir(const ProjectConfig& c) { return c.resolve(c.require("main.models_dir")); }
inline std::string corpus_name(const ProjectConfig& c) { return c.require("main.corpus_name"); }

inline CorpusPaths raw_corpus_paths(const ProjectConfig& c) {
  return CorpusPaths::for_stem(models_dir(c) / (corpus_name(c) + ".raw"));
}
inline CorpusPaths prepped_corpus_paths(const ProjectConfig& c) {
  return CorpusPaths::for_stem(models_dir(c) / corpus_name(c));
}
inline fs::path model_path(const ProjectConfig& c, std::size_t k) {
  return models_dir(c) / (corpus_name(c) + "-k" + std::to_string(k) + ".lda");
}
inline fs::path layout_path(const ProjectConfig& c) {
  return models_dir(c) / (corpus_name(c) + ".layout.jsonl");
}

template <typename T>
std::string join(const std::vector<T>& items, const char* sep = " ") {
  std::ostringstream out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out << sep;
    out << items[i];
  }
  return out.str();
}

/// Topic counts separated by spaces or commas.
inline std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> ks;
  std::string spaced = text;
  std::replace(spaced.begin(), spaced.end(), ',', ' ');
  std::istringstream in(spaced);
  std::string item;
  while (in >> item) {
    std::size_t k = 0;
    const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), k);
    if (ec != std::errc() || end != item.data() + item.size() || k == 0) {
      throw Error(ErrorKind::FormatError, "bad topic count '" + item + "'");
    }
    ks.push_back(k);
  }
  return ks;
}

// ---------------------------------------------------------------------------
// init

enum class Tokenizer { Ltc, Plain };

inline Tokenizer parse_tokenizer(std::string_view name) {
  if (name == "ltc") return Tokenizer::Ltc;
  if (name == "plain") return Tokenizer::Plain;
  throw Error(ErrorKind::InvalidArgument, "unknown tokenizer '" + std::string(name) + "'");
}

struct InitOptions {
  fs::path corpus_dir;
  Tokenizer tokenizer = Tokenizer::Ltc;
  std::uint64_t min_freq = kDefaultMinFreq;
  std::optional<fs::path> lexicon;    // required for Ltc
  std::optional<fs::path> char_freq;  // optional mmseg rule-4 data
  std::optional<std::string> name;    // default: corpus directory name
  fs::path out_dir = ".";
};

struct InitResult {
  fs::path config_path;
  std::size_t documents = 0;
  std::size_t vocab_size = 0;
  std::uint64_t tokens = 0;
  std::vector<std::string> empty_documents;
};

/// Relative paths (generic form) of the .txt files under `dir`, sorted.
inline std::vector<fs::path> list_text_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && ingest::detail::lower_ascii(entry.path().extension().string()) == ".txt") {
      files.push_back(fs::relative(entry.path(), dir));
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

inline InitResult cmd_init(const InitOptions& options) {
  if (!fs::is_directory(options.corpus_dir)) {
    throw Error(ErrorKind::IoError, options.corpus_dir.string() + " is not a directory");
  }
  const fs::path corpus_dir = fs::canonical(options.corpus_dir);
  const auto files = list_text_files(corpus_dir);
  if (files.empty()) throw Error(ErrorKind::NoDocuments, "no .txt files under " + corpus_dir.string());

  Lexicon lexicon;
  if (options.tokenizer == Tokenizer::Ltc) {
    if (!options.lexicon) throw Error(ErrorKind::InvalidArgument, "the ltc tokenizer needs a lexicon");
    lexicon = load_lexicon(*options.lexicon);
    if (options.char_freq) lexicon.set_char_freq(load_char_freq(*options.char_freq));
  }

  std::vector<TokenSequence> docs;
  docs.reserve(files.size());
  for (const auto& rel : files) {
    ingest::RawDocument raw{corpus_dir / rel, detail::read_text_file(corpus_dir / rel), std::nullopt};
    const std::string text = ingest::decode_payload(raw);
    TokenSequence seq{rel.generic_string(), {}};
    seq.tokens = options.tokenizer == Tokenizer::Ltc ? segment(text, lexicon) : split_whitespace(text);
    docs.push_back(std::move(seq));
  }

  Corpus corpus = build_corpus(docs, options.min_freq);
  const std::string name = options.name.value_or(corpus_dir.filename().string());
  fs::create_directories(options.out_dir);
  ProjectConfig config(options.out_dir / (name + ".ini"));
  config.set("main.corpus_name", name);
  config.set("main.corpus_location", corpus_dir.string());
  config.set("main.models_dir", "models");
  config.set("init.tokenizer", options.tokenizer == Tokenizer::Ltc ? "ltc" : "plain");
  config.set("init.freq", std::to_string(options.min_freq));
  if (options.lexicon) {
    config.set("init.lexicon", fs::absolute(*options.lexicon).string());
    config.set("init.lexicon_entries", std::to_string(lexicon.size()));
  }
  if (options.char_freq) config.set("init.char_freq", fs::absolute(*options.char_freq).string());
  config.set("init.documents", std::to_string(corpus.num_documents()));
  config.set("init.types", std::to_string(corpus.vocab_size()));
  config.set("init.tokens", std::to_string(corpus.total_tokens()));
  // a fresh init invalidates downstream steps
  config.erase_section("prep");
  config.erase_section("train");

  corpus.provenance()["tokenizer"] = config.require("init.tokenizer");
  const auto paths = raw_corpus_paths(config);
  save_corpus(corpus, paths);
  config.set("init.corpus", config.store(paths.data));
  config.set("init.vocab", config.store(paths.vocab));
  config.save();

  return {config.path(), corpus.num_documents(), corpus.vocab_size(), corpus.total_tokens(),
          corpus.empty_documents()};
}

// ---------------------------------------------------------------------------
// prep

struct PrepOptions {
  fs::path config;
  std::optional<fs::path> stopword_file;
  std::uint64_t low = 0;
  std::uint64_t high = kNoUpperBound;
};

struct PrepResult {
  std::uint64_t stop_types_removed = 0;
  std::uint64_t stop_tokens_removed = 0;
  ThresholdResult thresholds;
};

inline Corpus load_raw_corpus(const ProjectConfig& config) {
  if (!config.get("init.corpus")) {
    throw Error(ErrorKind::PipelineOrder, "run init before prep");
  }
  return load_corpus(raw_corpus_paths(config));
}

/// Always starts from the corpus written by init, so repeating prep with
/// the same arguments gives the same corpus.
inline PrepResult cmd_prep(const PrepOptions& options) {
  ProjectConfig config = ProjectConfig::load(options.config);
  const Corpus raw = load_raw_corpus(config);
  PrepResult result;
  Corpus stopped = raw;
  if (options.stopword_file) {
    const StopList stops = StopList::load(*options.stopword_file);
    stopped = apply_stoplist(raw, stops);
    result.stop_types_removed = raw.vocab_size() - stopped.vocab_size();
    result.stop_tokens_removed = raw.total_tokens() - stopped.total_tokens();
  }
  result.thresholds = prep_thresholds(stopped, options.low, options.high);
  const Corpus& prepped = result.thresholds.corpus;
  save_corpus(prepped, prepped_corpus_paths(config));

  config.erase_section("prep");
  config.erase_section("train");
  config.set("prep.stopword_file",
             options.stopword_file ? fs::absolute(*options.stopword_file).string() : std::string());
  config.set("prep.low", std::to_string(options.low));
  config.set("prep.high", options.high == kNoUpperBound ? "inf" : std::to_string(options.high));
  config.set("prep.stop_types_removed", std::to_string(result.stop_types_removed));
  config.set("prep.stop_tokens_removed", std::to_string(result.stop_tokens_removed));
  config.set("prep.low_types_removed", std::to_string(result.thresholds.low_types_removed));
  config.set("prep.low_tokens_removed", std::to_string(result.thresholds.low_tokens_removed));
  config.set("prep.high_types_removed", std::to_string(result.thresholds.high_types_removed));
  config.set("prep.high_tokens_removed", std::to_string(result.thresholds.high_tokens_removed));
  config.set("prep.types", std::to_string(prepped.vocab_size()));
  config.set("prep.tokens", std::to_string(prepped.total_tokens()));
  config.set("prep.corpus", config.store(prepped_corpus_paths(config).data));
  config.set("prep.vocab", config.store(prepped_corpus_paths(config).vocab));
  config.save();
  return result;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  fs::path config;
  std::vector<std::size_t> ks;
  std::size_t iterations = 1000;
  std::uint64_t seed = 0;
  std::optional<double> alpha;
  double beta = lda::kDefaultBeta;
  topicmap::LayoutOptions layout;
};

struct TrainResult {
  std::map<std::size_t, double> seconds;  // wall time per K
  std::vector<fs::path> model_files;
  fs::path layout_file;
  std::vector<std::string> warnings;
};

inline std::shared_ptr<const Corpus> load_prepped_corpus(const ProjectConfig& config) {
  if (!config.get("prep.corpus")) throw Error(ErrorKind::PipelineOrder, "run prep before train");
  return std::make_shared<const Corpus>(load_corpus(prepped_corpus_paths(config)));
}

inline TrainResult cmd_train(const TrainOptions& options) {
  ProjectConfig config = ProjectConfig::load(options.config);
  auto corpus = load_prepped_corpus(config);
  if (options.ks.empty()) throw Error(ErrorKind::InvalidArgument, "give at least one K");

  TrainResult result;
  std::mutex mu;
  lda::SuiteOptions suite_options;
  suite_options.iterations = options.iterations;
  suite_options.seed = options.seed;
  suite_options.alpha = options.alpha;
  suite_options.beta = options.beta;
  suite_options.on_model = [&](std::size_t k, double seconds) {
    std::lock_guard lock(mu);
    result.seconds[k] = seconds;
  };
  const lda::ModelSuite suite = lda::train_suite(corpus, options.ks, suite_options);

  config.erase_section("train");
  for (const auto& [k, model] : suite.models) {
    const fs::path path = model_path(config, k);
    lda::save_model(model, path);
    result.model_files.push_back(path);
    config.set("train.model_k" + std::to_string(k), config.store(path));
  }
  const topicmap::TopicMapLayout layout = topicmap::build_layout(suite, options.layout);
  result.layout_file = layout_path(config);
  topicmap::save_layout(layout, result.layout_file);
  result.warnings = layout.warnings;

  config.set("train.ks", join(suite.ks()));
  config.set("train.iterations", std::to_string(options.iterations));
  config.set("train.seed", std::to_string(options.seed));
  config.set("train.alpha", options.alpha ? std::to_string(*options.alpha) : "50/K");
  config.set("train.beta", std::to_string(options.beta));
  config.set("train.rng", std::string(lda::kRngName));
  config.set("train.layout", config.store(result.layout_file));
  config.set("train.layout_n_neighbors", std::to_string(options.layout.n_neighbors));
  config.set("train.layout_clusters", std::to_string(layout.options.clusters));
  config.set("train.layout_space", topicmap::to_string(options.layout.space));
  config.save();
  return result;
}

// ---------------------------------------------------------------------------
// loading a trained project

struct LoadedProject {
  ProjectConfig config;
  fs::path corpus_location;
  std::shared_ptr<const Corpus> corpus;
  lda::ModelSuite suite;
  topicmap::TopicMapLayout layout;
  std::optional<Lexicon> lexicon;  // the init lexicon, for segmenting queries
};

inline std::optional<Lexicon> project_lexicon(const ProjectConfig& config) {
  const auto tokenizer = config.get("init.tokenizer");
  const auto path = config.get("init.lexicon");
  if (!tokenizer || *tokenizer != "ltc" || !path || !fs::exists(*path)) return std::nullopt;
  Lexicon lexicon = load_lexicon(*path);
  if (const auto freq = config.get("init.char_freq"); freq && fs::exists(*freq)) {
    lexicon.set_char_freq(load_char_freq(*freq));
  }
  return lexicon;
}

/// Loads the prepped corpus, the requested models (default: every model
/// listed by train) and the topic map, failing on any vocabulary mismatch.
inline LoadedProject load_project(const fs::path& config_path,
                                  const std::vector<std::size_t>& only_ks = {}) {
  LoadedProject p{ProjectConfig::load(config_path), {}, {}, {}, {}, {}};
  p.corpus_location = p.config.require("main.corpus_location");
  p.corpus = load_prepped_corpus(p.config);
  const auto trained = p.config.get("train.ks");
  if (!trained || parse_ks(*trained).empty()) {
    throw Error(ErrorKind::ModelMissing, "no trained models; run train first");
  }
  std::vector<std::size_t> ks = only_ks.empty() ? parse_ks(*trained) : only_ks;
  const std::uint64_t hash = p.corpus->vocabulary().hash();
  p.suite.corpus = p.corpus;
  for (std::size_t k : ks) {
    const auto stored = p.config.get("train.model_k" + std::to_string(k));
    const fs::path path = stored ? p.config.resolve(*stored) : model_path(p.config, k);
    if (!fs::exists(path)) {
      throw Error(ErrorKind::ModelMissing, "model for K=" + std::to_string(k) + " not found at " +
                                               path.string() + "; run train first");
    }
    lda::TopicModel model = lda::load_model(path, hash);
    if (model.num_documents() != p.corpus->num_documents() ||
        model.vocab_size() != p.corpus->vocab_size()) {
      throw Error(ErrorKind::VocabularyMismatch, path.string() + " does not fit the corpus");
    }
    p.suite.models.emplace(k, std::move(model));
  }
  const fs::path layout_file = layout_path(p.config);
  bool cached = false;
  if (only_ks.empty() && fs::exists(layout_file)) {
    p.layout = topicmap::load_layout(layout_file);
    cached = p.layout.vocab_hash == hash &&
             p.layout.points.size() == topicmap::pooled_topics(p.suite).size();
  }
  if (!cached) p.layout = topicmap::build_layout(p.suite);
  p.lexicon = project_lexicon(p.config);
  return p;
}

}  // namespace topicshelf::project
