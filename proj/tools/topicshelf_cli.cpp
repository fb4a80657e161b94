// topicshelf: command-line driver for the corpus -> model -> browser pipeline.
//
//   topicshelf ingest <src> <dst>
//   topicshelf init <dir> [--tokenizer ltc|plain] [--freq N]
//   topicshelf prep <config> [--stopword-file F] [--low N] [--high N]
//   topicshelf train <config> -k K... --iter N [--seed S]
//   topicshelf serve <config> [--fulltext] [--port P]      (alias: launch)
//   topicshelf report freq|idf <config>

#include <unistd.h>

#include <csignal>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "topicshelf/corpus.hpp"
#include "topicshelf/error.hpp"
#include "topicshelf/ingest.hpp"
#include "topicshelf/project.hpp"
#include "topicshelf/server.hpp"

#ifndef TOPICSHELF_DATA_DIR
#define TOPICSHELF_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace topicshelf;

namespace {

const fs::path kDataDir{TOPICSHELF_DATA_DIR};

std::optional<fs::path> default_data_file(const char* name) {
  fs::path p = kDataDir / name;
  if (fs::exists(p)) return p;
  return std::nullopt;
}

std::vector<std::string> read_word_list(const fs::path& path) {
  std::vector<std::string> words;
  topicshelf::detail::for_each_line(topicshelf::detail::read_text_file(path),
                                    [&](std::string_view line) {
                                      auto w = topicshelf::detail::trim(line);
                                      if (!w.empty() && w.front() != '#') words.emplace_back(w);
                                    });
  return words;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  fs::path src, dst;
  std::optional<fs::path> review;
  std::string selector{ingest::kDefaultSelector};
  std::optional<std::string> encoding;
  std::optional<fs::path> t2s;
  std::optional<fs::path> modern_words;
  std::vector<std::string> exclude;
  std::optional<fs::path> report;
  unsigned workers = 0;
};

int run_ingest(const IngestArgs& a) {
  ingest::IngestOptions options;
  options.selector = a.selector;
  options.encoding_hint = a.encoding;
  options.exclude_prefixes = a.exclude;
  options.workers = a.workers;
  if (a.modern_words) options.filter.modern_markers = read_word_list(*a.modern_words);

  const auto t2s_path = a.t2s ? a.t2s : default_data_file("t2s.tsv");
  if (!t2s_path) throw Error(ErrorKind::IoError, "no traditional-simplified table; pass --t2s");
  const auto t2s = ingest::SimplifiedMap::load(*t2s_path);

  const fs::path review = a.review.value_or(a.dst.parent_path() / (a.dst.filename().string() + "-review"));
  const auto report = ingest::ingest_directory(a.src, a.dst, review, options, t2s);
  const fs::path report_path = a.report.value_or(a.dst.parent_path() / (a.dst.filename().string() + "-ingest.jsonl"));
  ingest::write_report(report, report_path);

  fmt::print("kept {}  flagged {}  dropped {}  excluded {}  errors {}\n", report.count("kept"),
             report.count("flagged"), report.count("dropped"), report.count("excluded"),
             report.count("error"));
  if (report.count("flagged")) fmt::print("flagged documents written to {}\n", review.string());
  fmt::print("report: {}\n", report_path.string());
  return 0;
}

// ---------------------------------------------------------------------------

struct InitArgs {
  fs::path dir;
  std::string tokenizer = "ltc";
  std::uint64_t freq = kDefaultMinFreq;
  std::optional<fs::path> lexicon, char_freq, out;
  std::optional<std::string> name;
};

int run_init(const InitArgs& a) {
  project::InitOptions options;
  options.corpus_dir = a.dir;
  options.tokenizer = project::parse_tokenizer(a.tokenizer);
  options.min_freq = a.freq;
  options.name = a.name;
  if (a.out) options.out_dir = *a.out;
  if (options.tokenizer == project::Tokenizer::Ltc) {
    options.lexicon = a.lexicon ? a.lexicon : default_data_file("ancient_words.dic");
    options.char_freq = a.char_freq ? a.char_freq : default_data_file("chars.tsv");
  }
  const auto result = project::cmd_init(options);
  fmt::print("{} documents, {} types, {} tokens\n", result.documents, result.vocab_size, result.tokens);
  if (!result.empty_documents.empty()) {
    fmt::print("{} documents have no tokens after filtering\n", result.empty_documents.size());
  }
  fmt::print("config: {}\n", result.config_path.string());
  return 0;
}

// ---------------------------------------------------------------------------

struct PrepArgs {
  fs::path config;
  std::optional<fs::path> stopwords;
  std::optional<std::uint64_t> low, high;
  std::size_t show = 50;
};

std::optional<std::uint64_t> prompt_bound(const char* what, std::optional<std::uint64_t> fallback) {
  const std::string shown = fallback ? std::to_string(*fallback) : "none";
  fmt::print("{} [{}]: ", what, shown);
  std::fflush(stdout);
  std::string line;
  if (!std::getline(std::cin, line)) return fallback;
  const auto t = topicshelf::detail::trim(line);
  if (t.empty()) return fallback;
  if (t == "none" || t == "inf") return std::nullopt;
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size()) {
    throw Error(ErrorKind::InvalidArgument, "not a count: " + std::string(t));
  }
  return v;
}

int run_prep(PrepArgs a) {
  if ((!a.low || !a.high) && ::isatty(STDIN_FILENO)) {
    const auto config = project::ProjectConfig::load(a.config);
    Corpus corpus = project::load_raw_corpus(config);
    if (a.stopwords) corpus = apply_stoplist(corpus, StopList::load(*a.stopwords));
    fmt::print("most frequent words after the stoplist:\n");
    std::size_t rank = 0;
    for (const auto& wc : frequency_report(corpus, a.show)) {
      fmt::print("{:>5}  {}  {}\n", ++rank, wc.word, wc.count);
    }
    fmt::print("words occurring fewer than `low` times and more than `high` times are removed\n");
    if (!a.low) a.low = prompt_bound("low", 0).value_or(0);
    if (!a.high) a.high = prompt_bound("high", std::nullopt).value_or(kNoUpperBound);
  }
  project::PrepOptions options;
  options.config = a.config;
  options.stopword_file = a.stopwords;
  options.low = a.low.value_or(0);
  options.high = a.high.value_or(kNoUpperBound);
  const auto r = project::cmd_prep(options);
  fmt::print("stoplist: -{} types, -{} tokens\n", r.stop_types_removed, r.stop_tokens_removed);
  fmt::print("low:      -{} types, -{} tokens\n", r.thresholds.low_types_removed,
             r.thresholds.low_tokens_removed);
  fmt::print("high:     -{} types, -{} tokens\n", r.thresholds.high_types_removed,
             r.thresholds.high_tokens_removed);
  fmt::print("remaining {} types, {} tokens\n", r.thresholds.corpus.vocab_size(),
             r.thresholds.corpus.total_tokens());
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  fs::path config;
  std::vector<std::size_t> ks;
  std::size_t iterations = 1000;
  std::uint64_t seed = 0;
  std::optional<double> alpha;
  double beta = lda::kDefaultBeta;
  std::size_t clusters = topicmap::LayoutOptions{}.clusters;
  std::size_t neighbors = topicmap::LayoutOptions{}.n_neighbors;
  std::string space = "embedding";
};

int run_train(const TrainArgs& a) {
  project::TrainOptions options;
  options.config = a.config;
  options.ks = a.ks;
  options.iterations = a.iterations;
  options.seed = a.seed;
  options.alpha = a.alpha;
  options.beta = a.beta;
  options.layout.clusters = a.clusters;
  options.layout.n_neighbors = a.neighbors;
  options.layout.seed = a.seed;
  options.layout.space = topicmap::parse_cluster_space(a.space);
  const auto r = project::cmd_train(options);
  for (const auto& [k, seconds] : r.seconds) fmt::print("K={:<4} {:8.2f} s\n", k, seconds);
  for (const auto& w : r.warnings) fmt::print(stderr, "warning: {}\n", w);
  fmt::print("layout: {}\n", r.layout_file.string());
  return 0;
}

// ---------------------------------------------------------------------------

struct ServeArgs {
  fs::path config;
  bool fulltext = false;
  std::optional<int> port;
  std::optional<std::string> host;
  std::vector<std::size_t> ks;
  std::optional<fs::path> static_dir;
};

int run_serve(const ServeArgs& a) {
  server::ServiceConfig config;
  config.config_path = a.config;
  config.fulltext_enabled = a.fulltext;
  config.ks = a.ks;
  server::apply_env_overrides(config);
  if (a.host) config.host = *a.host;
  if (a.port) config.port = *a.port;
  if (a.static_dir) {
    config.static_dir = a.static_dir;
  } else if (auto www = default_data_file("www"); www && fs::is_directory(*www)) {
    config.static_dir = www;
  }

  // Block termination signals before any thread starts so only the waiter sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  auto srv = server::make_server(config);
  const int port = srv->bind(config.host, config.port);
  fmt::print("serving {} models on http://{}:{}/\n", srv->service().project().suite.models.size(),
             config.host, port);
  std::fflush(stdout);

  std::jthread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    srv->stop();
  });
  srv->run();
  // stop() may also come from elsewhere; wake the waiter if it is still blocked.
  pthread_kill(waiter.native_handle(), SIGTERM);
  return 0;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  fs::path config;
  std::size_t n = 100;
  bool raw = false;
};

Corpus report_corpus(const ReportArgs& a) {
  const auto config = project::ProjectConfig::load(a.config);
  if (a.raw || !config.get("prep.corpus")) return project::load_raw_corpus(config);
  return load_corpus(project::prepped_corpus_paths(config));
}

int run_report_freq(const ReportArgs& a) {
  std::size_t rank = 0;
  for (const auto& wc : frequency_report(report_corpus(a), a.n)) {
    fmt::print("{}\t{}\t{}\n", ++rank, wc.word, wc.count);
  }
  return 0;
}

int run_report_idf(const ReportArgs& a) {
  auto rows = idf_report(report_corpus(a));
  std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return x.idf < y.idf; });
  if (rows.size() > a.n) rows.resize(a.n);
  for (const auto& r : rows) fmt::print("{}\t{:.6f}\n", r.word, r.idf);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"topicshelf: topic models for browsing a text corpus"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "topicshelf 0.1.0");

  IngestArgs ia;
  auto* ingest_cmd = app.add_subcommand("ingest", "Extract, simplify and screen raw pages into plain text");
  ingest_cmd->add_option("src", ia.src, "Directory of saved pages")->required()->check(CLI::ExistingDirectory);
  ingest_cmd->add_option("dst", ia.dst, "Output directory for kept texts")->required();
  ingest_cmd->add_option("--review", ia.review, "Directory for flagged texts (default <dst>-review)");
  ingest_cmd->add_option("--selector", ia.selector, "Container selector (tag, .class, #id)");
  ingest_cmd->add_option("--encoding", ia.encoding, "Source encoding, overriding detection");
  ingest_cmd->add_option("--t2s", ia.t2s, "Traditional-to-simplified table")->check(CLI::ExistingFile);
  ingest_cmd->add_option("--modern-words", ia.modern_words, "Word list marking modern texts")->check(CLI::ExistingFile);
  ingest_cmd->add_option("--exclude", ia.exclude, "Relative path prefix to skip (repeatable)");
  ingest_cmd->add_option("--report", ia.report, "Where to write the JSONL report");
  ingest_cmd->add_option("--workers", ia.workers, "Worker threads (0: all cores)");

  InitArgs init;
  auto* init_cmd = app.add_subcommand("init", "Segment a directory of texts and build the corpus");
  init_cmd->add_option("dir", init.dir, "Corpus directory")->required();
  init_cmd->add_option("--tokenizer", init.tokenizer, "ltc (dictionary segmentation) or plain (whitespace)")
      ->check(CLI::IsMember({"ltc", "plain"}));
  init_cmd->add_option("--freq", init.freq, "Drop words occurring this many times or fewer");
  init_cmd->add_option("--lexicon", init.lexicon, "Word list for the ltc tokenizer")->check(CLI::ExistingFile);
  init_cmd->add_option("--char-freq", init.char_freq, "Character frequencies for the ltc tokenizer")
      ->check(CLI::ExistingFile);
  init_cmd->add_option("--name", init.name, "Corpus name (default: directory name)");
  init_cmd->add_option("--out", init.out, "Where to write the config and models (default: .)");

  PrepArgs prep;
  auto* prep_cmd = app.add_subcommand("prep", "Apply a stoplist and frequency bounds");
  prep_cmd->add_option("config", prep.config, "Config file written by init")->required()->check(CLI::ExistingFile);
  prep_cmd->add_option("--stopword-file", prep.stopwords, "One stopword per line")->check(CLI::ExistingFile);
  prep_cmd->add_option("--low", prep.low, "Remove words occurring fewer times than this");
  prep_cmd->add_option("--high", prep.high, "Remove words occurring more times than this");
  prep_cmd->add_option("--show", prep.show, "Words listed before the interactive prompt");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train one topic model per K and lay out the topic map");
  train_cmd->add_option("config", train.config, "Config file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("-k", train.ks, "Numbers of topics")->required()->expected(1, -1)
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--iter", train.iterations, "Gibbs sweeps")->required();
  train_cmd->add_option("--seed", train.seed, "Random seed");
  train_cmd->add_option("--alpha", train.alpha, "Document-topic prior (default 50/K)");
  train_cmd->add_option("--beta", train.beta, "Topic-word prior");
  train_cmd->add_option("--clusters", train.clusters, "Topic map clusters");
  train_cmd->add_option("--neighbors", train.neighbors, "Isomap neighbors");
  train_cmd->add_option("--cluster-space", train.space, "embedding or distribution")
      ->check(CLI::IsMember({"embedding", "distribution"}));

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the browsing API and UI");
  serve_cmd->alias("launch");
  serve_cmd->add_option("config", serve.config, "Config file")->required()->check(CLI::ExistingFile);
  serve_cmd->add_flag("--fulltext", serve.fulltext, "Expose document texts");
  serve_cmd->add_option("--port", serve.port, fmt::format("Port (default {})", server::kDefaultPort))
      ->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", serve.host, fmt::format("Host (default {})", server::kDefaultHost));
  serve_cmd->add_option("-k", serve.ks, "Load only these models")->expected(1, -1);
  serve_cmd->add_option("--static", serve.static_dir, "UI bundle directory")->check(CLI::ExistingDirectory);

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Corpus statistics");
  report_cmd->require_subcommand(1);
  auto* freq_cmd = report_cmd->add_subcommand("freq", "Most frequent words");
  auto* idf_cmd = report_cmd->add_subcommand("idf", "Words with the lowest inverse document frequency");
  for (auto* c : {freq_cmd, idf_cmd}) {
    c->add_option("config", report.config, "Config file")->required()->check(CLI::ExistingFile);
    c->add_option("-n", report.n, "Rows")->check(CLI::PositiveNumber);
    c->add_flag("--raw", report.raw, "Use the corpus before prep");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*ingest_cmd) return run_ingest(ia);
    if (*init_cmd) return run_init(init);
    if (*prep_cmd) return run_prep(prep);
    if (*train_cmd) return run_train(train);
    if (*serve_cmd) return run_serve(serve);
    if (*freq_cmd) return run_report_freq(report);
    if (*idf_cmd) return run_report_idf(report);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: IoError: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
