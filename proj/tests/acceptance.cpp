// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "topicshelf/corpus.hpp"
#include "topicshelf/explore.hpp"
#include "topicshelf/lda.hpp"
#include "topicshelf/metrics.hpp"
#include "topicshelf/segment.hpp"
#include "topicshelf/topicmap.hpp"

extern char** environ;

using namespace topicshelf;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  bool skipped = false;
};

/// Collects failures; the first few are kept for the report line.
class Check {
 public:
  void fail(const std::string& what) {
    ++failures_;
    if (failures_ <= 3) messages_.push_back(what);
  }
  void expect(bool ok, const std::string& what) {
    if (!ok) fail(what);
  }
  Outcome outcome(std::string detail) const {
    if (failures_ == 0) return {true, std::move(detail)};
    std::string msg = std::to_string(failures_) + " failure(s): ";
    for (std::size_t i = 0; i < messages_.size(); ++i) msg += (i ? "; " : "") + messages_[i];
    return {false, msg};
  }

 private:
  std::size_t failures_ = 0;
  std::vector<std::string> messages_;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double row_sum(std::span<const double> row) { return std::accumulate(row.begin(), row.end(), 0.0); }

// ---------------------------------------------------------------------------

Outcome metric_axioms() {
  Check c;
  const auto start = Clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> dim(2, 500);
  for (int i = 0; i < 10000; ++i) {
    const std::size_t n = dim(rng);
    const metrics::Distribution p(gen::random_distribution(rng, n)), q(gen::random_distribution(rng, n));
    const double d = metrics::js_distance(p, q);
    if (!(d >= 0.0 && d <= 1.0)) c.fail(fmt::format("pair {} out of range: {}", i, d));
    if (d != metrics::js_distance(q, p)) c.fail(fmt::format("pair {} not symmetric", i));
  }
  double worst = -1.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = dim(rng);
    const metrics::Distribution p(gen::random_distribution(rng, n)), q(gen::random_distribution(rng, n)),
        r(gen::random_distribution(rng, n));
    const double excess = metrics::js_distance(p, r) - metrics::js_distance(p, q) - metrics::js_distance(q, r);
    worst = std::max(worst, excess);
    if (excess > 1e-9) c.fail(fmt::format("triple {} violates the triangle inequality by {}", i, excess));
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 10.0, fmt::format("took {:.1f} s", elapsed));
  return c.outcome(fmt::format("10000 pairs, 1000 triples, max triangle excess {:.2e}, {:.2f} s", worst, elapsed));
}

Outcome metric_values() {
  Check c;
  const metrics::Distribution p({1.0, 0.0}), q({0.5, 0.5});
  const double jsd = metrics::js_divergence(p, q);
  const double dist = metrics::js_distance(p, q);
  const double sim = metrics::similarity(p, q);
  const double kl = metrics::kl_divergence(p, q);
  c.expect(std::abs(jsd - static_cast<double>(oracle::jsd({1, 0}, {0.5, 0.5}))) <= 1e-12, "divergence vs oracle");
  c.expect(std::abs(dist - static_cast<double>(oracle::js_distance({1, 0}, {0.5, 0.5}))) <= 1e-12,
           "distance vs oracle");
  c.expect(std::abs(sim - (1 - static_cast<double>(oracle::js_distance({1, 0}, {0.5, 0.5})))) <= 1e-12,
           "similarity vs oracle");
  c.expect(std::abs(kl - static_cast<double>(oracle::kl({1, 0}, {0.5, 0.5}))) <= 1e-12, "KL vs oracle");
  // the printed six-decimal values
  c.expect(std::abs(jsd - 0.311278) <= 1e-6, fmt::format("divergence {:.9f}", jsd));
  c.expect(std::abs(dist - 0.557924) <= 1e-6, fmt::format("distance {:.9f}", dist));
  c.expect(std::abs(sim - 0.442076) <= 1e-6, fmt::format("similarity {:.9f}", sim));
  return c.outcome(fmt::format("divergence {:.9f}, distance {:.9f}, similarity {:.9f}", jsd, dist, sim));
}

Outcome sampler_correctness() {
  Check c;
  const Corpus corpus = fixtures::mini_corpus();
  const std::size_t K = 5;
  std::size_t sweeps = 0;
  const auto observer = [&](const lda::GibbsSampler& s) {
    ++sweeps;
    std::vector<std::uint64_t> nk(K, 0);
    std::vector<std::uint64_t> nkw(K * corpus.vocab_size(), 0);
    for (std::size_t d = 0; d < corpus.num_documents(); ++d) {
      std::vector<std::uint64_t> ndk(K, 0);
      const auto& z = s.assignments()[d];
      for (std::size_t i = 0; i < z.size(); ++i) {
        ++ndk[z[i]];
        ++nk[z[i]];
        ++nkw[z[i] * corpus.vocab_size() + corpus.documents()[d].tokens[i]];
      }
      for (std::size_t k = 0; k < K; ++k) {
        if (s.doc_topic_count(d, k) != ndk[k]) c.fail(fmt::format("sweep {} doc {} topic {}", sweeps, d, k));
      }
    }
    std::uint64_t total = 0;
    for (std::size_t k = 0; k < K; ++k) {
      if (s.topic_count(k) != nk[k]) c.fail(fmt::format("sweep {} topic total {}", sweeps, k));
      for (WordId w = 0; w < corpus.vocab_size(); ++w) {
        if (s.topic_word_count(k, w) != nkw[k * corpus.vocab_size() + w]) {
          c.fail(fmt::format("sweep {} topic {} word {}", sweeps, k, w));
        }
      }
      total += s.topic_count(k);
    }
    if (total != corpus.total_tokens()) c.fail(fmt::format("sweep {} token total", sweeps));
  };
  const auto config = lda::TrainConfig::with_defaults(K, 100, 314);
  const auto model = lda::train(corpus, config, observer);
  double worst = 0.0;
  for (std::size_t k = 0; k < K; ++k) worst = std::max(worst, std::abs(row_sum(model.phi_row(k)) - 1.0));
  for (std::size_t d = 0; d < model.num_documents(); ++d) {
    worst = std::max(worst, std::abs(row_sum(model.theta_row(d)) - 1.0));
  }
  c.expect(worst <= 1e-9, fmt::format("row sum off by {}", worst));

  fixtures::TempDir dir("acceptance");
  lda::save_model(model, dir / "a.lda");
  lda::save_model(lda::train(corpus, config), dir / "b.lda");
  c.expect(fixtures::read_file(dir / "a.lda") == fixtures::read_file(dir / "b.lda"), "model files differ");
  return c.outcome(fmt::format("{} sweeps checked, max row-sum error {:.1e}, model files identical", sweeps, worst));
}

Outcome planted_recovery() {
  Check c;
  const auto start = Clock::now();
  const auto planted = oracle::planted_corpus(4, 10, 200, 60, 77);
  const Corpus corpus = fixtures::corpus_from_tokens(planted.docs);
  c.expect(corpus.vocab_size() == 40, "vocabulary is not 40 words");
  const auto model = lda::train(corpus, lda::TrainConfig::with_defaults(4, 500, 5));
  std::vector<std::vector<double>> learned(4, std::vector<double>(40));
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t w = 0; w < 40; ++w) learned[k][w] = model.phi(k, *corpus.vocabulary().find(planted.words[w]));

  double worst = 0.0;
  for (std::size_t t = 0; t < 4; ++t) {
    double nearest = 1e9;
    for (std::size_t k = 0; k < 4; ++k) {
      nearest = std::min(nearest, static_cast<double>(oracle::jsd(planted.true_phi[t], learned[k])));
    }
    worst = std::max(worst, nearest);
    c.expect(nearest < 0.2, fmt::format("planted topic {} JSD {}", t, nearest));
  }
  std::vector<std::size_t> perm = {0, 1, 2, 3};
  std::size_t best_correct = 0;
  do {
    std::size_t correct = 0;
    for (std::size_t d = 0; d < corpus.num_documents(); ++d) {
      const auto row = model.theta_row(d);
      const auto arg = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
      if (arg == perm[planted.doc_topic[d]]) ++correct;
    }
    best_correct = std::max(best_correct, correct);
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double accuracy = static_cast<double>(best_correct) / static_cast<double>(corpus.num_documents());
  c.expect(accuracy >= 0.9, fmt::format("accuracy {}", accuracy));
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 60.0, fmt::format("took {:.1f} s", elapsed));
  return c.outcome(fmt::format("max best-match JSD {:.4f}, accuracy {:.3f}, {:.2f} s", worst, accuracy, elapsed));
}

Outcome large_corpus_topics() {
  return {true, "published topic lists come from stochastic training on an external corpus; not reproducible",
          true};
}

Outcome segmentation_oracle() {
  Check c;
  std::mt19937_64 rng(7);
  std::size_t compared = 0, agreed = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const gen::RandomLexicon r = gen::random_lexicon(rng);
    Lexicon lex;
    for (const auto& w : r.words) lex.add(utf8::encode(w));
    lex.set_char_freq({r.freq.begin(), r.freq.end()});
    for (int s = 0; s < 40; ++s) {
      const std::u32string text = gen::random_text(rng, r.alphabet, 12);
      std::vector<std::string> expected;
      for (const auto& w : oracle::segment_run(text, r.words, r.freq)) expected.push_back(oracle::to_utf8(w));
      const bool same = segment(utf8::encode(text), lex) == expected;
      if (!same) c.fail("disagreement on " + utf8::encode(text));
      ++compared;
      if (same) ++agreed;
    }
  }
  return c.outcome(fmt::format("{}/{} inputs agree over 100 lexicons", agreed, compared));
}

Outcome frequency_filter() {
  Check c;
  const Corpus corpus = fixtures::mini_corpus();
  // recount from the raw segmentation, independent of the corpus builder
  const Lexicon lex = [] {
    auto l = load_lexicon(fixtures::data_dir() / "ancient_words.dic");
    l.set_char_freq(load_char_freq(fixtures::data_dir() / "chars.tsv"));
    return l;
  }();
  std::map<std::string, std::uint64_t> raw;
  for (const auto& doc : corpus.documents()) {
    const auto text = fixtures::read_file(fixtures::mini_corpus_dir() / doc.doc_id);
    for (const auto& w : segment(text, lex)) ++raw[w];
  }
  std::size_t kept = 0, dropped = 0;
  const auto counts = corpus.word_counts();
  for (WordId id = 0; id < corpus.vocab_size(); ++id) {
    if (counts[id] <= 5) c.fail(fmt::format("{} occurs {} times", corpus.vocabulary().word(id), counts[id]));
  }
  for (const auto& [w, n] : raw) {
    const bool in = corpus.vocabulary().find(w).has_value();
    if (in != (n > 5)) c.fail(fmt::format("{} (count {}) kept={}", w, n, in));
    in ? ++kept : ++dropped;
  }
  return c.outcome(fmt::format("{} words kept, {} words with count <= 5 removed", kept, dropped));
}

Outcome pseudo_document() {
  Check c;
  const auto f = fixtures::term_search_fixture();
  struct Case {
    std::vector<std::string> query;
    std::vector<std::pair<std::string, double>> ranking;
  };
  // evaluated independently at 40 significant digits
  const std::vector<Case> cases = {
      {{"阴"}, {{"医/甲.txt", 0.9138727497068911}, {"杂/丙.txt", 0.69692837597669687}, {"兵/乙.txt", 0.44249991213802967}}},
      {{"阴", "战"},
       {{"杂/丙.txt", 0.97927451454848949}, {"兵/乙.txt", 0.70950641876906944}, {"医/甲.txt", 0.63636915371315074}}},
      {{"兵", "战"},
       {{"兵/乙.txt", 0.97818774516379451}, {"杂/丙.txt", 0.75073060265664032}, {"医/甲.txt", 0.38845166635644072}}},
  };
  for (const auto& cs : cases) {
    const auto r = explore::term_search(f.model, f.corpus, cs.query);
    c.expect(r.documents.size() == cs.ranking.size(), "wrong number of documents");
    for (std::size_t i = 0; i < std::min(r.documents.size(), cs.ranking.size()); ++i) {
      c.expect(r.documents[i].doc_id == cs.ranking[i].first, "order differs at rank " + std::to_string(i));
      c.expect(std::abs(r.documents[i].similarity - cs.ranking[i].second) <= 1e-12,
               fmt::format("score at rank {} is {}", i, r.documents[i].similarity));
    }
  }
  return c.outcome(fmt::format("{} queries ranked exactly", cases.size()));
}

Eigen::MatrixXd gaussian_points(std::size_t n, std::size_t dims, std::uint64_t seed, double spread) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, spread);
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims));
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    for (Eigen::Index j = 0; j < pts.cols(); ++j) pts(i, j) = g(rng);
  return pts;
}

Outcome isomap() {
  Check c;
  // complete neighbourhood graph: isomap reduces to classical MDS
  const Eigen::MatrixXd cloud = gaussian_points(20, 4, 8, 1.0);
  const Eigen::MatrixXd d = oracle::euclidean_distances(cloud);
  std::vector<std::vector<double>> rows(20, std::vector<double>(20));
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 20; ++j) rows[i][j] = d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  const auto expected = oracle::mds(rows, 2);
  const auto iso = topicmap::isomap_embed(d, 19, 2);
  double mds_err = 0.0;
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t a = 0; a < 2; ++a)
      mds_err = std::max(mds_err, std::abs(iso.coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) -
                                           expected[i][a]));
  c.expect(mds_err <= 1e-9, fmt::format("MDS mismatch {}", mds_err));

  // planted planar cloud
  const Eigen::MatrixXd plane = gaussian_points(30, 2, 9, 5.0);
  const double rmse =
      oracle::procrustes_rmse(topicmap::isomap_embed(oracle::euclidean_distances(plane), 29, 2).coords, plane);
  c.expect(rmse < 1e-6, fmt::format("Procrustes error {}", rmse));

  // three quarters of a circle, unrolled
  const std::size_t n = 40;
  Eigen::MatrixXd arc(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 1.5 * std::numbers::pi * static_cast<double>(i) / (n - 1);
    arc(static_cast<Eigen::Index>(i), 0) = std::cos(t);
    arc(static_cast<Eigen::Index>(i), 1) = std::sin(t);
  }
  const Eigen::VectorXd x = topicmap::isomap_embed(oracle::euclidean_distances(arc), 1, 2).coords.col(0);
  bool monotone = true;
  for (Eigen::Index i = 2; i < x.size(); ++i) {
    monotone = monotone && ((x(i) > x(i - 1)) == (x(1) > x(0)));
  }
  c.expect(monotone, "arc order not monotone");
  return c.outcome(fmt::format("MDS max error {:.1e}, Procrustes {:.1e}, arc monotone", mds_err, rmse));
}

// ---------------------------------------------------------------------------
// End to end through the command-line tool

struct Child {
  pid_t pid = -1;
  FILE* out = nullptr;
};

int run_tool(const std::vector<std::string>& args, const fs::path& log) {
  std::string cmd = TOPICSHELF_CLI;
  for (const auto& a : args) cmd += " '" + a + "'";
  cmd += " >> '" + log.string() + "' 2>&1";
  return std::system(cmd.c_str());
}

Child spawn_tool(const std::vector<std::string>& args) {
  int fds[2];
  if (pipe(fds) != 0) return {};
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, fds[0]);
  std::vector<std::string> all = {TOPICSHELF_CLI};
  all.insert(all.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : all) argv.push_back(a.data());
  argv.push_back(nullptr);
  Child child;
  if (posix_spawn(&child.pid, argv[0], &actions, nullptr, argv.data(), environ) != 0) child.pid = -1;
  posix_spawn_file_actions_destroy(&actions);
  close(fds[1]);
  child.out = fdopen(fds[0], "r");
  return child;
}

std::string url_encode(const std::string& s) {
  std::string out;
  for (unsigned char ch : s) {
    if (std::isalnum(ch) || ch == '-' || ch == '_' || ch == '.') {
      out.push_back(static_cast<char>(ch));
    } else {
      out += fmt::format("%{:02X}", ch);
    }
  }
  return out;
}

Outcome end_to_end() {
  Check c;
  const auto start = Clock::now();
  fixtures::TempDir dir("acceptance-e2e");
  const fs::path log = dir / "tool.log";
  const fs::path config = dir / "mini.ini";
  const auto step = [&](const std::vector<std::string>& args) {
    const int rc = run_tool(args, log);
    c.expect(rc == 0, args[0] + " exited with " + std::to_string(rc));
    return rc == 0;
  };
  if (!step({"init", fixtures::mini_corpus_dir().string(), "--name", "mini", "--out", dir.path().string()}) ||
      !step({"prep", config.string(), "--stopword-file", (fixtures::data_dir() / "mini-stopwords.txt").string(),
             "--low", "0"}) ||
      !step({"train", config.string(), "-k", "5", "--iter", "200"})) {
    return c.outcome("");
  }

  Child server = spawn_tool({"serve", config.string(), "--port", "0", "--fulltext"});
  c.expect(server.pid > 0 && server.out, "serve did not start");
  if (server.pid <= 0 || !server.out) return c.outcome("");
  char line[512] = {};
  int port = 0;
  if (std::fgets(line, sizeof line, server.out)) {
    const std::string s(line);
    const auto colon = s.rfind(':');
    if (colon != std::string::npos) port = std::atoi(s.c_str() + colon + 1);
  }
  c.expect(port > 0, "no port reported by serve");

  std::size_t endpoints = 0;
  if (port > 0) {
    httplib::Client client("127.0.0.1", port);
    const auto get = [&](const std::string& path) {
      auto res = client.Get(path);
      ++endpoints;
      nlohmann::json j;
      if (!res || res->status != 200) {
        c.expect(false, path + " status " + (res ? std::to_string(res->status) : "none"));
        return j;
      }
      try {
        j = nlohmann::json::parse(res->body);
        c.expect(j.value("v", 0) == 1, path + " lacks v=1");
      } catch (const std::exception&) {
        c.expect(false, path + " body is not JSON");
      }
      return j;
    };
    const auto models = get("/api/models");
    c.expect(models.value("ks", nlohmann::json::array()) == nlohmann::json::array({5}), "models");
    const auto docs = get("/api/docs?q=" + url_encode("论语"));
    c.expect(docs.contains("docs") && docs["docs"].size() == 10, "docs autocomplete");
    const std::string id = docs.contains("docs") && !docs["docs"].empty() ? docs["docs"][0]["id"].get<std::string>()
                                                                          : std::string("missing");
    const auto topics = get("/api/5/doc/" + url_encode(id) + "/topics");
    c.expect(topics.contains("topics") && topics["topics"].size() == 5, "doc topics");
    const auto similar = get("/api/5/doc/" + url_encode(id) + "/similar?limit=10");
    c.expect(similar.contains("docs") && similar["docs"].size() == 10 && similar["docs"][0]["id"] == id,
             "similar");
    const auto sorted = get("/api/5/doc/" + url_encode(id) + "/similar?limit=10&sort_topic=1");
    c.expect(sorted.value("sort_topic", -1) == 1, "sort_topic");
    const auto words = get("/api/5/topic/0/words");
    c.expect(words.contains("words") && words["words"].size() == 15, "topic words");
    const auto tdocs = get("/api/5/topic/0/docs?limit=5");
    c.expect(tdocs.contains("docs") && tdocs["docs"].size() == 5, "topic docs");
    const auto search = get("/api/5/search?q=" + url_encode("兵 战"));
    c.expect(search.contains("docs") && search["docs"].size() == 40, "search");
    const auto map = get("/api/map");
    c.expect(map.contains("topics") && map["topics"].size() == 5, "map");
    const auto sat = get("/api/map/saturation?term=" + url_encode("兵"));
    c.expect(sat.contains("weights") && sat["weights"].size() == 5, "saturation");
    const auto text = get("/api/doc/" + url_encode(id) + "/text");
    c.expect(text.contains("text") && !text["text"].get<std::string>().empty(), "text");
  }
  kill(server.pid, SIGTERM);
  int status = 0;
  waitpid(server.pid, &status, 0);
  std::fclose(server.out);
  c.expect(WIFEXITED(status) && WEXITSTATUS(status) == 0, "serve did not shut down cleanly");

  const double elapsed = seconds_since(start);
  c.expect(elapsed < 180.0, fmt::format("took {:.1f} s", elapsed));
  return c.outcome(fmt::format("{} endpoint requests valid, {:.2f} s", endpoints, elapsed));
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"metric axioms", metric_axioms},
      {"metric values", metric_values},
      {"sampler correctness", sampler_correctness},
      {"planted-topic recovery", planted_recovery},
      {"large-corpus topic lists", large_corpus_topics},
      {"segmentation oracle equivalence", segmentation_oracle},
      {"frequency filter", frequency_filter},
      {"pseudo-document pipeline", pseudo_document},
      {"isomap", isomap},
      {"end-to-end", end_to_end},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const char* tag = o.skipped ? "SKIP" : (o.pass ? "PASS" : "FAIL");
    if (!o.pass) ++failed;
    std::printf("%s  %-32s %s\n", tag, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d failed\n", failed);
  return failed == 0 ? 0 : 1;
}
