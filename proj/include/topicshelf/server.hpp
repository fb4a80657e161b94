#pragma once

// Read-only JSON API over a loaded project, plus static file serving for the
// browser UI. Every response body carries a top-level "v" schema version.
//
//   GET /api/models
//   GET /api/docs?q=&limit=                  label autocompletion
//   GET /api/{K}/doc/{id}/topics
//   GET /api/{K}/doc/{id}/similar?limit=&sort_topic=
//   GET /api/{K}/topic/{t}/words?n=
//   GET /api/{K}/topic/{t}/docs?limit=
//   GET /api/{K}/search?q=&limit=
//   GET /api/map
//   GET /api/map/saturation?term=
//   GET /api/doc/{id}/text                   404 unless full text is enabled
//
// Document ids are relative paths and travel percent-encoded in the URL.

#include <sys/socket.h>

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

// Eigen first: httplib pulls in <resolv.h>, whose _res macro collides with
// Eigen parameter names.
#include <Eigen/Dense>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "topicshelf/error.hpp"
#include "topicshelf/explore.hpp"
#include "topicshelf/lda.hpp"
#include "topicshelf/project.hpp"
#include "topicshelf/segment.hpp"
#include "topicshelf/topicmap.hpp"
#include "topicshelf/utf8.hpp"

namespace topicshelf::server {

inline constexpr int kApiVersion = 1;
inline constexpr std::string_view kDefaultHost = "127.0.0.1";
inline constexpr int kDefaultPort = 8000;
inline constexpr std::size_t kDefaultListLimit = 40;
inline constexpr std::size_t kDefaultTopWords = 15;

struct ServiceConfig {
  std::filesystem::path config_path;
  std::string host{kDefaultHost};
  int port = kDefaultPort;
  bool fulltext_enabled = false;
  std::vector<std::size_t> ks;  // empty: every trained model
  std::optional<std::filesystem::path> static_dir;
};

/// Applies TOPICSHELF_HOST / TOPICSHELF_PORT when set.
inline void apply_env_overrides(ServiceConfig& config) {
  if (const char* host = std::getenv("TOPICSHELF_HOST"); host && *host) config.host = host;
  if (const char* port = std::getenv("TOPICSHELF_PORT"); port && *port) {
    int value = 0;
    const std::string_view s(port);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || value < 0 || value > 65535) {
      throw Error(ErrorKind::InvalidArgument, "TOPICSHELF_PORT is not a port number");
    }
    config.port = value;
  }
}

using Json = nlohmann::ordered_json;

namespace detail {

class BadRequest : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::size_t parse_count(std::string_view text, const char* name) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw BadRequest(std::string("invalid ") + name);
  }
  return value;
}

inline std::size_t param_count(const httplib::Request& req, const char* name, std::size_t fallback) {
  if (!req.has_param(name)) return fallback;
  return parse_count(req.get_param_value(name), name);
}

inline int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownDocument:
    case ErrorKind::UnknownTerm:
    case ErrorKind::NoKnownTerms:
    case ErrorKind::ModelMissing:
    case ErrorKind::IndexOutOfRange:
      return 404;
    default:
      return 400;
  }
}

/// Query terms separated by whitespace or (ASCII / full-width) commas.
inline std::vector<std::string> split_terms(std::string_view q) {
  std::vector<std::string> terms;
  std::u32string cur;
  for (char32_t c : utf8::decode(q)) {
    if (utf8::is_space(c) || c == ',' || c == 0xFF0C || c == 0x3001) {
      if (!cur.empty()) terms.push_back(utf8::encode(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) terms.push_back(utf8::encode(cur));
  return terms;
}

}  // namespace detail

/// Terms missing from the vocabulary are segmented with `lexicon` and
/// replaced by their known pieces; a term with no known piece is kept so it
/// shows up as dropped.
inline std::vector<std::string> expand_terms(const std::vector<std::string>& terms,
                                             const Vocabulary& vocab, const Lexicon* lexicon) {
  std::vector<std::string> out;
  for (const auto& t : terms) {
    if (vocab.find(t) || !lexicon) {
      out.push_back(t);
      continue;
    }
    std::vector<std::string> known;
    for (auto& piece : segment(t, *lexicon)) {
      if (vocab.find(piece)) known.push_back(std::move(piece));
    }
    if (known.empty()) {
      out.push_back(t);
    } else {
      for (auto& k : known) out.push_back(std::move(k));
    }
  }
  return out;
}

/// Request handling over immutable shared state; safe for concurrent use.
class Service {
 public:
  Service(std::shared_ptr<const project::LoadedProject> project, bool fulltext_enabled)
      : project_(std::move(project)), fulltext_(fulltext_enabled) {
    for (const auto& d : project_->corpus->documents()) labels_.push_back(d.label);
    for (std::size_t i = 0; i < labels_.size(); ++i) label_index_.emplace(labels_[i], i);
  }

  void register_routes(httplib::Server& server) const {
    const auto get = [&](const std::string& pattern, auto fn) {
      server.Get(pattern, [this, fn](const httplib::Request& req, httplib::Response& res) {
        respond(res, [&] { return (this->*fn)(req); });
      });
    };
    get(R"(/api/models)", &Service::models);
    get(R"(/api/docs)", &Service::docs);
    get(R"(/api/map)", &Service::map);
    get(R"(/api/map/saturation)", &Service::saturation);
    get(R"(/api/doc/(.+)/text)", &Service::text);
    get(R"(/api/(\d+)/doc/(.+)/topics)", &Service::doc_topics);
    get(R"(/api/(\d+)/doc/(.+)/similar)", &Service::similar);
    get(R"(/api/(\d+)/topic/(\d+)/words)", &Service::topic_words);
    get(R"(/api/(\d+)/topic/(\d+)/docs)", &Service::topic_docs);
    get(R"(/api/(\d+)/search)", &Service::search);
  }

  const project::LoadedProject& project() const noexcept { return *project_; }

 private:
  struct NotFound {
    std::string message;
  };

  template <typename Fn>
  static void respond(httplib::Response& res, Fn&& fn) {
    Json body;
    int status = 200;
    try {
      body = fn();
    } catch (const NotFound& e) {
      status = 404;
      body = error_body("NotFound", e.message);
    } catch (const detail::BadRequest& e) {
      status = 400;
      body = error_body("BadRequest", e.what());
    } catch (const Error& e) {
      status = detail::status_for(e.kind());
      body = error_body(std::string(to_string(e.kind())), e.what());
    }
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
  }

  static Json error_body(const std::string& kind, const std::string& message) {
    Json j;
    j["v"] = kApiVersion;
    j["error"] = kind;
    j["message"] = message;
    return j;
  }

  static Json envelope() {
    Json j;
    j["v"] = kApiVersion;
    return j;
  }

  const lda::TopicModel& model(const std::string& k_text) const {
    const std::size_t k = detail::parse_count(k_text, "K");
    auto it = project_->suite.models.find(k);
    if (it == project_->suite.models.end()) throw NotFound{"no model with K=" + k_text};
    return it->second;
  }

  std::size_t topic_index(const lda::TopicModel& m, const std::string& text) const {
    const std::size_t t = detail::parse_count(text, "topic");
    if (t >= m.num_topics()) throw NotFound{"topic " + text + " out of range"};
    return t;
  }

  const Document& document(const std::string& id) const {
    const auto idx = project_->corpus->find_document(id);
    if (!idx) throw NotFound{"unknown document " + id};
    return project_->corpus->documents()[*idx];
  }

  static Json doc_entry(const Document& d) {
    Json j;
    j["id"] = d.doc_id;
    j["label"] = d.label;
    return j;
  }

  Json ranked_list(const std::vector<explore::RankedDocument>& docs, const char* score) const {
    Json list = Json::array();
    for (const auto& r : docs) {
      Json j = doc_entry(project_->corpus->documents()[r.index]);
      j[score] = r.similarity;
      j["topics"] = r.topic_mix;
      list.push_back(std::move(j));
    }
    return list;
  }

  Json models(const httplib::Request&) const {
    Json j = envelope();
    j["ks"] = project_->suite.ks();
    return j;
  }

  Json docs(const httplib::Request& req) const {
    const std::string q = req.has_param("q") ? req.get_param_value("q") : std::string();
    const std::size_t limit = detail::param_count(req, "limit", explore::kDefaultAutocompleteLimit);
    Json j = envelope();
    j["docs"] = Json::array();
    for (const auto& label : explore::autocomplete(labels_, q, limit)) {
      auto [lo, hi] = label_index_.equal_range(label);
      for (auto it = lo; it != hi && j["docs"].size() < limit; ++it) {
        j["docs"].push_back(doc_entry(project_->corpus->documents()[it->second]));
      }
    }
    return j;
  }

  Json doc_topics(const httplib::Request& req) const {
    const auto& m = model(req.matches[1]);
    const Document& d = document(req.matches[2]);
    const auto idx = *project_->corpus->find_document(d.doc_id);
    Json j = envelope();
    j["k"] = m.num_topics();
    j["doc"] = doc_entry(d);
    const auto row = m.theta_row(idx);
    j["topics"] = std::vector<double>(row.begin(), row.end());
    return j;
  }

  Json similar(const httplib::Request& req) const {
    const auto& m = model(req.matches[1]);
    const Document& d = document(req.matches[2]);
    const std::size_t limit = detail::param_count(req, "limit", kDefaultListLimit);
    auto ranked = explore::similar_documents(m, *project_->corpus, d.doc_id, limit);
    Json j = envelope();
    j["k"] = m.num_topics();
    j["focal"] = d.doc_id;
    if (req.has_param("sort_topic")) {
      const std::size_t t = topic_index(m, req.get_param_value("sort_topic"));
      ranked = explore::sort_by_topic(std::move(ranked), t);
      j["sort_topic"] = t;
    }
    j["docs"] = ranked_list(ranked, "similarity");
    return j;
  }

  Json topic_words(const httplib::Request& req) const {
    const auto& m = model(req.matches[1]);
    const std::size_t t = topic_index(m, req.matches[2]);
    const std::size_t n = detail::param_count(req, "n", kDefaultTopWords);
    Json j = envelope();
    j["k"] = m.num_topics();
    j["topic"] = t;
    j["words"] = Json::array();
    for (const auto& wp : lda::top_words(m, project_->corpus->vocabulary(), t, n)) {
      Json w;
      w["word"] = wp.word;
      w["p"] = wp.probability;
      j["words"].push_back(std::move(w));
    }
    return j;
  }

  Json topic_docs(const httplib::Request& req) const {
    const auto& m = model(req.matches[1]);
    const std::size_t t = topic_index(m, req.matches[2]);
    const std::size_t limit = detail::param_count(req, "limit", kDefaultListLimit);
    Json j = envelope();
    j["k"] = m.num_topics();
    j["topic"] = t;
    j["docs"] = ranked_list(explore::top_documents_for_topic(m, *project_->corpus, t, limit),
                            "proportion");
    return j;
  }

  Json search(const httplib::Request& req) const {
    const auto& m = model(req.matches[1]);
    if (!req.has_param("q")) throw detail::BadRequest("missing q");
    const std::size_t limit = detail::param_count(req, "limit", kDefaultListLimit);
    const auto terms = expand_terms(detail::split_terms(req.get_param_value("q")),
                                    project_->corpus->vocabulary(),
                                    project_->lexicon ? &*project_->lexicon : nullptr);
    const auto result = explore::term_search(m, *project_->corpus, terms, limit);
    Json j = envelope();
    j["k"] = m.num_topics();
    j["terms"] = result.terms_used;
    j["dropped"] = result.dropped_terms;
    j["topic_mix"] = result.pseudo_topic_mix;
    j["docs"] = ranked_list(result.documents, "similarity");
    return j;
  }

  Json map(const httplib::Request&) const {
    const auto& layout = project_->layout;
    Json j = envelope();
    j["n_neighbors"] = layout.options.n_neighbors;
    j["clusters"] = layout.options.clusters;
    j["space"] = topicmap::to_string(layout.options.space);
    Json sizes = Json::object();
    for (const auto& [k, size] : topicmap::marker_sizes(project_->suite, layout.options.marker_base)) {
      sizes[std::to_string(k)] = size;
    }
    j["sizes"] = std::move(sizes);
    j["topics"] = Json::array();
    for (const auto& p : layout.points) {
      Json t;
      t["k"] = p.ref.k;
      t["topic"] = p.ref.topic;
      t["x"] = p.x;
      t["y"] = p.y;
      t["size"] = p.marker_size;
      t["cluster"] = p.cluster;
      t["words"] = p.words;
      j["topics"].push_back(std::move(t));
    }
    return j;
  }

  Json saturation(const httplib::Request& req) const {
    if (!req.has_param("term")) throw detail::BadRequest("missing term");
    const std::string term = req.get_param_value("term");
    Json j = envelope();
    j["term"] = term;
    j["weights"] = Json::array();
    for (const auto& [ref, w] : topicmap::term_saturation(project_->suite, term)) {
      Json e;
      e["k"] = ref.k;
      e["topic"] = ref.topic;
      e["weight"] = w;
      j["weights"].push_back(std::move(e));
    }
    return j;
  }

  Json text(const httplib::Request& req) const {
    if (!fulltext_) throw NotFound{"full text is disabled"};
    const Document& d = document(req.matches[1]);
    const auto path = project_->corpus_location / d.doc_id;
    std::string body;
    try {
      body = topicshelf::detail::read_text_file(path);
    } catch (const Error&) {
      throw NotFound{"text for " + d.doc_id + " is unavailable"};
    }
    Json j = envelope();
    j["id"] = d.doc_id;
    j["label"] = d.label;
    j["text"] = utf8::is_valid(body) ? body : utf8::encode(utf8::decode(body));
    return j;
  }

  std::shared_ptr<const project::LoadedProject> project_;
  bool fulltext_;
  std::vector<std::string> labels_;
  std::multimap<std::string, std::size_t> label_index_;
};

/// Owns the HTTP listener. bind() reserves the port (fails fast with
/// PortInUse), run() blocks until stop() is called from another thread.
class HttpServer {
 public:
  HttpServer(std::shared_ptr<const project::LoadedProject> project, const ServiceConfig& config)
      : service_(std::move(project), config.fulltext_enabled) {
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    service_.register_routes(server_);
    if (config.static_dir) {
      if (!server_.set_mount_point("/", config.static_dir->string())) {
        throw Error(ErrorKind::IoError, "static directory " + config.static_dir->string() + " not found");
      }
    }
  }

  /// Binds to host:port; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port) {
    if (port == 0) {
      port_ = server_.bind_to_any_port(host);
      if (port_ < 0) throw Error(ErrorKind::PortInUse, "could not bind " + host);
    } else {
      if (!server_.bind_to_port(host, port)) {
        throw Error(ErrorKind::PortInUse, host + ":" + std::to_string(port) + " is unavailable");
      }
      port_ = port;
    }
    return port_;
  }

  void run() { server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() const { server_.wait_until_ready(); }
  int port() const noexcept { return port_; }
  const Service& service() const noexcept { return service_; }

 private:
  httplib::Server server_;
  Service service_;
  int port_ = -1;
};

inline std::unique_ptr<HttpServer> make_server(const ServiceConfig& config) {
  auto project = std::make_shared<const project::LoadedProject>(
      project::load_project(config.config_path, config.ks));
  return std::make_unique<HttpServer>(std::move(project), config);
}

}  // namespace topicshelf::server
