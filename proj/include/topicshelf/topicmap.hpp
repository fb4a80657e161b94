#pragma once

// Topic map over a model suite: the topics of every model are pooled,
// compared by Jensen-Shannon distance between their word distributions,
// embedded in the plane with isomap, and clustered with k-means.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "topicshelf/error.hpp"
#include "topicshelf/lda.hpp"
#include "topicshelf/metrics.hpp"

namespace topicshelf::topicmap {

struct TopicRef {
  std::size_t k = 0;      // topic count of the model
  std::size_t topic = 0;  // index within that model

  friend auto operator<=>(const TopicRef&, const TopicRef&) = default;
  std::string str() const { return std::to_string(k) + ":" + std::to_string(topic); }
};

/// All topics of the suite, ordered by K then topic index.
inline std::vector<TopicRef> pooled_topics(const lda::ModelSuite& suite) {
  std::vector<TopicRef> refs;
  for (const auto& [k, model] : suite.models) {
    for (std::size_t t = 0; t < model.num_topics(); ++t) refs.push_back({k, t});
  }
  return refs;
}

namespace detail {

inline void check_shared_vocabulary(const lda::ModelSuite& suite) {
  const lda::TopicModel* first = nullptr;
  for (const auto& [k, model] : suite.models) {
    if (!first) {
      first = &model;
    } else if (model.vocab_hash() != first->vocab_hash() ||
               model.vocab_size() != first->vocab_size()) {
      throw Error(ErrorKind::VocabularyMismatch,
                  "model K=" + std::to_string(k) + " uses a different vocabulary");
    }
  }
  if (suite.corpus && first && first->vocab_hash() != suite.corpus->vocabulary().hash()) {
    throw Error(ErrorKind::VocabularyMismatch, "suite models do not match the corpus vocabulary");
  }
}

}  // namespace detail

/// Symmetric N x N matrix of JS distances between pooled topics.
inline Eigen::MatrixXd topic_distance_matrix(const lda::ModelSuite& suite) {
  detail::check_shared_vocabulary(suite);
  const auto refs = pooled_topics(suite);
  const std::size_t n = refs.size();
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a) {
    const auto pa = suite.at(refs[a].k).phi_row(refs[a].topic);
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto pb = suite.at(refs[b].k).phi_row(refs[b].topic);
      const double d = metrics::js_distance_unchecked(pa, pb);
      dist(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = d;
      dist(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = d;
    }
  }
  return dist;
}

// ---------------------------------------------------------------------------
// Isomap

inline constexpr std::size_t kDefaultNeighbors = 12;

struct Geodesics {
  Eigen::MatrixXd distances;
  std::size_t bridges_added = 0;  // edges added to join disconnected components
};

struct Embedding {
  Eigen::MatrixXd coords;            // N x dims
  std::vector<double> eigenvalues;   // top `dims`, descending
  bool degenerate = false;           // fewer than `dims` positive eigenvalues
  std::size_t bridges_added = 0;
  std::vector<std::string> warnings;
};

namespace detail {

inline void validate_distance_matrix(const Eigen::MatrixXd& dist) {
  if (dist.rows() != dist.cols()) throw Error(ErrorKind::InvalidArgument, "distance matrix is not square");
  for (Eigen::Index i = 0; i < dist.rows(); ++i) {
    if (dist(i, i) != 0.0) throw Error(ErrorKind::InvalidArgument, "nonzero diagonal");
    for (Eigen::Index j = 0; j < i; ++j) {
      const double a = dist(i, j);
      if (!(a >= 0.0) || !std::isfinite(a)) throw Error(ErrorKind::InvalidArgument, "negative or non-finite distance");
      if (std::abs(a - dist(j, i)) > 1e-12 * std::max(1.0, a)) {
        throw Error(ErrorKind::InvalidArgument, "distance matrix is not symmetric");
      }
    }
  }
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

/// Shortest-path distances over the symmetric k-nearest-neighbour graph.
/// Disconnected components are joined by repeatedly adding the globally
/// shortest edge between two different components.
inline Geodesics geodesic_distances(const Eigen::MatrixXd& dist, std::size_t n_neighbors) {
  detail::validate_distance_matrix(dist);
  if (n_neighbors < 1) throw Error(ErrorKind::InvalidArgument, "n_neighbors must be at least 1");
  const std::size_t n = static_cast<std::size_t>(dist.rows());
  const auto d = [&](std::size_t i, std::size_t j) {
    return dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  std::vector<std::vector<bool>> linked(n, std::vector<bool>(n, false));
  const auto link = [&](std::size_t i, std::size_t j) {
    if (i == j || linked[i][j]) return;
    linked[i][j] = linked[j][i] = true;
    adj[i].emplace_back(j, d(i, j));
    adj[j].emplace_back(i, d(i, j));
  };
  const std::size_t k = std::min(n_neighbors, n > 0 ? n - 1 : 0);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (d(i, a) != d(i, b)) return d(i, a) < d(i, b);
      return a < b;
    });
    std::size_t taken = 0;
    for (std::size_t j : order) {
      if (taken == k) break;
      if (j == i) continue;
      link(i, j);
      ++taken;
    }
  }

  Geodesics out;
  detail::DisjointSets sets(n);
  std::size_t components = n;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, w] : adj[i]) {
      if (sets.unite(i, j)) --components;
    }
  }
  while (components > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> edge{0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (d(i, j) < best && sets.find(i) != sets.find(j)) {
          best = d(i, j);
          edge = {i, j};
        }
      }
    }
    link(edge.first, edge.second);
    sets.unite(edge.first, edge.second);
    --components;
    ++out.bridges_added;
  }

  out.distances = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  using Entry = std::pair<double, std::size_t>;
  std::vector<double> best(n);
  for (std::size_t src = 0; src < n; ++src) {
    std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    best[src] = 0.0;
    queue.emplace(0.0, src);
    while (!queue.empty()) {
      const auto [dist_u, u] = queue.top();
      queue.pop();
      if (dist_u > best[u]) continue;
      for (const auto& [v, w] : adj[u]) {
        const double cand = dist_u + w;
        if (cand < best[v]) {
          best[v] = cand;
          queue.emplace(cand, v);
        }
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      out.distances(static_cast<Eigen::Index>(src), static_cast<Eigen::Index>(j)) = best[j];
    }
  }
  // exact symmetry regardless of floating summation order along paths
  out.distances = (0.5 * (out.distances + out.distances.transpose())).eval();
  return out;
}

/// Classical multidimensional scaling: eigen-decomposition of the doubly
/// centered matrix -1/2 J D^2 J; coordinates are eigenvectors scaled by the
/// square roots of their eigenvalues. Each axis is oriented so that its
/// largest-magnitude coordinate is positive.
inline Embedding classical_mds(const Eigen::MatrixXd& dist, std::size_t dims = 2) {
  const Eigen::Index n = dist.rows();
  if (dist.cols() != n) throw Error(ErrorKind::InvalidArgument, "distance matrix is not square");
  if (dims < 1) throw Error(ErrorKind::InvalidArgument, "dims must be at least 1");
  const Eigen::MatrixXd sq = dist.array().square().matrix();
  const Eigen::VectorXd row_mean = sq.rowwise().mean();
  const Eigen::RowVectorXd col_mean = sq.colwise().mean();
  const double grand = sq.mean();
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      b(i, j) = -0.5 * (sq(i, j) - row_mean(i) - col_mean(j) + grand);
    }
  }
  b = (0.5 * (b + b.transpose())).eval();

  Embedding out;
  out.coords = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(dims));
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::InvalidArgument, "eigen-decomposition failed");
  const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  const double tolerance = 1e-10 * scale;
  std::size_t positive = 0;
  for (std::size_t a = 0; a < dims; ++a) {
    const Eigen::Index idx = n - 1 - static_cast<Eigen::Index>(a);
    const double lambda = idx >= 0 ? values(idx) : 0.0;
    out.eigenvalues.push_back(lambda);
    if (idx < 0 || lambda <= tolerance) continue;
    ++positive;
    Eigen::VectorXd axis = solver.eigenvectors().col(idx) * std::sqrt(lambda);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (std::abs(axis(i)) > std::abs(axis(arg))) arg = i;
    }
    if (axis(arg) < 0) axis = -axis;
    out.coords.col(static_cast<Eigen::Index>(a)) = axis;
  }
  if (positive < dims) {
    out.degenerate = true;
    out.warnings.push_back("DegenerateSpectrum: only " + std::to_string(positive) +
                           " positive eigenvalue(s); remaining axes set to zero");
  }
  return out;
}

inline Embedding isomap_embed(const Eigen::MatrixXd& dist,
                              std::size_t n_neighbors = kDefaultNeighbors,
                              std::size_t dims = 2) {
  Geodesics geo = geodesic_distances(dist, n_neighbors);
  Embedding out = classical_mds(geo.distances, dims);
  out.bridges_added = geo.bridges_added;
  if (geo.bridges_added > 0) {
    out.warnings.push_back("neighbourhood graph was disconnected; added " +
                           std::to_string(geo.bridges_added) + " bridging edge(s)");
  }
  return out;
}

// ---------------------------------------------------------------------------
// k-means

inline constexpr std::size_t kDefaultClusters = 10;
inline constexpr std::size_t kDefaultRestarts = 100;

struct Clustering {
  std::vector<std::size_t> labels;
  double inertia = 0.0;
};

namespace detail {

inline double squared_distance(const Eigen::MatrixXd& points, Eigen::Index i,
                               const Eigen::MatrixXd& centers, Eigen::Index c) {
  return (points.row(i) - centers.row(c)).squaredNorm();
}

inline Clustering lloyd(const Eigen::MatrixXd& points, std::size_t k, lda::Random& rng) {
  const Eigen::Index n = points.rows();
  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd centers(kk, points.cols());

  // k-means++ seeding
  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  auto pick = static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(n)));
  for (Eigen::Index c = 0; c < kk; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (double v : nearest) total += v;
      if (total > 0.0) {
        const double u = rng.uniform() * total;
        double acc = 0.0;
        pick = n - 1;
        for (Eigen::Index i = 0; i < n; ++i) {
          acc += nearest[static_cast<std::size_t>(i)];
          if (acc > u && nearest[static_cast<std::size_t>(i)] > 0.0) {
            pick = i;
            break;
          }
        }
      } else {
        pick = 0;
        while (pick < n - 1 && chosen[static_cast<std::size_t>(pick)]) ++pick;
      }
    }
    chosen[static_cast<std::size_t>(pick)] = true;
    centers.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      nearest[static_cast<std::size_t>(i)] =
          std::min(nearest[static_cast<std::size_t>(i)], squared_distance(points, i, centers, c));
    }
  }

  std::vector<std::size_t> labels(static_cast<std::size_t>(n), k);
  std::vector<double> dist2(static_cast<std::size_t>(n), 0.0);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < kk; ++c) {
        const double dd = squared_distance(points, i, centers, c);
        if (dd < best_d) {
          best_d = dd;
          best = static_cast<std::size_t>(c);
        }
      }
      const auto iu = static_cast<std::size_t>(i);
      if (labels[iu] != best) changed = true;
      labels[iu] = best;
      dist2[iu] = best_d;
    }
    // refill empty clusters with the point farthest from its center
    std::vector<std::size_t> sizes(k, 0);
    for (auto l : labels) ++sizes[l];
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t far = static_cast<std::size_t>(n);
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (sizes[labels[i]] > 1 && (far == labels.size() || dist2[i] > dist2[far])) far = i;
      }
      if (far == labels.size()) break;
      --sizes[labels[far]];
      labels[far] = c;
      sizes[c] = 1;
      dist2[far] = 0.0;
      changed = true;
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(kk, points.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)])) += points.row(i);
    }
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
      }
    }
    if (!changed) break;
  }
  Clustering out;
  out.labels = std::move(labels);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.inertia += squared_distance(points, i, centers,
                                    static_cast<Eigen::Index>(out.labels[static_cast<std::size_t>(i)]));
  }
  return out;
}

// Renumbers labels in order of first appearance.
inline void canonicalize(std::vector<std::size_t>& labels) {
  std::map<std::size_t, std::size_t> rename;
  for (auto& l : labels) {
    auto [it, _] = rename.emplace(l, rename.size());
    l = it->second;
  }
}

}  // namespace detail

/// k-means with k-means++ seeding; the run with the lowest inertia over
/// `restarts` seeded runs wins. Rows of `points` are the observations.
inline Clustering kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                         std::size_t restarts = kDefaultRestarts) {
  if (k == 0 || k > static_cast<std::size_t>(points.rows())) {
    throw Error(ErrorKind::TooFewPoints, "cannot form " + std::to_string(k) + " clusters from " +
                                             std::to_string(points.rows()) + " points");
  }
  lda::Random rng(seed);
  Clustering best;
  bool have = false;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, restarts); ++r) {
    Clustering run = detail::lloyd(points, k, rng);
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }
  detail::canonicalize(best.labels);
  return best;
}

inline std::vector<std::size_t> cluster_topics(const Eigen::MatrixXd& coords,
                                               std::size_t k = kDefaultClusters,
                                               std::uint64_t seed = 0) {
  return kmeans(coords, k, seed).labels;
}

// ---------------------------------------------------------------------------
// Saturation and marker sizes

/// phi[topic][term] for every pooled topic, divided by the maximum so the
/// best topic scores 1.
inline std::vector<std::pair<TopicRef, double>> term_saturation(const lda::ModelSuite& suite,
                                                                std::string_view term) {
  if (!suite.corpus) throw Error(ErrorKind::InvalidArgument, "suite has no corpus");
  const auto id = suite.corpus->vocabulary().find(term);
  if (!id) throw Error(ErrorKind::UnknownTerm, std::string(term));
  std::vector<std::pair<TopicRef, double>> out;
  double max = 0.0;
  for (const auto& ref : pooled_topics(suite)) {
    const double p = suite.at(ref.k).phi(ref.topic, *id);
    out.emplace_back(ref, p);
    max = std::max(max, p);
  }
  if (max > 0.0) {
    for (auto& [ref, w] : out) w /= max;
  }
  return out;
}

inline constexpr double kDefaultMarkerBase = 1000.0;

/// size(K) = base / K.
inline std::map<std::size_t, double> marker_sizes(const lda::ModelSuite& suite,
                                                  double base = kDefaultMarkerBase) {
  std::map<std::size_t, double> out;
  for (const auto& [k, _] : suite.models) out[k] = base / static_cast<double>(k);
  return out;
}

// ---------------------------------------------------------------------------
// Layout

enum class ClusterSpace { Embedding, Distribution };

struct LayoutOptions {
  std::size_t n_neighbors = kDefaultNeighbors;
  std::size_t clusters = kDefaultClusters;
  std::size_t restarts = kDefaultRestarts;
  std::uint64_t seed = 0;
  double marker_base = kDefaultMarkerBase;
  ClusterSpace space = ClusterSpace::Embedding;
  std::size_t top_words = 15;
};

struct TopicPoint {
  TopicRef ref;
  double x = 0.0;
  double y = 0.0;
  double marker_size = 0.0;
  std::size_t cluster = 0;
  std::vector<std::string> words;
};

struct TopicMapLayout {
  LayoutOptions options;
  std::uint64_t vocab_hash = 0;
  std::vector<TopicPoint> points;
  std::vector<std::string> warnings;
};

inline TopicMapLayout build_layout(const lda::ModelSuite& suite, const LayoutOptions& options = {}) {
  if (!suite.corpus) throw Error(ErrorKind::InvalidArgument, "suite has no corpus");
  const auto refs = pooled_topics(suite);
  TopicMapLayout layout;
  layout.options = options;
  layout.vocab_hash = suite.corpus->vocabulary().hash();
  if (refs.empty()) return layout;

  const Eigen::MatrixXd dist = topic_distance_matrix(suite);
  Embedding emb = isomap_embed(dist, options.n_neighbors, 2);
  layout.warnings = emb.warnings;

  std::size_t clusters = options.clusters;
  if (clusters > refs.size()) {
    layout.warnings.push_back("only " + std::to_string(refs.size()) + " topics; using " +
                              std::to_string(refs.size()) + " clusters");
    clusters = refs.size();
  }
  layout.options.clusters = clusters;
  Eigen::MatrixXd space_points;
  if (options.space == ClusterSpace::Embedding) {
    space_points = emb.coords;
  } else {
    const auto v = static_cast<Eigen::Index>(suite.corpus->vocab_size());
    space_points.resize(static_cast<Eigen::Index>(refs.size()), v);
    for (std::size_t i = 0; i < refs.size(); ++i) {
      const auto row = suite.at(refs[i].k).phi_row(refs[i].topic);
      for (Eigen::Index w = 0; w < v; ++w) {
        space_points(static_cast<Eigen::Index>(i), w) = row[static_cast<std::size_t>(w)];
      }
    }
  }
  const auto labels = kmeans(space_points, clusters, options.seed, options.restarts).labels;
  const auto sizes = marker_sizes(suite, options.marker_base);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    TopicPoint p;
    p.ref = refs[i];
    p.x = emb.coords(static_cast<Eigen::Index>(i), 0);
    p.y = emb.coords(static_cast<Eigen::Index>(i), 1);
    p.marker_size = sizes.at(refs[i].k);
    p.cluster = labels[i];
    for (auto& wp : lda::top_words(suite.at(refs[i].k), suite.corpus->vocabulary(), refs[i].topic,
                                   options.top_words)) {
      p.words.push_back(std::move(wp.word));
    }
    layout.points.push_back(std::move(p));
  }
  return layout;
}

inline constexpr int kLayoutVersion = 1;

inline std::string to_string(ClusterSpace s) {
  return s == ClusterSpace::Embedding ? "embedding" : "distribution";
}

inline ClusterSpace parse_cluster_space(std::string_view name) {
  if (name == "embedding") return ClusterSpace::Embedding;
  if (name == "distribution") return ClusterSpace::Distribution;
  throw Error(ErrorKind::InvalidArgument, "unknown cluster space " + std::string(name));
}

/// JSON Lines: a header record, then one record per topic.
inline void save_layout(const TopicMapLayout& layout, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  nlohmann::ordered_json head;
  head["v"] = kLayoutVersion;
  head["vocab_hash"] = std::to_string(layout.vocab_hash);
  head["n_neighbors"] = layout.options.n_neighbors;
  head["clusters"] = layout.options.clusters;
  head["restarts"] = layout.options.restarts;
  head["seed"] = layout.options.seed;
  head["marker_base"] = layout.options.marker_base;
  head["space"] = to_string(layout.options.space);
  head["warnings"] = layout.warnings;
  out << head.dump() << '\n';
  for (const auto& p : layout.points) {
    nlohmann::ordered_json j;
    j["k"] = p.ref.k;
    j["topic"] = p.ref.topic;
    j["x"] = p.x;
    j["y"] = p.y;
    j["size"] = p.marker_size;
    j["cluster"] = p.cluster;
    j["words"] = p.words;
    out << j.dump() << '\n';
  }
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

inline TopicMapLayout load_layout(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  TopicMapLayout layout;
  std::string line;
  bool header = true;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      if (header) {
        if (j.at("v").get<int>() != kLayoutVersion) {
          throw Error(ErrorKind::FormatError, path.string() + ": unsupported layout version");
        }
        layout.vocab_hash = std::stoull(j.at("vocab_hash").get<std::string>());
        layout.options.n_neighbors = j.at("n_neighbors").get<std::size_t>();
        layout.options.clusters = j.at("clusters").get<std::size_t>();
        layout.options.restarts = j.at("restarts").get<std::size_t>();
        layout.options.seed = j.at("seed").get<std::uint64_t>();
        layout.options.marker_base = j.at("marker_base").get<double>();
        layout.options.space = parse_cluster_space(j.at("space").get<std::string>());
        layout.warnings = j.at("warnings").get<std::vector<std::string>>();
        header = false;
        continue;
      }
      TopicPoint p;
      p.ref = {j.at("k").get<std::size_t>(), j.at("topic").get<std::size_t>()};
      p.x = j.at("x").get<double>();
      p.y = j.at("y").get<double>();
      p.marker_size = j.at("size").get<double>();
      p.cluster = j.at("cluster").get<std::size_t>();
      p.words = j.at("words").get<std::vector<std::string>>();
      layout.points.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatError, path.string() + ": " + e.what());
  }
  if (header) throw Error(ErrorKind::FormatError, path.string() + ": empty layout file");
  return layout;
}

}  // namespace topicshelf::topicmap
