#pragma once

// Reference implementations used only by the tests. They favour directness
// over speed and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// ---------------------------------------------------------------------------
// Information measures, evaluated straight from the definitions in long
// double with natural logs converted to bits at the end.

inline long double kl(const std::vector<double>& p, const std::vector<double>& q) {
  long double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0) s += static_cast<long double>(p[i]) * std::log(static_cast<long double>(p[i]) / q[i]);
  }
  return s / std::log(2.0L);
}

inline long double jsd(const std::vector<double>& p, const std::vector<double>& q) {
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
  return 0.5L * kl(p, m) + 0.5L * kl(q, m);
}

inline long double js_distance(const std::vector<double>& p, const std::vector<double>& q) {
  return std::sqrt(std::max(0.0L, jsd(p, q)));
}

// ---------------------------------------------------------------------------
// Exhaustive chunk scoring for maximum-matching segmentation.
//
// At each position every complete segmentation of the rest of the run is
// listed; the chunk of a segmentation is its first three words (fewer near
// the end). Chunks are ranked by total length, then mean word length, then
// length variance (exact rationals), then the summed log frequency of their
// single-character words, then word-by-word byte order. The first word of
// the winner is emitted.

struct Rational {
  std::int64_t num, den;  // den > 0
  friend bool operator<(const Rational& a, const Rational& b) { return a.num * b.den < b.num * a.den; }
  friend bool operator==(const Rational& a, const Rational& b) { return a.num * b.den == b.num * a.den; }
};

using Word = std::u32string;

inline void all_segmentations(const std::u32string& s, std::size_t pos,
                              const std::vector<Word>& lexicon, std::vector<Word>& cur,
                              std::vector<std::vector<Word>>& out) {
  if (pos == s.size()) {
    out.push_back(cur);
    return;
  }
  for (std::size_t len = 1; pos + len <= s.size(); ++len) {
    Word w = s.substr(pos, len);
    if (len > 1 && std::find(lexicon.begin(), lexicon.end(), w) == lexicon.end()) continue;
    cur.push_back(w);
    all_segmentations(s, pos + len, lexicon, cur, out);
    cur.pop_back();
  }
}

inline std::string to_utf8(const Word& w) {
  std::string out;
  for (char32_t c : w) {
    if (c < 0x80) {
      out += static_cast<char>(c);
    } else if (c < 0x800) {
      out += static_cast<char>(0xC0 | (c >> 6));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else if (c < 0x10000) {
      out += static_cast<char>(0xE0 | (c >> 12));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (c >> 18));
      out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    }
  }
  return out;
}

// True when chunk a ranks strictly ahead of chunk b.
inline bool chunk_ahead(const std::vector<Word>& a, const std::vector<Word>& b,
                        const std::map<char32_t, std::uint64_t>& freq) {
  const auto total = [](const std::vector<Word>& c) {
    std::int64_t t = 0;
    for (const auto& w : c) t += static_cast<std::int64_t>(w.size());
    return t;
  };
  const std::int64_t ta = total(a), tb = total(b);
  if (ta != tb) return ta > tb;
  const Rational mean_a{ta, static_cast<std::int64_t>(a.size())};
  const Rational mean_b{tb, static_cast<std::int64_t>(b.size())};
  if (!(mean_a == mean_b)) return mean_b < mean_a;
  const auto variance = [](const std::vector<Word>& c, std::int64_t t) {
    // sum (l - t/n)^2 / n  ==  (n * sum l^2 - t^2) / n^2
    const auto n = static_cast<std::int64_t>(c.size());
    std::int64_t sq = 0;
    for (const auto& w : c) sq += static_cast<std::int64_t>(w.size() * w.size());
    return Rational{n * sq - t * t, n * n};
  };
  const Rational va = variance(a, ta), vb = variance(b, tb);
  if (!(va == vb)) return va < vb;
  const auto morph = [&](const std::vector<Word>& c) {
    double s = 0;
    for (const auto& w : c) {
      if (w.size() != 1) continue;
      auto it = freq.find(w[0]);
      if (it != freq.end() && it->second > 1) s += std::log(static_cast<double>(it->second));
    }
    return s;
  };
  const double ma = morph(a), mb = morph(b);
  if (ma != mb) return ma > mb;
  std::vector<std::string> sa, sb;
  for (const auto& w : a) sa.push_back(to_utf8(w));
  for (const auto& w : b) sb.push_back(to_utf8(w));
  return sa < sb;
}

inline std::vector<Word> segment_run(const std::u32string& run, const std::vector<Word>& lexicon,
                                     const std::map<char32_t, std::uint64_t>& freq) {
  std::vector<Word> out;
  std::size_t pos = 0;
  while (pos < run.size()) {
    std::vector<std::vector<Word>> segs;
    std::vector<Word> cur;
    all_segmentations(run.substr(pos), 0, lexicon, cur, segs);
    std::vector<std::vector<Word>> chunks;
    for (const auto& s : segs) {
      std::vector<Word> c(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(3, s.size())));
      if (std::find(chunks.begin(), chunks.end(), c) == chunks.end()) chunks.push_back(c);
    }
    const std::vector<Word>* best = &chunks.front();
    for (const auto& c : chunks) {
      if (chunk_ahead(c, *best, freq)) best = &c;
    }
    out.push_back(best->front());
    pos += best->front().size();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Symmetric eigenproblem by cyclic Jacobi rotations; classical MDS on top.

struct EigenPairs {
  std::vector<double> values;               // descending
  std::vector<std::vector<double>> vectors;  // vectors[i] belongs to values[i]
};

inline EigenPairs jacobi_eigen(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  EigenPairs out;
  for (std::size_t i : order) {
    out.values.push_back(a[i][i]);
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v[k][i];
    out.vectors.push_back(col);
  }
  return out;
}

/// Classical MDS coordinates (n x dims), with each axis flipped so its
/// largest-magnitude entry is positive.
inline std::vector<std::vector<double>> mds(const std::vector<std::vector<double>>& d, std::size_t dims) {
  const std::size_t n = d.size();
  std::vector<std::vector<double>> b(n, std::vector<double>(n));
  // B = -1/2 J D^2 J with J = I - 11^T / n, expanded term by term
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
          const double jik = (i == k ? 1.0 : 0.0) - 1.0 / n;
          const double jlj = (l == j ? 1.0 : 0.0) - 1.0 / n;
          s += jik * d[k][l] * d[k][l] * jlj;
        }
      }
      b[i][j] = -0.5 * s;
    }
  }
  const EigenPairs e = jacobi_eigen(b);
  std::vector<std::vector<double>> x(n, std::vector<double>(dims, 0.0));
  for (std::size_t a = 0; a < dims; ++a) {
    if (e.values[a] <= 1e-10) continue;
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(e.vectors[a][i]) > std::abs(e.vectors[a][arg])) arg = i;
    const double sign = e.vectors[a][arg] < 0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) x[i][a] = sign * e.vectors[a][i] * std::sqrt(e.values[a]);
  }
  return x;
}

/// Root-mean-square residual after the best rigid motion (rotation or
/// reflection plus translation) of `x` onto `y`.
inline double procrustes_rmse(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const Eigen::RowVectorXd mx = x.colwise().mean(), my = y.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - mx, yc = y.rowwise() - my;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(xc.transpose() * yc, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd r = svd.matrixU() * svd.matrixV().transpose();
  const Eigen::MatrixXd diff = xc * r - yc;
  return std::sqrt(diff.squaredNorm() / static_cast<double>(x.rows()));
}

inline Eigen::MatrixXd euclidean_distances(const Eigen::MatrixXd& pts) {
  const Eigen::Index n = pts.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = (pts.row(i) - pts.row(j)).norm();
  return d;
}

// ---------------------------------------------------------------------------
// Planted topics: `topics` blocks of `words_per_topic` disjoint words, each
// document drawn from one block only.

struct PlantedCorpus {
  std::vector<std::vector<std::string>> docs;  // tokens
  std::vector<std::size_t> doc_topic;
  std::vector<std::vector<double>> true_phi;   // over word names "w00".."wNN"
  std::vector<std::string> words;
};

inline PlantedCorpus planted_corpus(std::size_t topics, std::size_t words_per_topic, std::size_t docs,
                                    std::size_t doc_len, std::uint64_t seed) {
  PlantedCorpus out;
  const std::size_t v = topics * words_per_topic;
  for (std::size_t w = 0; w < v; ++w) {
    char name[8];
    std::snprintf(name, sizeof name, "w%02zu", w);
    out.words.push_back(name);
  }
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < topics; ++t) {
    std::vector<double> row(v, 0.0);
    for (std::size_t j = 0; j < words_per_topic; ++j) row[t * words_per_topic + j] = 1.0 / words_per_topic;
    out.true_phi.push_back(row);
  }
  std::uniform_int_distribution<std::size_t> pick(0, words_per_topic - 1);
  for (std::size_t d = 0; d < docs; ++d) {
    const std::size_t t = d % topics;
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < doc_len; ++i) tokens.push_back(out.words[t * words_per_topic + pick(rng)]);
    out.docs.push_back(std::move(tokens));
    out.doc_topic.push_back(t);
  }
  return out;
}

}  // namespace oracle
