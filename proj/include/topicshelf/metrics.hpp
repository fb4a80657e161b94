#pragma once

// Information-theoretic comparisons between discrete distributions. All
// logarithms are base 2, so divergences are in bits and the Jensen-Shannon
// distance lies in [0, 1].

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "topicshelf/error.hpp"

namespace topicshelf::metrics {

inline constexpr double kSumTolerance = 1e-6;

/// A validated probability vector: non-negative, summing to 1. Inputs whose
/// sum is within kSumTolerance of 1 are renormalized, anything else throws.
class Distribution {
 public:
  Distribution() = default;

  explicit Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw Error(ErrorKind::InvalidDistribution,
                    "negative or non-finite probability");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw Error(ErrorKind::InvalidDistribution,
                  "probabilities sum to " + std::to_string(sum));
    }
    if (sum != 1.0) {
      for (double& p : probs_) p /= sum;
    }
  }

  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

 private:
  std::vector<double> probs_;
};

namespace detail {

inline void check_dims(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                std::to_string(p.size()) + " vs " + std::to_string(q.size()));
  }
}

// Sum of p_i * log2(p_i / q_i). Zero p_i terms are skipped explicitly.
inline double kl_bits(std::span<const double> p, std::span<const double> q) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    total += p[i] * std::log2(p[i] / q[i]);
  }
  return total;
}

// Both KL terms against the midpoint, accumulated per coordinate so that
// swapping p and q only swaps the operands of commutative additions.
inline double js_bits(std::span<const double> p, std::span<const double> q) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = p[i];
    const double b = q[i];
    if (a == 0.0 && b == 0.0) continue;
    const double m = 0.5 * (a + b);
    double term_a = 0.0;
    double term_b = 0.0;
    if (a != 0.0) term_a = a * std::log2(a / m);
    if (b != 0.0) term_b = b * std::log2(b / m);
    total += term_a + term_b;
  }
  return std::clamp(0.5 * total, 0.0, 1.0);
}

}  // namespace detail

/// KL(p || q) in bits; +inf when p puts mass where q has none.
inline double kl_divergence(const Distribution& p, const Distribution& q) {
  detail::check_dims(p.probs(), q.probs());
  return std::max(0.0, detail::kl_bits(p.probs(), q.probs()));
}

inline double js_divergence(const Distribution& p, const Distribution& q) {
  detail::check_dims(p.probs(), q.probs());
  return detail::js_bits(p.probs(), q.probs());
}

/// Square root of the Jensen-Shannon divergence; a metric bounded by 1.
inline double js_distance(const Distribution& p, const Distribution& q) {
  return std::sqrt(js_divergence(p, q));
}

inline double similarity(const Distribution& p, const Distribution& q) {
  return 1.0 - js_distance(p, q);
}

// Span overloads for rows of model matrices that are already normalized by
// construction; they skip the validation copy.
inline double js_distance_unchecked(std::span<const double> p,
                                    std::span<const double> q) {
  detail::check_dims(p, q);
  return std::sqrt(detail::js_bits(p, q));
}

inline double similarity_unchecked(std::span<const double> p,
                                   std::span<const double> q) {
  return 1.0 - js_distance_unchecked(p, q);
}

}  // namespace topicshelf::metrics
