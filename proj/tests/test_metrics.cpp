#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "topicshelf/metrics.hpp"

using namespace topicshelf;
using metrics::Distribution;

TEST(Metrics, HandCheckableCase) {
  const Distribution p({1.0, 0.0}), q({0.5, 0.5});
  EXPECT_NEAR(metrics::js_divergence(p, q), static_cast<double>(oracle::jsd({1, 0}, {0.5, 0.5})), 1e-12);
  EXPECT_NEAR(metrics::js_divergence(p, q), 0.311278, 1e-6);
  EXPECT_NEAR(metrics::js_distance(p, q), 0.557924, 1e-6);
  EXPECT_NEAR(metrics::similarity(p, q), 0.442076, 1e-6);
  EXPECT_NEAR(metrics::js_distance(p, q), std::sqrt(1.5 - 0.75 * std::log2(3.0)), 1e-12);
}

TEST(Metrics, KlInBits) {
  const Distribution p({1.0, 0.0}), q({0.75, 0.25});
  EXPECT_NEAR(metrics::kl_divergence(p, q), std::log2(4.0 / 3.0), 1e-12);
  EXPECT_DOUBLE_EQ(metrics::kl_divergence(p, p), 0.0);
}

TEST(Metrics, KlInfiniteOutsideSupport) {
  const Distribution p({0.5, 0.5}), q({1.0, 0.0});
  EXPECT_TRUE(std::isinf(metrics::kl_divergence(p, q)));
  EXPECT_TRUE(std::isfinite(metrics::js_distance(p, q)));
}

TEST(Metrics, DisjointSupportsAreAtDistanceOne) {
  const Distribution p({0.5, 0.5, 0, 0}), q({0, 0, 0.25, 0.75});
  EXPECT_DOUBLE_EQ(metrics::js_divergence(p, q), 1.0);
  EXPECT_DOUBLE_EQ(metrics::js_distance(p, q), 1.0);
  EXPECT_DOUBLE_EQ(metrics::similarity(p, q), 0.0);
}

TEST(Metrics, IdenticalDistributionsAtDistanceZero) {
  std::mt19937_64 rng(3);
  const auto v = gen::random_distribution(rng, 50);
  const Distribution p(v);
  EXPECT_EQ(metrics::js_distance(p, p), 0.0);
  EXPECT_EQ(metrics::similarity(p, p), 1.0);
}

TEST(Metrics, RejectsInvalidDistributions) {
  EXPECT_THROW(Distribution({0.5, 0.6}), Error);
  EXPECT_THROW(Distribution({-0.1, 1.1}), Error);
  EXPECT_THROW(Distribution({std::numeric_limits<double>::quiet_NaN(), 1.0}), Error);
  try {
    Distribution({0.2, 0.2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidDistribution);
  }
}

TEST(Metrics, RenormalizesWithinTolerance) {
  const Distribution p({0.5, 0.5 + 5e-7});
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
}

TEST(Metrics, DimensionMismatch) {
  try {
    metrics::js_distance(Distribution({1.0}), Distribution({0.5, 0.5}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(Metrics, MatchesOracleOnRandomPairs) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> dim(2, 200);
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = dim(rng);
    const Distribution p(gen::random_distribution(rng, n)), q(gen::random_distribution(rng, n));
    const std::vector<double> a(p.probs().begin(), p.probs().end());
    const std::vector<double> b(q.probs().begin(), q.probs().end());
    EXPECT_NEAR(metrics::js_distance(p, q), static_cast<double>(oracle::js_distance(a, b)), 1e-12);
    EXPECT_NEAR(metrics::kl_divergence(p, Distribution(std::vector<double>(n, 1.0 / n))),
                static_cast<double>(oracle::kl(a, std::vector<double>(n, 1.0 / n))), 1e-12);
  }
}

TEST(MetricsProperty, BoundedSymmetricTriangle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> dim(2, 500);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = dim(rng);
    const Distribution p(gen::random_distribution(rng, n)), q(gen::random_distribution(rng, n));
    const double d = metrics::js_distance(p, q);
    ASSERT_GE(d, 0.0);
    ASSERT_LE(d, 1.0);
    ASSERT_EQ(d, metrics::js_distance(q, p));
  }
  for (int i = 0; i < 300; ++i) {
    const std::size_t n = dim(rng);
    const Distribution p(gen::random_distribution(rng, n)), q(gen::random_distribution(rng, n)),
        r(gen::random_distribution(rng, n));
    ASSERT_LE(metrics::js_distance(p, r), metrics::js_distance(p, q) + metrics::js_distance(q, r) + 1e-9);
  }
}
