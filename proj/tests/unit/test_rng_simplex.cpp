#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "arsm/rng.hpp"
#include "arsm/simplex.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "stats.hpp"

using namespace arsm;

TEST_CASE("rng: identical keys give identical streams, split leaves parent untouched") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  RngStream child = a.split(3);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs = differs || x != c.next();
  }
  CHECK(differs);
  RngStream child2 = RngStream(42, 7).split(3);
  CHECK(child.next() == child2.next());
  CHECK(derive_stream_id({1, 2}) != derive_stream_id({2, 1}));
}

TEST_CASE("rng: uniform_open stays inside (0, 1) and uniform_index in range") {
  RngStream r(1, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform_open();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    REQUIRE(r.uniform_index(7) < 7);
  }
  CHECK_THROWS_AS(r.uniform_index(0), std::invalid_argument);
}

TEST_CASE("softmax: hand cases") {
  const ProbVector p = softmax(std::vector<double>{0, 0, 0, 0});
  for (std::size_t i = 0; i < 4; ++i) CHECK(p[i] == doctest::Approx(0.25).epsilon(1e-15));

  const ProbVector q = softmax(std::vector<double>{std::log(1.0), std::log(2.0), std::log(3.0), std::log(4.0)});
  const double expect[] = {0.1, 0.2, 0.3, 0.4};
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(q[i] - expect[i]) < 1e-15);

  const ProbVector big = softmax(std::vector<double>{1000.0, 0.0});
  CHECK(std::abs(big[0] - 1.0) < 1e-12);
  CHECK(std::abs(big[1]) < 1e-12);
}

TEST_CASE("softmax: errors and shift invariance") {
  CHECK_THROWS_AS(softmax(std::vector<double>{0.0, NAN}), std::invalid_argument);
  CHECK_THROWS_AS(softmax(std::vector<double>{INFINITY, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(LogitVector(std::vector<double>{1.0}), std::invalid_argument);
  const std::vector<double> phi = {0.3, -1.2, 2.5};
  std::vector<double> shifted = phi;
  for (double& v : shifted) v += 123.0;
  const ProbVector a = softmax(phi), b = softmax(shifted);
  const auto o = oracle::softmax(phi);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(a[i] - b[i]) < 1e-14);
    CHECK(std::abs(a[i] - o[i]) < 1e-15);
  }
  const auto ls = log_softmax(phi);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(std::exp(ls[i]) - o[i]) < 1e-15);
}

TEST_CASE("dirichlet: C = 2 marginal is uniform (KS at 1%)") {
  RngStream rng(11, 0);
  const std::size_t n = 100000;
  std::vector<double> x(n);
  for (auto& v : x) v = sample_dirichlet_ones(2, rng).pi[0];
  CHECK(stats::ks_uniform(x) < stats::ks_critical_1pct(n));
}

TEST_CASE("dirichlet: normalization, marginal means, errors") {
  RngStream rng(12, 0);
  const std::size_t n = 100000, C = 5;
  stats::MeanAccumulator acc;
  for (std::size_t i = 0; i < n; ++i) {
    const SimplexPoint p = sample_dirichlet_ones(C, rng);
    const double s = std::accumulate(p.pi.begin(), p.pi.end(), 0.0);
    REQUIRE(std::abs(s - 1.0) < 1e-12);
    for (std::size_t c = 0; c < C; ++c) REQUIRE(std::abs(std::log(p.pi[c]) - p.log_pi[c]) < 1e-12);
    acc.add(p.pi);
  }
  // Var of a Dir(1_C) marginal: (C - 1) / (C^2 (C + 1)).
  const double sd = std::sqrt((C - 1.0) / (C * C * (C + 1.0)));
  for (std::size_t c = 0; c < C; ++c) CHECK(std::abs(acc.mean(c) - 0.2) < 3.0 * sd / std::sqrt(double(n)));
  CHECK_THROWS_AS(sample_dirichlet_ones(1, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_dirichlet_ones(0, rng), std::invalid_argument);
}

TEST_CASE("racing: hand case and tie rule") {
  CHECK(racing_sample(std::vector<double>{0, 0}, SimplexPoint::from_probs({0.1, 0.9})) == 0);
  CHECK(racing_sample(std::vector<double>{0, 0}, SimplexPoint::from_probs({0.9, 0.1})) == 1);
  CHECK(racing_sample(std::vector<double>{0, 0}, SimplexPoint::from_probs({0.5, 0.5})) == 0);
  CHECK_THROWS_AS(racing_sample(std::vector<double>{0, 0, 0}, SimplexPoint::from_probs({0.5, 0.5})),
                  std::invalid_argument);
}

TEST_CASE("racing: agrees with the linear-domain argmin") {
  RngStream rng(13, 0);
  for (int i = 0; i < 20000; ++i) {
    const std::size_t C = 2 + rng.uniform_index(9);
    std::vector<double> phi(C);
    for (double& v : phi) v = rng.uniform(-3, 3);
    const SimplexPoint pi = sample_dirichlet_ones(C, rng);
    REQUIRE(racing_sample(phi, pi) == oracle::race(phi, pi.pi));
  }
}

TEST_CASE("racing: uniform logits give uniform categories (chi-square)") {
  RngStream rng(14, 0);
  std::vector<double> counts(4, 0.0);
  const std::vector<double> phi(4, 0.0);
  for (int i = 0; i < 100000; ++i) counts[racing_sample(phi, sample_dirichlet_ones(4, rng))] += 1;
  CHECK(stats::chi_square_p(counts, {0.25, 0.25, 0.25, 0.25}) > 0.01);
}

TEST_CASE("racing: C = 6 random logits match softmax over 10^6 draws") {
  RngStream rng(15, 0);
  std::vector<double> phi(6);
  for (double& v : phi) v = rng.uniform(-2, 2);
  std::vector<double> counts(6, 0.0);
  for (int i = 0; i < 1000000; ++i) counts[racing_sample(phi, sample_dirichlet_ones(6, rng))] += 1;
  CHECK(stats::chi_square_p(counts, oracle::softmax(phi)) > 0.01);
}

TEST_CASE("exponential racing: win frequencies are rate proportions") {
  RngStream rng(16, 0);
  auto check = [&](std::vector<double> lambda, std::size_t n) {
    const auto freq = exponential_racing_check(lambda, n, rng);
    const double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    for (std::size_t i = 0; i < lambda.size(); ++i) {
      const double p = lambda[i] / total;
      CHECK(std::abs(freq[i] - p) < 3.0 * std::sqrt(p * (1 - p) / double(n)));
    }
  };
  check({1, 1}, 100000);
  check({1, 3}, 100000);
  check({2, 3, 5}, 1000000);
  CHECK_THROWS_AS(exponential_racing_check(std::vector<double>{1.0, 0.0}, 10, rng), std::invalid_argument);
  CHECK_THROWS_AS(exponential_racing_check(std::vector<double>{1.0, -2.0}, 10, rng), std::invalid_argument);
}

TEST_CASE("simplex point validation") {
  CHECK_THROWS_AS(SimplexPoint::from_probs({0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(SimplexPoint::from_probs({1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(SimplexPoint::from_weights(std::vector<double>{1.0, -1.0}), std::invalid_argument);
  const SimplexPoint p = SimplexPoint::from_weights(std::vector<double>{1.0, 3.0});
  CHECK(p.pi[1] == doctest::Approx(0.75));
  CHECK(log_sum_exp(std::vector<double>{}) == -INFINITY);
  CHECK(log_sum_exp(std::vector<double>{1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
}
