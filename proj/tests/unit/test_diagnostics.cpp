#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "arsm/diagnostics.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace arsm;

TEST_CASE("ema: first update has zero variance and a debiased mean") {
  EmaMoments e(0.99);
  const std::vector<double> x = {3.0, -1.5};
  e.update(x);
  CHECK(e.variance() == std::vector<double>{0.0, 0.0});
  CHECK(e.mean()[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(e.mean()[1] == doctest::Approx(-1.5).epsilon(1e-14));
  CHECK_THROWS_AS(EmaMoments(1.0), std::invalid_argument);
  CHECK_THROWS_AS(EmaMoments(0.0), std::invalid_argument);
  CHECK_THROWS_AS(e.update(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("ema: constant stream variance vanishes") {
  EmaMoments e(0.99);
  const std::vector<double> c = {0.7, 12.0, -3.0};
  for (int i = 0; i < 10000; ++i) e.update(c);
  for (double v : e.variance()) CHECK(v < 1e-10);
}

TEST_CASE("ema: iid standard normal stream") {
  EmaMoments e(0.99);
  std::mt19937_64 gen(7);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(20);
  double mean_var = 0.0;
  const int updates = 100000;
  for (int i = 0; i < updates; ++i) {
    for (double& v : x) v = n(gen);
    e.update(x);
    // Average the estimate over the second half of the stream.
    if (i >= updates / 2) {
      double s = 0.0;
      for (double v : e.variance()) s += v;
      mean_var += s / x.size() / (updates / 2);
    }
  }
  // With d = 0.99 the debiased EMA variance has expectation 1 - (1 - d)/(1 + d).
  CHECK(std::abs(mean_var - 1.0) < 0.1);
  const auto report = log_variance_report(e);
  REQUIRE(report.has_value());
  CHECK(std::abs(*report) < std::log10(1.1));
}

TEST_CASE("ema: functional update matches the method") {
  EmaMoments a(0.9), b(0.9);
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> x = {std::sin(i), std::cos(3.0 * i)};
    a.update(x);
    b = ema_update(b, x);
  }
  CHECK(a.mean() == b.mean());
  CHECK(a.variance() == b.variance());
}

TEST_CASE("variance report: cold state and zero gradients are missing") {
  EmaMoments e(0.99);
  CHECK_FALSE(log_variance_report(e).has_value());
  for (int i = 0; i < 9; ++i) e.update(std::vector<double>{double(i), 1.0});
  CHECK_FALSE(log_variance_report(e).has_value());
  e.update(std::vector<double>{5.0, 1.0});
  CHECK(log_variance_report(e).has_value());

  EmaMoments z(0.99);
  for (int i = 0; i < 100; ++i) z.update(std::vector<double>{0.0, 0.0, 0.0});
  CHECK_FALSE(log_variance_report(z).has_value());

  EmaMoments p(0.99), q(0.99);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> x = {std::sin(0.1 * i), 2.0 * std::cos(0.3 * i)};
    p.update(x);
    q.update(x);
  }
  CHECK(*log_variance_report(p) == *log_variance_report(q));
}

TEST_CASE("batch variance") {
  const std::vector<std::vector<double>> s = {{1.0, 5.0}, {2.0, 5.0}, {3.0, 5.0}, {6.0, 5.0}};
  const auto v = batch_variance(s);
  CHECK(v[0] == doctest::Approx(14.0 / 3.0));
  CHECK(v[1] == 0.0);
  CHECK(*log10_mean_variance(s) == doctest::Approx(std::log10(7.0 / 3.0)));
  // Large offsets do not leak rounding noise into a constant component.
  const std::vector<std::vector<double>> c(100, std::vector<double>{0.5333333333333333});
  CHECK_FALSE(log10_mean_variance(c).has_value());
  CHECK_THROWS_AS(batch_variance({{1.0}}), std::invalid_argument);
}

TEST_CASE("unbiasedness check: analytic vs itself, ARSM passes, frozen noise and sign flip fail") {
  RngStream rng(1, 0);
  std::vector<double> phi(5);
  for (double& v : phi) v = rng.uniform(-1.5, 1.5);
  const UnbiasednessInstance inst{"c5", LogitVector(phi),
                                  [](std::size_t z) { return double((z + 1) * (z + 1)); }};
  const auto a = unbiasedness_check(EstimatorId::Analytic, inst, 10, 1);
  CHECK(a.pass);
  for (double z : a.z) CHECK(z == 0.0);

  const auto ok = unbiasedness_check(EstimatorId::Arsm, inst, 1000000, 2);
  CHECK(ok.pass);
  CHECK(ok.max_abs_z <= 4.0);
  std::vector<double> f(5);
  for (std::size_t c = 0; c < 5; ++c) f[c] = double((c + 1) * (c + 1));
  const auto exact = oracle::exact_gradient(phi, f);
  for (std::size_t c = 0; c < 5; ++c) CHECK(ok.oracle[c] == doctest::Approx(exact[c]).epsilon(1e-13));

  CHECK_FALSE(unbiasedness_check(EstimatorId::Ar, inst, 200000, 3, 4.0, EstimatorFault::FrozenDirichlet).pass);
  CHECK_FALSE(unbiasedness_check(EstimatorId::Arsm, inst, 200000, 3, 4.0, EstimatorFault::ArsmMergeSignFlip).pass);
  CHECK(unbiasedness_check(EstimatorId::Ar, inst, 200000, 3, 4.0, EstimatorFault::ArsmMergeSignFlip).pass);
}

TEST_CASE("default instances cover the required shapes") {
  const auto inst = default_unbiasedness_instances(5);
  CHECK(inst.size() == 15);
  std::set<std::size_t> sizes;
  for (const auto& i : inst) sizes.insert(i.phi.size());
  CHECK(sizes == std::set<std::size_t>{2, 3, 5, 10});
  const auto again = default_unbiasedness_instances(5);
  for (std::size_t i = 0; i < inst.size(); ++i) {
    CHECK(inst[i].name == again[i].name);
    for (std::size_t c = 0; c < inst[i].phi.size(); ++c) CHECK(inst[i].phi[c] == again[i].phi[c]);
  }
}
