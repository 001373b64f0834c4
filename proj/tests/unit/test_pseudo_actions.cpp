#include <chrono>
#include <set>
#include <stdexcept>
#include <vector>

#include "arsm/pseudo_actions.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace arsm;

namespace {

std::vector<double> random_phi(std::size_t C, RngStream& rng, double scale = 3.0) {
  std::vector<double> phi(C);
  for (double& v : phi) v = rng.uniform(-scale, scale);
  return phi;
}

void check_against_oracle(const PseudoActionTable& t, const std::vector<double>& phi,
                          const SimplexPoint& pi) {
  const auto o = oracle::pseudo_table(phi, pi.pi);
  for (std::size_t m = 0; m < phi.size(); ++m)
    for (std::size_t j = 0; j < phi.size(); ++j) REQUIRE(t.at(m, j) == o[m][j]);
}

}  // namespace

TEST_CASE("swap: definition, identity, involution, range") {
  const SimplexPoint pi = SimplexPoint::from_probs({0.2, 0.3, 0.5});
  const SimplexPoint s = swap(pi, 0, 2);
  CHECK(s.pi == std::vector<double>{0.5, 0.3, 0.2});
  CHECK(s.log_pi[0] == pi.log_pi[2]);
  CHECK(swap(pi, 1, 1).pi == pi.pi);
  const SimplexPoint back = swap(swap(pi, 0, 2), 0, 2);
  CHECK(back.pi == pi.pi);
  CHECK(back.log_pi == pi.log_pi);
  CHECK_THROWS_AS(swap(pi, 0, 3), std::invalid_argument);
}

TEST_CASE("naive table: C = 2 structure") {
  RngStream rng(1, 0);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform_open();
    const std::vector<double> phi = random_phi(2, rng);
    const auto t = pseudo_action_table_naive(phi, SimplexPoint::from_probs({u, 1.0 - u}));
    CHECK(t.at(0, 1) == t.at(1, 0));
    CHECK(t.unique_others().size() <= 1);
  }
}

TEST_CASE("naive table: matches the brute-force oracle and is symmetric with z on the diagonal") {
  RngStream rng(2, 0);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> phi = random_phi(5, rng);
    const SimplexPoint pi = sample_dirichlet_ones(5, rng);
    const auto t = pseudo_action_table_naive(phi, pi);
    check_against_oracle(t, phi, pi);
    CHECK(t.true_action() == oracle::race(phi, pi.pi));
    for (std::size_t m = 0; m < 5; ++m) {
      CHECK(t.at(m, m) == t.true_action());
      for (std::size_t j = 0; j < 5; ++j) CHECK(t.at(m, j) == t.at(j, m));
    }
  }
}

TEST_CASE("dominant logit wins every swap") {
  RngStream rng(3, 0);
  for (std::size_t C : {3, 5, 10}) {
    std::vector<double> phi(C, 0.0);
    phi[0] = 50.0;
    SimplexPoint pi = sample_dirichlet_ones(C, rng);
    for (const auto& t : {pseudo_action_table_naive(phi, pi), pseudo_action_table_fast(phi, pi)}) {
      CHECK(t.all_equal_true_action());
      for (std::size_t m = 0; m < C; ++m)
        for (std::size_t j = 0; j < C; ++j) CHECK(t.at(m, j) == 0);
    }
  }
}

TEST_CASE("fast table equals naive table exactly, C in 2..20") {
  RngStream rng(4, 0);
  for (int i = 0; i < 20000; ++i) {
    const std::size_t C = 2 + rng.uniform_index(19);
    const double scale = (i % 3 == 0) ? 0.0 : (i % 3 == 1 ? 1.0 : 6.0);
    const std::vector<double> phi = random_phi(C, rng, scale);
    const SimplexPoint pi = sample_dirichlet_ones(C, rng);
    const auto fast = pseudo_action_table_fast(phi, pi);
    const auto naive = pseudo_action_table_naive(phi, pi);
    REQUIRE(fast.true_action() == naive.true_action());
    for (std::size_t m = 0; m < C; ++m)
      for (std::size_t j = 0; j < C; ++j) REQUIRE(fast.at(m, j) == naive.at(m, j));
    REQUIRE(fast.unique_others() == naive.unique_others());
  }
}

TEST_CASE("fast table on exact ties in pi and phi") {
  // Equal Dirichlet coordinates and equal logits exercise the tie rule.
  const std::vector<double> phi = {0.0, 0.0, 0.0, 0.0};
  const SimplexPoint pi = SimplexPoint::from_weights(std::vector<double>{1.0, 1.0, 2.0, 2.0});
  check_against_oracle(pseudo_action_table_fast(phi, pi), phi, pi);
  check_against_oracle(pseudo_action_table_naive(phi, pi), phi, pi);
}

TEST_CASE("uniform logits: structure and single pseudo_action helper") {
  RngStream rng(5, 0);
  const std::size_t C = 12;
  const std::vector<double> phi(C, 0.0);
  const SimplexPoint pi = sample_dirichlet_ones(C, rng);
  const auto t = pseudo_action_table_fast(phi, pi);
  const auto o = oracle::pseudo_table(phi, pi.pi);
  for (std::size_t m = 0; m < C; ++m)
    for (std::size_t j = 0; j < C; ++j) {
      CHECK(t.at(m, j) == t.at(j, m));
      CHECK(pseudo_action(phi, pi, t.true_action(), m, j) == o[m][j]);
      // Away from z, a swap can only move the winner onto m or j.
      if (m != t.true_action() && j != t.true_action()) {
        const std::size_t a = t.at(m, j);
        CHECK((a == t.true_action() || a == m || a == j));
      }
    }
}

TEST_CASE("sparse storage above the dense limit") {
  RngStream rng(6, 0);
  const std::size_t C = PseudoActionTable::kDenseLimit + 88;
  const std::vector<double> phi = random_phi(C, rng, 1.0);
  const SimplexPoint pi = sample_dirichlet_ones(C, rng);
  const auto t = pseudo_action_table_fast(phi, pi);
  CHECK_FALSE(t.is_dense());
  for (int k = 0; k < 3000; ++k) {
    const std::size_t m = rng.uniform_index(C), j = rng.uniform_index(C);
    REQUIRE(t.at(m, j) == pseudo_action(phi, pi, t.true_action(), m, j));
  }
  for (std::size_t j = 0; j < C; j += 37) {
    REQUIRE(t.at(j, t.true_action()) == pseudo_action(phi, pi, t.true_action(), j, t.true_action()));
  }
  CHECK_THROWS_AS(t.at(C, 0), std::out_of_range);
}

TEST_CASE("C = 10000 fast table well under one second") {
  RngStream rng(7, 0);
  const std::size_t C = 10000;
  std::vector<double> phi(C, 0.0);
  const SimplexPoint pi = sample_dirichlet_ones(C, rng);
  const auto start = std::chrono::steady_clock::now();
  const auto t = pseudo_action_table_fast(phi, pi);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  MESSAGE("C=10000 fast table: " << secs << " s, " << t.unique_others().size() << " unique others");
  CHECK(secs < 0.5);
  CHECK(t.true_action() == oracle::race(phi, pi.pi));
}

TEST_CASE("dimension mismatch") {
  const SimplexPoint pi = SimplexPoint::from_probs({0.5, 0.5});
  CHECK_THROWS_AS(pseudo_action_table_fast(std::vector<double>{0, 0, 0}, pi), std::invalid_argument);
  CHECK_THROWS_AS(pseudo_action_table_naive(std::vector<double>{0, 0, 0}, pi), std::invalid_argument);
}
