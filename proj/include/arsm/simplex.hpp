#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "arsm/rng.hpp"

namespace arsm {

/// Logits of one categorical distribution (one softmax head).
/// Always holds at least two finite entries.
class LogitVector {
 public:
  explicit LogitVector(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// Category probabilities; entries in [0, 1] summing to one.
class ProbVector {
 public:
  explicit ProbVector(std::vector<double> probs);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> values() const { return probs_; }

 private:
  std::vector<double> probs_;
};

/// A point on the probability simplex drawn from Dir(1_C), with cached
/// logarithms so racing comparisons can stay in the log domain.
struct SimplexPoint {
  std::vector<double> pi;
  std::vector<double> log_pi;

  std::size_t size() const { return pi.size(); }

  /// Normalizes positive weights onto the simplex.
  static SimplexPoint from_weights(std::span<const double> weights);
  /// Wraps an existing simplex point; validates positivity and the sum.
  static SimplexPoint from_probs(std::vector<double> pi);
};

/// Numerically stable softmax (max subtraction). Throws on non-finite input.
ProbVector softmax(std::span<const double> phi);
inline ProbVector softmax(const LogitVector& phi) { return softmax(phi.values()); }

/// ln softmax(phi), stable for large |phi|.
std::vector<double> log_softmax(std::span<const double> phi);

/// ln sum exp, stable. Empty input gives -inf.
double log_sum_exp(std::span<const double> values);

/// Dir(1_C) draw as normalized iid standard exponentials.
SimplexPoint sample_dirichlet_ones(std::size_t num_categories, RngStream& rng);

/// z = argmin_i (ln pi_i - phi_i); ties go to the lowest index.
std::size_t racing_sample(std::span<const double> phi, const SimplexPoint& pi);
inline std::size_t racing_sample(const LogitVector& phi, const SimplexPoint& pi) {
  return racing_sample(phi.values(), pi);
}

/// Draws tau_i ~ Exp(lambda_i) n times and returns the empirical frequency
/// with which each index wins the race (is the argmin).
std::vector<double> exponential_racing_check(std::span<const double> lambdas,
                                             std::size_t n, RngStream& rng);

}  // namespace arsm
