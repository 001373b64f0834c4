#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arsm/estimators.hpp"
#include "arsm/simplex.hpp"

namespace arsm {

/// Exponential moving averages of the first and second moments of a vector
/// stream. Reported moments are bias-corrected by 1 - decay^count.
class EmaMoments {
 public:
  explicit EmaMoments(double decay);

  void update(std::span<const double> sample);

  double decay() const { return decay_; }
  std::size_t count() const { return count_; }
  std::size_t dim() const { return m1_.size(); }
  std::vector<double> mean() const;
  /// m2 - m1^2 after correction, clamped at zero; exactly zero after one update.
  std::vector<double> variance() const;

 private:
  double decay_;
  std::size_t count_ = 0;
  std::vector<double> m1_;
  std::vector<double> m2_;
};

/// Functional form of EmaMoments::update.
EmaMoments ema_update(EmaMoments state, std::span<const double> sample);

/// log10 of the average per-component variance. Missing while the state has
/// fewer than `min_count` updates or when the variance is exactly zero.
std::optional<double> log_variance_report(const EmaMoments& state, std::size_t min_count = 10);

/// Per-component unbiased sample variance of a batch of equal-length vectors.
std::vector<double> batch_variance(const std::vector<std::vector<double>>& samples);

/// log10 of the average per-component batch variance; missing when zero.
std::optional<double> log10_mean_variance(const std::vector<std::vector<double>>& samples);

/// Univariate test problem with an analytic gradient.
struct UnbiasednessInstance {
  std::string name;
  LogitVector phi;
  std::function<double(std::size_t)> reward;
};

/// Deliberate defects used as negative controls.
enum class EstimatorFault {
  None,
  FrozenDirichlet,   // reuse one Dirichlet draw for every sample
  ArsmMergeSignFlip  // negate the merged ARSM estimate
};

struct UnbiasednessResult {
  std::string instance;
  EstimatorId estimator = EstimatorId::Analytic;
  std::size_t samples = 0;
  std::vector<double> mean;
  std::vector<double> oracle;
  std::vector<double> std_error;
  std::vector<double> z;
  double max_abs_z = 0.0;
  double z_limit = 4.0;
  bool pass = false;
};

/// Monte Carlo mean of n single-sample estimates compared componentwise with
/// the analytic gradient; fails if any |z| exceeds z_limit.
UnbiasednessResult unbiasedness_check(EstimatorId estimator, const UnbiasednessInstance& instance,
                                      std::size_t n, std::uint64_t seed, double z_limit = 4.0,
                                      EstimatorFault fault = EstimatorFault::None);

/// Runs every estimator on every instance.
std::vector<UnbiasednessResult> unbiasedness_suite(const std::vector<EstimatorId>& estimators,
                                                   const std::vector<UnbiasednessInstance>& instances,
                                                   std::size_t n, std::uint64_t seed,
                                                   double z_limit = 4.0,
                                                   EstimatorFault fault = EstimatorFault::None);

/// Fifteen instances over C in {2, 3, 5, 10} with rewards z, z^2 and an
/// indicator of the last category (categories counted from 1), random logits.
std::vector<UnbiasednessInstance> default_unbiasedness_instances(std::uint64_t seed);

}  // namespace arsm
