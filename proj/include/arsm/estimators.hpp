#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "arsm/pseudo_actions.hpp"
#include "arsm/rng.hpp"
#include "arsm/simplex.hpp"

namespace arsm {

enum class EstimatorId { Analytic, Reinforce, Ar, Ars, Arsm };

std::string_view to_string(EstimatorId id);
/// Accepts "analytic", "reinforce", "ar", "ars", "arsm" (case-insensitive).
EstimatorId parse_estimator(std::string_view name);

/// Reward over a single category, with an evaluation counter.
class RewardFn {
 public:
  explicit RewardFn(std::function<double(std::size_t)> f) : f_(std::move(f)) {}
  double operator()(std::size_t z) const {
    ++evaluations_;
    return f_(z);
  }
  std::size_t evaluations() const { return evaluations_; }

 private:
  std::function<double(std::size_t)> f_;
  mutable std::size_t evaluations_ = 0;
};

/// Reward over a vector of categories (one per head), with an evaluation counter.
class VectorRewardFn {
 public:
  using Fn = std::function<double(std::span<const std::size_t>)>;
  explicit VectorRewardFn(Fn f) : f_(std::move(f)) {}
  double operator()(std::span<const std::size_t> z) const {
    ++evaluations_;
    return f_(z);
  }
  std::size_t evaluations() const { return evaluations_; }

 private:
  Fn f_;
  mutable std::size_t evaluations_ = 0;
};

/// Per-head gradient with respect to the logits, grad[k][c].
struct GradEstimate {
  EstimatorId estimator = EstimatorId::Analytic;
  std::vector<std::vector<double>> grad;
  std::size_t f_evals = 0;

  /// Single-head convenience accessor.
  const std::vector<double>& values() const { return grad.front(); }
};

/// Reference categories for ARS, one per head.
struct ReferenceChoice {
  std::vector<std::size_t> j;

  /// Uniform over categories; rng should be a stream separate from the one
  /// producing the Dirichlet draws.
  static ReferenceChoice draw(std::size_t heads, std::size_t num_categories, RngStream& rng);
};

/// Exact gradient sigma_c (f(c) - E), C reward evaluations.
GradEstimate analytic_grad_univariate(const LogitVector& phi, const RewardFn& f);

/// Score-function estimate for an observed category z.
GradEstimate reinforce_grad_at(const LogitVector& phi, const RewardFn& f, std::size_t z);
/// Score-function estimate with z drawn by inverse CDF from rng.
GradEstimate reinforce_grad(const LogitVector& phi, const RewardFn& f, RngStream& rng);

/// f(z) (1 - C pi_c) with z the racing sample under pi.
GradEstimate ar_grad(const LogitVector& phi, const RewardFn& f, const SimplexPoint& pi);

/// Swap estimator against one reference category.
GradEstimate ars_grad(const LogitVector& phi, const RewardFn& f, const SimplexPoint& pi,
                      const ReferenceChoice& ref);

/// Swap-merge estimator. The reward is evaluated once per distinct pseudo
/// action; f_evals reports that count.
GradEstimate arsm_grad(const LogitVector& phi, const RewardFn& f, const SimplexPoint& pi);

/// Binary ARM estimate with shared uniform u, written from the two-category
/// formula directly (sigmoid threshold on u and 1 - u). Requires C = 2.
GradEstimate arm_binary_grad(const LogitVector& phi, const RewardFn& f, double u);

/// g_c = sum_j (F_cj - mean_m F_mj) (1/C - pi_j) for a C x C row-major
/// reward matrix F.
std::vector<double> arsm_from_reward_matrix(std::span<const double> rewards,
                                            std::span<const double> pi);

/// g_c = (F_c - mean F) (1 - C pi_j) for the pseudo-action rewards F_c of one
/// reference column j.
std::vector<double> ars_from_reward_column(std::span<const double> column, double pi_j);

/// Pseudo-action bookkeeping produced by multivariate_grad, exposed for
/// diagnostics.
struct MultivariateTrace {
  std::vector<std::size_t> true_action;
  std::vector<double> reward_matrix;  // C x C for ARSM, C for ARS, 1 otherwise
  std::vector<std::size_t> unique_others_per_head;
};

/// Multivariate estimator over K heads sharing C categories.
///
/// Mode AR, ARS, ARSM or REINFORCE (z taken from the racing samples under Pi).
/// ARS needs `ref`; ARSM uses the shared reference j * 1_K for every j.
/// Rewards are cached per distinct action vector.
GradEstimate multivariate_grad(std::span<const LogitVector> phi, const VectorRewardFn& f,
                               std::span<const SimplexPoint> pi, EstimatorId mode,
                               const ReferenceChoice* ref = nullptr,
                               MultivariateTrace* trace = nullptr);

/// One single-sample univariate estimate of any kind. Dirichlet draws and the
/// REINFORCE category come from rng; the ARS reference from a split of it.
GradEstimate estimate_univariate(EstimatorId id, const LogitVector& phi, const RewardFn& f,
                                 RngStream& rng);

/// sum_k sum_c g[k][c] phi[k][c]; its gradient in phi is g, so chaining it
/// through the network producing phi yields the parameter gradient.
double surrogate_loss(const GradEstimate& g, std::span<const LogitVector> phi);
double surrogate_loss(const GradEstimate& g, std::span<const std::vector<double>> phi);

}  // namespace arsm
