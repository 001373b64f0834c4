#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "arsm/environments.hpp"
#include "arsm/estimators.hpp"
#include "arsm/network.hpp"
#include "arsm/pseudo_actions.hpp"
#include "arsm/rng.hpp"
#include "arsm/simplex.hpp"

namespace arsm {

struct TrajectoryStep {
  Eigen::VectorXd observation;
  LogitVector logits;
  SimplexPoint dirichlet;
  std::size_t action = 0;
  double reward = 0.0;
  std::shared_ptr<const Environment> snapshot;  // environment before the action
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;

  std::size_t horizon() const { return steps.size(); }
  double total_reward() const;
  /// Discounted return from every timestep, G_t = sum_{s >= t} gamma^{s-t} r_s.
  std::vector<double> returns(double gamma) const;
};

struct PolicyGradientOptions {
  EstimatorId estimator = EstimatorId::Arsm;  // Arsm, Ars or Reinforce
  double gamma = 0.99;
  std::size_t s_max = 16;
  bool discount_weighting = false;  // multiply the step-t term by gamma^t
  double entropy_weight = 0.0;
};

/// Softmax-head logits of a policy network for one observation.
LogitVector policy_logits(const Mlp& policy, const Eigen::VectorXd& observation);

/// Rolls the policy from the current (reset) environment state to the end of
/// the episode. Actions are racing samples under fresh Dirichlet draws from
/// action_rng; environment randomness comes from env_rng.
Trajectory run_episode(const Mlp& policy, Environment& env, RngStream& action_rng,
                       RngStream& env_rng, bool keep_snapshots = true);

/// Outcome of the budgeted timestep selection.
struct RolloutSelection {
  EstimatorId estimator = EstimatorId::Arsm;
  std::vector<PseudoActionTable> tables;            // ARSM: one per timestep
  std::vector<std::size_t> references;              // ARS: j_t per timestep
  std::vector<std::vector<std::size_t>> unique_others;  // S_t for every timestep
  std::vector<std::size_t> retained;                // H, in visiting order
  std::size_t rollouts = 0;                         // sum over H of |S_t|

  double mean_unique() const;
};

/// Visits timesteps in a random order and keeps them while the total number
/// of pseudo-action rollouts stays within s_max; stops at the first step that
/// would overflow.
RolloutSelection select_rollout_set(const Trajectory& traj, EstimatorId estimator,
                                    std::size_t s_max, RngStream& rng);

/// Return of taking `action` in the snapshot and following the policy
/// afterwards. Throws StateError if the snapshot has already terminated.
double estimate_pseudo_q(const Environment& snapshot, std::size_t action, const Mlp& policy,
                         double gamma, RngStream rng);

/// Estimated returns of the pseudo actions of one retained timestep. Entries
/// that were not needed stay NaN.
struct RewardMatrix {
  std::size_t t = 0;
  std::size_t categories = 0;
  std::vector<double> values;  // C x C, row-major

  double at(std::size_t m, std::size_t j) const { return values[m * categories + j]; }
};

/// Fills R_t for every retained timestep: the true return where the pseudo
/// action equals a_t, one rollout per distinct other pseudo action otherwise.
/// Rollout streams are derived from (timestep, action) under rollout_base, so
/// the result does not depend on how rollouts are scheduled.
std::vector<RewardMatrix> fill_reward_matrices(const Mlp& policy, const Trajectory& traj,
                                               const RolloutSelection& selection, double gamma,
                                               const RngStream& rollout_base);

struct PolicyGradient {
  Gradients grads;
  std::vector<std::vector<double>> step_grads;  // logit gradient per retained step
};

PolicyGradient arsm_policy_gradient(const Mlp& policy, const Trajectory& traj,
                                    const RolloutSelection& selection,
                                    const std::vector<RewardMatrix>& rewards,
                                    const PolicyGradientOptions& options);

PolicyGradient ars_policy_gradient(const Mlp& policy, const Trajectory& traj,
                                   const RolloutSelection& selection,
                                   const std::vector<RewardMatrix>& rewards,
                                   const PolicyGradientOptions& options);

/// Score-function baseline: G_t (1[c = a_t] - p_tc) at every step.
PolicyGradient reinforce_policy_gradient(const Mlp& policy, const Trajectory& traj,
                                         const PolicyGradientOptions& options);

struct EpisodeStats {
  double episode_return = 0.0;
  std::size_t horizon = 0;
  std::size_t rollouts = 0;
  double mean_unique = 0.0;
  std::vector<double> gradient;  // flattened parameter gradient
};

/// One training iteration: episode, selection, rollouts, gradient, ascent.
/// All randomness is derived from (seed, episode).
EpisodeStats train_episode(Mlp& policy, Adam& optimizer, Environment& env,
                           const PolicyGradientOptions& options, std::uint64_t seed,
                           std::uint64_t episode);

/// Fully connected policy with ReLU hidden layers and one softmax head.
Mlp make_policy_network(std::size_t observation_dim, const std::vector<std::size_t>& hidden,
                        std::size_t num_actions);

}  // namespace arsm
