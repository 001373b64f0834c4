// Two-state, three-action chain with stochastic transitions, and its tabular
// mirror for the dynamic-programming oracle.
#pragma once

#include <Eigen/Dense>

#include "arsm/environments.hpp"
#include "arsm/policy_gradient.hpp"
#include "oracles.hpp"

namespace fixture {

inline arsm::ChainMdpConfig two_state_chain(std::size_t horizon = 4) {
  arsm::ChainMdpConfig c;
  c.num_states = 2;
  c.num_actions = 3;
  c.rewards = {{1.0, 0.0, 2.0}, {-0.5, 3.0, 0.5}};
  c.transitions = {{{0.8, 0.2}, {0.1, 0.9}, {0.5, 0.5}},
                   {{0.3, 0.7}, {0.9, 0.1}, {0.6, 0.4}}};
  c.initial = {0.6, 0.4};
  c.terminal = {false, false};
  c.max_steps = horizon;
  return c;
}

inline oracle::Mdp mirror(const arsm::ChainMdpConfig& c) {
  oracle::Mdp m;
  m.S = c.num_states;
  m.A = c.num_actions;
  m.H = c.max_steps;
  m.R = c.rewards;
  m.P = c.transitions;
  m.init = c.initial;
  m.terminal = c.terminal.empty() ? std::vector<bool>(m.S, false) : c.terminal;
  return m;
}

/// Tabular policy: Linear(S, A) on the one-hot state, softmax head.
inline arsm::Mlp tabular_policy(const Eigen::MatrixXd& weight, const Eigen::VectorXd& bias) {
  arsm::Mlp p = arsm::make_policy_network(static_cast<std::size_t>(weight.cols()), {},
                                          static_cast<std::size_t>(weight.rows()));
  auto params = p.parameters();
  *params[0] = weight;
  *params[1] = bias;
  return p;
}

inline std::vector<std::vector<double>> action_probs(const arsm::Mlp& policy, std::size_t S) {
  std::vector<std::vector<double>> out;
  for (std::size_t s = 0; s < S; ++s) {
    Eigen::VectorXd o = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(S));
    o[static_cast<Eigen::Index>(s)] = 1.0;
    const Eigen::VectorXd l = policy.forward(o);
    out.push_back(oracle::softmax(std::vector<double>(l.data(), l.data() + l.size())));
  }
  return out;
}

/// Exact parameter gradient (weight then bias, flattened column-major like
/// Eigen storage) for the tabular policy.
inline std::vector<double> exact_parameter_gradient(const oracle::Mdp& m, const arsm::Mlp& policy,
                                                    double gamma, bool discounted) {
  const auto probs = action_probs(policy, m.S);
  const auto g = oracle::policy_gradient(m, probs, gamma, discounted);
  Eigen::MatrixXd W(static_cast<Eigen::Index>(m.A), static_cast<Eigen::Index>(m.S));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.A));
  for (std::size_t s = 0; s < m.S; ++s)
    for (std::size_t a = 0; a < m.A; ++a) {
      W(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(s)) = g[s][a];
      b[static_cast<Eigen::Index>(a)] += g[s][a];
    }
  std::vector<double> out(W.data(), W.data() + W.size());
  out.insert(out.end(), b.data(), b.data() + b.size());
  return out;
}

/// One policy-gradient sample without the optimizer step.
inline std::vector<double> gradient_sample(const arsm::Mlp& policy, arsm::Environment& env,
                                           const arsm::PolicyGradientOptions& o, std::uint64_t seed,
                                           std::uint64_t iteration) {
  const arsm::RngStream base(seed, arsm::derive_stream_id({iteration}));
  arsm::RngStream reset = base.split(0), act = base.split(1), env_rng = base.split(2),
                  sel_rng = base.split(3);
  env.reset(reset);
  const arsm::Trajectory traj = arsm::run_episode(policy, env, act, env_rng);
  arsm::PolicyGradient pg;
  if (o.estimator == arsm::EstimatorId::Reinforce) {
    pg = arsm::reinforce_policy_gradient(policy, traj, o);
  } else {
    const auto sel = arsm::select_rollout_set(traj, o.estimator, o.s_max, sel_rng);
    const auto R = arsm::fill_reward_matrices(policy, traj, sel, o.gamma, base.split(4));
    pg = o.estimator == arsm::EstimatorId::Arsm ? arsm::arsm_policy_gradient(policy, traj, sel, R, o)
                                                : arsm::ars_policy_gradient(policy, traj, sel, R, o);
  }
  return arsm::flatten(pg.grads);
}

}  // namespace fixture
