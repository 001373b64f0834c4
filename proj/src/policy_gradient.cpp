#include "arsm/policy_gradient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "arsm/parallel.hpp"

namespace arsm {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// Adds weight * d(sum_c g_c phi_c)/d(theta) at one observation.
void accumulate_step(const Mlp& policy, const Eigen::VectorXd& obs,
                     const std::vector<double>& g, double weight, Gradients& grads) {
  Mlp::Tape tape;
  policy.forward(obs, &tape);
  Eigen::VectorXd go(static_cast<Eigen::Index>(g.size()));
  for (std::size_t c = 0; c < g.size(); ++c) go[static_cast<Eigen::Index>(c)] = weight * g[c];
  policy.backward(tape, go, grads);
}

double step_weight(const PolicyGradientOptions& o, std::size_t t) {
  return o.discount_weighting ? std::pow(o.gamma, static_cast<double>(t)) : 1.0;
}

void add_entropy(const Mlp& policy, const Trajectory& traj, const PolicyGradientOptions& o,
                 Gradients& grads) {
  if (o.entropy_weight == 0.0) return;
  for (std::size_t t = 0; t < traj.horizon(); ++t) {
    const auto& step = traj.steps[t];
    const std::vector<double> logp = log_softmax(step.logits.values());
    double h = 0.0;
    for (double lp : logp) h -= std::exp(lp) * lp;
    std::vector<double> g(logp.size());
    for (std::size_t c = 0; c < g.size(); ++c) g[c] = -std::exp(logp[c]) * (logp[c] + h);
    accumulate_step(policy, step.observation, g, o.entropy_weight * step_weight(o, t), grads);
  }
}

const RewardMatrix& matrix_for(const std::vector<RewardMatrix>& rewards, std::size_t index,
                               std::size_t t) {
  if (index >= rewards.size() || rewards[index].t != t)
    throw StateError("policy gradient: reward matrix missing for a retained step");
  return rewards[index];
}

}  // namespace

double Trajectory::total_reward() const {
  double total = 0.0;
  for (const auto& s : steps) total += s.reward;
  return total;
}

std::vector<double> Trajectory::returns(double gamma) const {
  std::vector<double> g(steps.size());
  double acc = 0.0;
  for (std::size_t t = steps.size(); t-- > 0;) {
    acc = steps[t].reward + gamma * acc;
    g[t] = acc;
  }
  return g;
}

double RolloutSelection::mean_unique() const {
  if (unique_others.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : unique_others) total += static_cast<double>(s.size());
  return total / static_cast<double>(unique_others.size());
}

LogitVector policy_logits(const Mlp& policy, const Eigen::VectorXd& observation) {
  const Eigen::VectorXd out = policy.forward(observation);
  return LogitVector(std::vector<double>(out.data(), out.data() + out.size()));
}

Trajectory run_episode(const Mlp& policy, Environment& env, RngStream& action_rng,
                       RngStream& env_rng, bool keep_snapshots) {
  if (policy.output_dim() != env.num_actions() || policy.input_dim() != env.observation_dim())
    throw std::invalid_argument("run_episode: policy does not match the environment");
  Trajectory traj;
  const std::size_t C = env.num_actions();
  Mlp::Workspace ws;
  while (!env.done()) {
    TrajectoryStep step{env.observation(), LogitVector({0.0, 0.0}), {}, 0, 0.0, nullptr};
    const Eigen::VectorXd& out = policy.infer(step.observation, ws);
    step.logits = LogitVector(std::vector<double>(out.data(), out.data() + out.size()));
    step.dirichlet = sample_dirichlet_ones(C, action_rng);
    step.action = racing_sample(step.logits, step.dirichlet);
    if (keep_snapshots) step.snapshot = std::shared_ptr<const Environment>(env.clone());
    step.reward = env.step(step.action, env_rng).reward;
    traj.steps.push_back(std::move(step));
  }
  return traj;
}

RolloutSelection select_rollout_set(const Trajectory& traj, EstimatorId estimator,
                                    std::size_t s_max, RngStream& rng) {
  if (estimator != EstimatorId::Arsm && estimator != EstimatorId::Ars)
    throw std::invalid_argument("select_rollout_set: estimator must be ARS or ARSM");
  RolloutSelection sel;
  sel.estimator = estimator;
  const std::size_t T = traj.horizon();
  RngStream order_rng = rng.split(0);
  RngStream ref_rng = rng.split(1);
  sel.unique_others.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    const auto& step = traj.steps[t];
    if (estimator == EstimatorId::Arsm) {
      sel.tables.push_back(pseudo_action_table_fast(step.logits, step.dirichlet));
      sel.unique_others[t] = sel.tables.back().unique_others();
    } else {
      const std::size_t C = step.logits.size();
      const std::size_t j = ref_rng.uniform_index(C);
      sel.references.push_back(j);
      auto& others = sel.unique_others[t];
      for (std::size_t c = 0; c < C; ++c) {
        const std::size_t a = pseudo_action(step.logits.values(), step.dirichlet, step.action, c, j);
        if (a != step.action) others.push_back(a);
      }
      std::sort(others.begin(), others.end());
      others.erase(std::unique(others.begin(), others.end()), others.end());
    }
  }

  std::vector<std::size_t> order(T);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = T; i > 1; --i) std::swap(order[i - 1], order[order_rng.uniform_index(i)]);

  for (std::size_t t : order) {
    const std::size_t need = sel.unique_others[t].size();
    if (sel.rollouts + need > s_max) break;
    sel.rollouts += need;
    sel.retained.push_back(t);
  }
  return sel;
}

double estimate_pseudo_q(const Environment& snapshot, std::size_t action, const Mlp& policy,
                         double gamma, RngStream rng) {
  if (snapshot.done()) throw StateError("estimate_pseudo_q: snapshot is already terminal");
  std::unique_ptr<Environment> env = snapshot.clone();
  RngStream env_rng = rng.split(0);
  RngStream action_rng = rng.split(1);
  double q = env->step(action, env_rng).reward;
  double discount = gamma;
  const std::size_t C = env->num_actions();
  Mlp::Workspace ws;
  while (!env->done()) {
    const Eigen::VectorXd& out = policy.infer(env->observation(), ws);
    const SimplexPoint pi = sample_dirichlet_ones(C, action_rng);
    const std::size_t a = racing_sample(std::span<const double>(out.data(), C), pi);
    q += discount * env->step(a, env_rng).reward;
    discount *= gamma;
  }
  return q;
}

std::vector<RewardMatrix> fill_reward_matrices(const Mlp& policy, const Trajectory& traj,
                                               const RolloutSelection& selection, double gamma,
                                               const RngStream& rollout_base) {
  struct Task {
    std::size_t t;
    std::size_t action;
    double q;
  };
  std::vector<Task> tasks;
  for (std::size_t t : selection.retained)
    for (std::size_t a : selection.unique_others[t]) tasks.push_back({t, a, 0.0});
  parallel_for(tasks.size(), [&](std::size_t i) {
    auto& task = tasks[i];
    const auto& step = traj.steps[task.t];
    if (!step.snapshot) throw StateError("fill_reward_matrices: trajectory has no snapshots");
    task.q = estimate_pseudo_q(*step.snapshot, task.action, policy, gamma,
                               rollout_base.split(derive_stream_id({task.t, task.action})));
  });

  const std::vector<double> G = traj.returns(gamma);
  std::vector<RewardMatrix> out;
  std::size_t next = 0;
  for (std::size_t t : selection.retained) {
    const auto& step = traj.steps[t];
    const std::size_t C = step.logits.size();
    std::vector<double> q_of(C, kMissing);
    q_of[step.action] = G[t];
    for (; next < tasks.size() && tasks[next].t == t; ++next) q_of[tasks[next].action] = tasks[next].q;

    RewardMatrix R{t, C, std::vector<double>(C * C, kMissing)};
    if (selection.estimator == EstimatorId::Arsm) {
      const auto& table = selection.tables[t];
      for (std::size_t m = 0; m < C; ++m)
        for (std::size_t j = 0; j < C; ++j) R.values[m * C + j] = q_of[table.at(m, j)];
    } else {
      const std::size_t j = selection.references[t];
      for (std::size_t m = 0; m < C; ++m)
        R.values[m * C + j] =
            q_of[pseudo_action(step.logits.values(), step.dirichlet, step.action, m, j)];
    }
    out.push_back(std::move(R));
  }
  return out;
}

PolicyGradient arsm_policy_gradient(const Mlp& policy, const Trajectory& traj,
                                    const RolloutSelection& selection,
                                    const std::vector<RewardMatrix>& rewards,
                                    const PolicyGradientOptions& options) {
  PolicyGradient out;
  out.grads = policy.zero_gradients();
  for (std::size_t i = 0; i < selection.retained.size(); ++i) {
    const std::size_t t = selection.retained[i];
    const RewardMatrix& R = matrix_for(rewards, i, t);
    for (double v : R.values)
      if (std::isnan(v)) throw StateError("arsm_policy_gradient: reward matrix has missing entries");
    const auto& step = traj.steps[t];
    std::vector<double> g = arsm_from_reward_matrix(R.values, step.dirichlet.pi);
    accumulate_step(policy, step.observation, g, step_weight(options, t), out.grads);
    out.step_grads.push_back(std::move(g));
  }
  add_entropy(policy, traj, options, out.grads);
  return out;
}

PolicyGradient ars_policy_gradient(const Mlp& policy, const Trajectory& traj,
                                   const RolloutSelection& selection,
                                   const std::vector<RewardMatrix>& rewards,
                                   const PolicyGradientOptions& options) {
  if (selection.references.size() != traj.horizon())
    throw StateError("ars_policy_gradient: selection has no reference categories");
  PolicyGradient out;
  out.grads = policy.zero_gradients();
  for (std::size_t i = 0; i < selection.retained.size(); ++i) {
    const std::size_t t = selection.retained[i];
    const RewardMatrix& R = matrix_for(rewards, i, t);
    const auto& step = traj.steps[t];
    const std::size_t C = R.categories;
    const std::size_t j = selection.references[t];
    std::vector<double> column(C);
    for (std::size_t m = 0; m < C; ++m) {
      column[m] = R.at(m, j);
      if (std::isnan(column[m]))
        throw StateError("ars_policy_gradient: reference column has missing entries");
    }
    std::vector<double> g = ars_from_reward_column(column, step.dirichlet.pi[j]);
    accumulate_step(policy, step.observation, g, step_weight(options, t), out.grads);
    out.step_grads.push_back(std::move(g));
  }
  add_entropy(policy, traj, options, out.grads);
  return out;
}

PolicyGradient reinforce_policy_gradient(const Mlp& policy, const Trajectory& traj,
                                         const PolicyGradientOptions& options) {
  PolicyGradient out;
  out.grads = policy.zero_gradients();
  const std::vector<double> G = traj.returns(options.gamma);
  for (std::size_t t = 0; t < traj.horizon(); ++t) {
    const auto& step = traj.steps[t];
    const ProbVector p = softmax(step.logits);
    std::vector<double> g(p.size());
    for (std::size_t c = 0; c < g.size(); ++c)
      g[c] = G[t] * ((c == step.action ? 1.0 : 0.0) - p[c]);
    accumulate_step(policy, step.observation, g, step_weight(options, t), out.grads);
    out.step_grads.push_back(std::move(g));
  }
  add_entropy(policy, traj, options, out.grads);
  return out;
}

EpisodeStats train_episode(Mlp& policy, Adam& optimizer, Environment& env,
                           const PolicyGradientOptions& options, std::uint64_t seed,
                           std::uint64_t episode) {
  const RngStream base(seed, derive_stream_id({episode}));
  RngStream reset_rng = base.split(0);
  RngStream action_rng = base.split(1);
  RngStream env_rng = base.split(2);
  RngStream select_rng = base.split(3);
  const RngStream rollout_base = base.split(4);

  env.reset(reset_rng);
  const bool needs_rollouts = options.estimator != EstimatorId::Reinforce;
  const Trajectory traj = run_episode(policy, env, action_rng, env_rng, needs_rollouts);

  EpisodeStats stats;
  stats.episode_return = traj.total_reward();
  stats.horizon = traj.horizon();
  PolicyGradient pg;
  if (options.estimator == EstimatorId::Reinforce) {
    pg = reinforce_policy_gradient(policy, traj, options);
  } else {
    const RolloutSelection sel = select_rollout_set(traj, options.estimator, options.s_max, select_rng);
    const auto rewards = fill_reward_matrices(policy, traj, sel, options.gamma, rollout_base);
    pg = options.estimator == EstimatorId::Arsm
             ? arsm_policy_gradient(policy, traj, sel, rewards, options)
             : ars_policy_gradient(policy, traj, sel, rewards, options);
    stats.rollouts = sel.rollouts;
    stats.mean_unique = sel.mean_unique();
  }
  stats.gradient = flatten(pg.grads);
  optimizer.ascend(policy.parameters(), pg.grads);
  return stats;
}

Mlp make_policy_network(std::size_t observation_dim, const std::vector<std::size_t>& hidden,
                        std::size_t num_actions) {
  std::vector<LayerSpec> specs;
  std::size_t in = observation_dim;
  for (std::size_t h : hidden) {
    specs.push_back(LayerSpec::linear(in, h));
    specs.push_back(LayerSpec::relu(h));
    in = h;
  }
  specs.push_back(LayerSpec::linear(in, num_actions));
  specs.push_back(LayerSpec::softmax_heads(1, num_actions));
  return Mlp(std::move(specs));
}

}  // namespace arsm
