#include <deque>
#include <memory>
#include <sstream>

#include "arsm/diagnostics.hpp"
#include "arsm/experiments/csv.hpp"
#include "arsm/experiments/runners.hpp"
#include "arsm/policy_gradient.hpp"

namespace arsm::experiments {

namespace {
constexpr std::size_t kReturnWindow = 100;
constexpr double kSolvedReturn = 195.0;
}  // namespace

RlResult run_rl(const ExperimentConfig& config, std::ostream* csv) {
  std::unique_ptr<Environment> env;
  if (config.environment == RlEnvironment::CartPole)
    env = std::make_unique<CartPole>(config.max_steps);
  else
    env = std::make_unique<ChainMdp>(config.chain);

  Mlp policy = make_policy_network(env->observation_dim(), config.hidden, env->num_actions());
  RngStream init_rng(config.seed, derive_stream_id({0x1417u}));
  policy.init_glorot(init_rng);
  Adam optimizer(policy.parameters(), Adam::Options{config.learning_rate, 0.9, 0.999, 1e-8});
  EmaMoments ema(config.decay);

  PolicyGradientOptions options;
  options.estimator = config.estimator;
  options.gamma = config.gamma;
  options.s_max = config.S_max;
  options.discount_weighting = config.discount_weighting;
  options.entropy_weight = config.entropy_weight;

  std::unique_ptr<CsvWriter> writer;
  if (csv != nullptr) {
    std::ostringstream meta;
    meta << "estimator=" << to_string(config.estimator) << " seed=" << config.seed
         << " environment=" << (config.environment == RlEnvironment::CartPole ? "cartpole" : "chain")
         << " S_max=" << config.S_max << " gamma=" << format_number(config.gamma)
         << " learning_rate=" << format_number(config.learning_rate);
    writer = std::make_unique<CsvWriter>(
        *csv, "rl", meta.str(),
        std::vector<std::string>{"episode", "return", "moving_average_return", "rollouts",
                                 "mean_unique_pseudo_actions", "log10_grad_variance"});
  }

  RlResult result;
  std::deque<double> window;
  double window_sum = 0.0;
  for (std::size_t ep = 0; ep < config.episodes; ++ep) {
    const EpisodeStats stats = train_episode(policy, optimizer, *env, options, config.seed, ep);
    window.push_back(stats.episode_return);
    window_sum += stats.episode_return;
    if (window.size() > kReturnWindow) {
      window_sum -= window.front();
      window.pop_front();
    }
    const double moving = window_sum / static_cast<double>(window.size());
    ema.update(stats.gradient);
    result.returns.push_back(stats.episode_return);
    result.moving_average.push_back(moving);
    result.mean_unique.push_back(stats.mean_unique);
    result.rollouts.push_back(stats.rollouts);
    if (!result.solved_episode && window.size() == kReturnWindow && moving >= kSolvedReturn)
      result.solved_episode = ep;
    if (writer)
      writer->row({static_cast<double>(ep), stats.episode_return, moving,
                   static_cast<double>(stats.rollouts), stats.mean_unique,
                   log_variance_report(ema)});
    if (config.stop_at_moving_average && window.size() == kReturnWindow &&
        moving >= *config.stop_at_moving_average)
      break;
  }

  if (config.environment == RlEnvironment::Chain) {
    const std::size_t N = config.chain.num_states;
    for (std::size_t s = 0; s < N; ++s) {
      Eigen::VectorXd obs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
      obs[static_cast<Eigen::Index>(s)] = 1.0;
      const ProbVector p = softmax(policy_logits(policy, obs));
      result.final_action_probs.insert(result.final_action_probs.end(), p.values().begin(),
                                       p.values().end());
    }
  }
  return result;
}

}  // namespace arsm::experiments
