#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "arsm/experiments/config.hpp"

namespace arsm::experiments {

/// Reward of the toy problem for 0-based category idx: 0.5 + (idx + 1) / (C R).
double toy_reward(std::size_t idx, std::size_t C, std::size_t R);

struct ToyResult {
  std::vector<double> expected_reward;  // before each update, then the final value
  std::vector<double> final_phi;
  std::vector<double> final_probs;
  double final_expected_reward = 0.0;
};

/// Gradient ascent on the toy logits with one estimate per iteration.
ToyResult run_toy(const ExperimentConfig& config, std::ostream* csv);

struct VaeResult {
  std::vector<double> elbo;           // batch-mean training ELBO per iteration
  std::vector<double> smoothed_elbo;  // trailing moving average
  double final_smoothed_elbo = 0.0;
  std::vector<double> mean_f_evals;   // per layer, averaged over iterations
};

VaeResult run_vae(const ExperimentConfig& config, std::ostream* csv);

struct RlResult {
  std::vector<double> returns;
  std::vector<double> moving_average;  // window 100
  std::vector<double> mean_unique;
  std::vector<std::size_t> rollouts;
  std::optional<std::size_t> solved_episode;  // first episode with moving average >= 195
  std::vector<double> final_action_probs;     // chain: policy at each state, flattened
};

RlResult run_rl(const ExperimentConfig& config, std::ostream* csv);

struct SuiteCheck {
  std::string name;
  bool pass = false;
  std::string tolerance;
  double statistic = 0.0;  // max |z| or max error, depending on the check
  std::string details;     // JSON fragment
};

struct SuiteReport {
  bool pass = false;
  std::vector<SuiteCheck> checks;
  std::string to_json() const;
};

SuiteReport run_suite(const ExperimentConfig& config);

}  // namespace arsm::experiments
