#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "arsm/rng.hpp"

namespace arsm {

struct StepResult {
  double reward = 0.0;
  bool done = false;
};

/// Episodic environment with a discrete action set. clone() is a full
/// snapshot: stepping a clone never affects the original.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::size_t num_actions() const = 0;
  virtual std::size_t observation_dim() const = 0;
  virtual void reset(RngStream& rng) = 0;
  virtual StepResult step(std::size_t action, RngStream& rng) = 0;
  virtual Eigen::VectorXd observation() const = 0;
  virtual bool done() const = 0;
  virtual std::size_t steps() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;
};

/// Classic cart-pole balancing task, explicit Euler integration, two actions
/// (push left, push right), +1 reward per step.
class CartPole final : public Environment {
 public:
  using State = std::array<double, 4>;  // x, x_dot, theta, theta_dot

  static constexpr double kGravity = 9.8;
  static constexpr double kCartMass = 1.0;
  static constexpr double kPoleMass = 0.1;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kForce = 10.0;
  static constexpr double kTau = 0.02;
  static constexpr double kXLimit = 2.4;
  static constexpr double kThetaLimit = 12.0 * 3.14159265358979323846 / 180.0;

  explicit CartPole(std::size_t max_steps = 500);

  /// One Euler step of the dynamics under a horizontal force.
  static State dynamics(const State& s, double force);

  std::size_t num_actions() const override { return 2; }
  std::size_t observation_dim() const override { return 4; }
  void reset(RngStream& rng) override;
  StepResult step(std::size_t action, RngStream& rng) override;
  Eigen::VectorXd observation() const override;
  bool done() const override { return done_; }
  std::size_t steps() const override { return steps_; }
  std::unique_ptr<Environment> clone() const override;

  const State& state() const { return state_; }
  void set_state(const State& s);

 private:
  std::size_t max_steps_;
  State state_{};
  std::size_t steps_ = 0;
  bool done_ = false;
};

/// Finite MDP with tabular rewards and transitions. The observation is the
/// one-hot state.
struct ChainMdpConfig {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<std::vector<double>> rewards;                   // [s][a]
  std::vector<std::vector<std::vector<double>>> transitions;  // [s][a][s']
  std::vector<double> initial;                                // start distribution
  std::vector<bool> terminal;                                 // absorbing, episode ends on entry
  std::size_t max_steps = 10;

  void validate() const;
};

class ChainMdp final : public Environment {
 public:
  explicit ChainMdp(ChainMdpConfig config);

  std::size_t num_actions() const override { return config_->num_actions; }
  std::size_t observation_dim() const override { return config_->num_states; }
  void reset(RngStream& rng) override;
  StepResult step(std::size_t action, RngStream& rng) override;
  Eigen::VectorXd observation() const override;
  bool done() const override { return done_; }
  std::size_t steps() const override { return steps_; }
  std::unique_ptr<Environment> clone() const override;

  std::size_t state() const { return state_; }
  void set_state(std::size_t s, std::size_t steps = 0);
  const ChainMdpConfig& config() const { return *config_; }

 private:
  std::shared_ptr<const ChainMdpConfig> config_;
  std::size_t state_ = 0;
  std::size_t steps_ = 0;
  bool done_ = false;
};

/// Draws an index from a discrete distribution by inverse CDF.
std::size_t sample_discrete(const std::vector<double>& probs, RngStream& rng);

}  // namespace arsm
