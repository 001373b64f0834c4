#include "arsm/environments.hpp"

#include <cmath>
#include <stdexcept>

namespace arsm {

std::size_t sample_discrete(const std::vector<double>& probs, RngStream& rng) {
  const double u = rng.uniform_open();
  double cdf = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last = i;
    cdf += probs[i];
    if (u < cdf) return i;
  }
  return last;  // rounding left u above the final cdf
}

CartPole::CartPole(std::size_t max_steps) : max_steps_(max_steps) {
  if (max_steps_ == 0) throw std::invalid_argument("CartPole: max_steps must be positive");
}

CartPole::State CartPole::dynamics(const State& s, double force) {
  const double total_mass = kCartMass + kPoleMass;
  const double pole_mass_length = kPoleMass * kHalfLength;
  const auto [x, x_dot, theta, theta_dot] = s;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double temp = (force + pole_mass_length * theta_dot * theta_dot * sin_t) / total_mass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) /
      (kHalfLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass;
  return {x + kTau * x_dot, x_dot + kTau * x_acc, theta + kTau * theta_dot,
          theta_dot + kTau * theta_acc};
}

void CartPole::reset(RngStream& rng) {
  for (double& v : state_) v = rng.uniform(-0.05, 0.05);
  steps_ = 0;
  done_ = false;
}

StepResult CartPole::step(std::size_t action, RngStream& /*rng*/) {
  if (done_) throw std::logic_error("CartPole::step: episode already finished");
  if (action >= 2) throw std::invalid_argument("CartPole::step: action out of range");
  state_ = dynamics(state_, action == 1 ? kForce : -kForce);
  ++steps_;
  const bool fell = std::abs(state_[0]) > kXLimit || std::abs(state_[2]) > kThetaLimit;
  done_ = fell || steps_ >= max_steps_;
  return {1.0, done_};
}

Eigen::VectorXd CartPole::observation() const {
  return Eigen::Vector4d(state_[0], state_[1], state_[2], state_[3]);
}

std::unique_ptr<Environment> CartPole::clone() const { return std::make_unique<CartPole>(*this); }

void CartPole::set_state(const State& s) {
  state_ = s;
  steps_ = 0;
  done_ = false;
}

void ChainMdpConfig::validate() const {
  if (num_states == 0 || num_actions < 2)
    throw std::invalid_argument("ChainMdp: need at least one state and two actions");
  if (max_steps == 0) throw std::invalid_argument("ChainMdp: max_steps must be positive");
  if (rewards.size() != num_states || transitions.size() != num_states ||
      initial.size() != num_states)
    throw std::invalid_argument("ChainMdp: tables must have one row per state");
  if (!terminal.empty() && terminal.size() != num_states)
    throw std::invalid_argument("ChainMdp: terminal flags must cover every state");
  auto check_dist = [](const std::vector<double>& p, const char* what) {
    double sum = 0.0;
    for (double v : p) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string("ChainMdp: negative probability in ") + what);
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument(std::string("ChainMdp: ") + what + " does not sum to one");
  };
  check_dist(initial, "initial distribution");
  for (std::size_t s = 0; s < num_states; ++s) {
    if (rewards[s].size() != num_actions || transitions[s].size() != num_actions)
      throw std::invalid_argument("ChainMdp: tables must have one entry per action");
    for (std::size_t a = 0; a < num_actions; ++a) {
      if (!std::isfinite(rewards[s][a])) throw std::invalid_argument("ChainMdp: non-finite reward");
      if (transitions[s][a].size() != num_states)
        throw std::invalid_argument("ChainMdp: transition row must cover every state");
      check_dist(transitions[s][a], "transition row");
    }
  }
}

ChainMdp::ChainMdp(ChainMdpConfig config) {
  config.validate();
  if (config.terminal.empty()) config.terminal.assign(config.num_states, false);
  config_ = std::make_shared<const ChainMdpConfig>(std::move(config));
}

void ChainMdp::reset(RngStream& rng) {
  state_ = sample_discrete(config_->initial, rng);
  steps_ = 0;
  done_ = config_->terminal[state_];
}

StepResult ChainMdp::step(std::size_t action, RngStream& rng) {
  if (done_) throw std::logic_error("ChainMdp::step: episode already finished");
  if (action >= config_->num_actions) throw std::invalid_argument("ChainMdp::step: bad action");
  const double r = config_->rewards[state_][action];
  state_ = sample_discrete(config_->transitions[state_][action], rng);
  ++steps_;
  done_ = config_->terminal[state_] || steps_ >= config_->max_steps;
  return {r, done_};
}

Eigen::VectorXd ChainMdp::observation() const {
  Eigen::VectorXd o = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config_->num_states));
  o[static_cast<Eigen::Index>(state_)] = 1.0;
  return o;
}

std::unique_ptr<Environment> ChainMdp::clone() const { return std::make_unique<ChainMdp>(*this); }

void ChainMdp::set_state(std::size_t s, std::size_t steps) {
  if (s >= config_->num_states) throw std::invalid_argument("ChainMdp::set_state: bad state");
  state_ = s;
  steps_ = steps;
  done_ = config_->terminal[s] || steps_ >= config_->max_steps;
}

}  // namespace arsm
