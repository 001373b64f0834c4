#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "arsm/estimators.hpp"
#include "arsm/network.hpp"
#include "arsm/rng.hpp"
#include "arsm/simplex.hpp"

namespace arsm {

/// Shape of a stack of T categorical layers, each with `heads` softmax heads
/// over `categories` categories. Layer 0 sees the data through one hidden
/// LeakyReLU layer; deeper layers are linear in the one-hot code below.
struct VaeArchitecture {
  std::size_t data_dim = 64;
  std::size_t layers = 1;
  std::size_t heads = 4;
  std::size_t categories = 4;
  std::size_t hidden = 32;
  double leaky_slope = 0.01;

  std::size_t code_dim() const { return heads * categories; }
};

using Codes = std::vector<std::size_t>;           // one category per head
using CodeStack = std::vector<Codes>;              // z_1 .. z_T

/// One stochastic layer draw: logits, Dirichlet noise and the racing actions.
struct CategoricalLayerSample {
  std::vector<LogitVector> logits;
  std::vector<SimplexPoint> dirichlets;
  Codes actions;
};

struct ElboSample {
  double log_likelihood = 0.0;
  double log_prior = 0.0;
  double log_q = 0.0;
  double elbo = 0.0;
};

/// Per-layer bookkeeping of one gradient sample.
struct LayerTrace {
  CodeStack upstream;  // z_1 .. z_{t-1} used as the encoder context
  CategoricalLayerSample sample;
  GradEstimate logit_grad;
};

struct GradientSample {
  Gradients grads;  // same layout as CategoricalVae::parameters()
  double elbo = 0.0;  // integrand at the true sample of layer 0
  CodeStack true_codes;
  std::vector<LayerTrace> layers;
};

struct TrainDiagnostics {
  double elbo = 0.0;                       // batch mean
  std::vector<double> f_evals_per_layer;   // batch mean
  std::vector<double> encoder_grad;        // batch mean, flattened
};

/// Categorical VAE / stochastic categorical network with T layers.
///
/// Encoder q(z_t | z_{t-1}) (z_0 = x), decoder p(x | z_1) with Bernoulli
/// outputs, p(z_t | z_{t+1}) for t < T, and a uniform prior on z_T.
class CategoricalVae {
 public:
  explicit CategoricalVae(VaeArchitecture arch);

  void init(RngStream& rng);
  const VaeArchitecture& architecture() const { return arch_; }

  const Mlp& encoder(std::size_t t) const { return encoders_.at(t); }
  const Mlp& decoder(std::size_t t) const { return decoders_.at(t); }
  Mlp& encoder(std::size_t t) { return encoders_.at(t); }
  Mlp& decoder(std::size_t t) { return decoders_.at(t); }

  /// Input of encoder t: x for t = 0, one-hot of z_{t-1} otherwise.
  Eigen::VectorXd encoder_input(std::size_t t, const Eigen::VectorXd& x,
                                const CodeStack& upstream) const;
  std::vector<LogitVector> encoder_logits(std::size_t t, const Eigen::VectorXd& input) const;

  /// Racing draw of z_t given the encoder input.
  CategoricalLayerSample sample_layer(std::size_t t, const Eigen::VectorXd& input,
                                      RngStream& rng) const;
  /// Extends `codes` (z_1 .. z_s) to a full stack by sampling q downward.
  void sample_downstream(const Eigen::VectorXd& x, CodeStack& codes, RngStream& rng) const;

  double log_likelihood(const Eigen::VectorXd& x, const Codes& z1) const;
  /// sum_t ln p(z_t | z_{t+1}) + ln p(z_T).
  double log_prior(const CodeStack& z) const;
  /// sum_t ln q(z_t | z_{t-1}).
  double log_q(const Eigen::VectorXd& x, const CodeStack& z) const;
  ElboSample elbo(const Eigen::VectorXd& x, const CodeStack& z) const;
  ElboSample elbo_estimate(const Eigen::VectorXd& x, RngStream& rng) const;

  /// One gradient sample for x: estimator gradients on the encoder logits of
  /// every layer (each with freshly sampled upstream codes) and the pathwise
  /// decoder gradient at the true sample of layer 0.
  GradientSample gradient_sample(const Eigen::VectorXd& x, EstimatorId mode,
                                 RngStream& rng) const;

  /// Averages gradient samples over the batch and takes one ascent step.
  TrainDiagnostics train_step(std::span<const Eigen::VectorXd> batch, EstimatorId mode,
                              Adam& optimizer, RngStream& rng);

  /// log (1/n) sum_i p(x | z^(i)), z^(i) drawn from the generative side.
  double marginal_loglik_estimate(const Eigen::VectorXd& x, std::size_t n_samples,
                                  RngStream& rng) const;

  std::vector<Eigen::MatrixXd*> parameters();
  std::vector<const Eigen::MatrixXd*> parameters() const;
  Gradients zero_gradients() const;
  /// Number of leading tensors in parameters() that belong to the encoders.
  std::size_t encoder_parameter_count() const;

  std::string to_json() const;
  static CategoricalVae from_json(const std::string& text);
  void save(const std::string& path) const;
  static CategoricalVae load(const std::string& path);

 private:
  VaeArchitecture arch_;
  std::vector<Mlp> encoders_;  // q(z_t | z_{t-1}), t = 0 .. T-1
  std::vector<Mlp> decoders_;  // 0: p(x | z_1); t >= 1: p(z_t | z_{t+1})
};

/// Stable log-mean-exp; the generic K-sample marginal-likelihood combiner.
double log_mean_exp(std::span<const double> values);

/// Bernoulli log-likelihood sum_d x_d l_d - log(1 + e^{l_d}).
double bernoulli_log_likelihood(const Eigen::VectorXd& x, const Eigen::VectorXd& logits);

/// Bars-and-stripes images on a side x side grid: each sample picks rows or
/// columns and switches each line on with probability 1/2.
std::vector<Eigen::VectorXd> bars_and_stripes(std::size_t n, std::size_t side, RngStream& rng);

}  // namespace arsm
