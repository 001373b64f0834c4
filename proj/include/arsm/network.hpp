#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "arsm/rng.hpp"
#include "arsm/simplex.hpp"

namespace arsm {

/// Thrown when an operation is called in an invalid state (e.g. backward
/// without a forward tape).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class LayerKind { Linear, LeakyRelu, Relu, SoftmaxHeads };

/// One layer of a feed-forward stack. SoftmaxHeads is an identity on the
/// logits that tags the output as `heads` groups of `categories` entries.
struct LayerSpec {
  LayerKind kind = LayerKind::Linear;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  double leaky_slope = 0.01;
  std::size_t heads = 0;
  std::size_t categories = 0;

  static LayerSpec linear(std::size_t in, std::size_t out);
  static LayerSpec leaky_relu(std::size_t dim, double slope = 0.01);
  static LayerSpec relu(std::size_t dim);
  static LayerSpec softmax_heads(std::size_t heads, std::size_t categories);
};

/// Parameter gradients, one matrix per parameter tensor in the order of
/// Mlp::parameters() (weight then bias for every linear layer).
using Gradients = std::vector<Eigen::MatrixXd>;

/// Small feed-forward network with hand-written reverse mode.
class Mlp {
 public:
  /// Per-layer inputs recorded by forward(); consumed by backward().
  struct Tape {
    std::vector<Eigen::VectorXd> inputs;
    bool empty() const { return inputs.empty(); }
  };

  /// Reusable buffers for allocation-free inference.
  struct Workspace {
    std::vector<Eigen::VectorXd> buffers;
  };

  Mlp() = default;
  explicit Mlp(std::vector<LayerSpec> specs);

  /// Glorot-uniform weights, zero biases.
  void init_glorot(RngStream& rng);

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  const std::vector<LayerSpec>& specs() const { return specs_; }

  Eigen::VectorXd forward(const Eigen::VectorXd& x, Tape* tape = nullptr) const;
  const Eigen::VectorXd& infer(const Eigen::VectorXd& x, Workspace& ws) const;

  /// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(output) and
  /// returns d(loss)/d(input).
  Eigen::VectorXd backward(const Tape& tape, const Eigen::VectorXd& grad_output,
                           Gradients& grads) const;

  std::vector<Eigen::MatrixXd*> parameters();
  std::vector<const Eigen::MatrixXd*> parameters() const;
  Gradients zero_gradients() const;
  std::size_t parameter_count() const;

 private:
  struct Linear {
    Eigen::MatrixXd weight;  // out x in
    Eigen::MatrixXd bias;    // out x 1
  };

  std::vector<LayerSpec> specs_;
  std::vector<Linear> linears_;          // one per Linear spec
  std::vector<std::size_t> linear_slot_;  // spec index -> linears_ index
};

/// Splits a flat logit vector into heads of `categories` entries.
std::vector<LogitVector> split_heads(const Eigen::VectorXd& logits, std::size_t heads,
                                     std::size_t categories);

/// Flattens per-head values into one vector (head-major).
Eigen::VectorXd flatten_heads(const std::vector<std::vector<double>>& per_head);

/// One-hot encoding of a code vector, head-major.
Eigen::VectorXd one_hot(const std::vector<std::size_t>& codes, std::size_t categories);

/// Adam with bias-corrected moments. ascend() moves parameters along the
/// supplied gradient (maximization).
class Adam {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  Adam(const std::vector<Eigen::MatrixXd*>& params, Options options);

  void ascend(const std::vector<Eigen::MatrixXd*>& params, const Gradients& grads);
  std::size_t steps() const { return steps_; }
  const Options& options() const { return options_; }

 private:
  Options options_;
  Gradients m_;
  Gradients v_;
  std::size_t steps_ = 0;
};

/// Appends all entries of `grads` to a flat vector (parameter order).
std::vector<double> flatten(const Gradients& grads);

}  // namespace arsm
