#include "arsm/network.hpp"

#include <cmath>
#include <stdexcept>

namespace arsm {

LayerSpec LayerSpec::linear(std::size_t in, std::size_t out) {
  LayerSpec s;
  s.kind = LayerKind::Linear;
  s.in_dim = in;
  s.out_dim = out;
  return s;
}

LayerSpec LayerSpec::leaky_relu(std::size_t dim, double slope) {
  LayerSpec s;
  s.kind = LayerKind::LeakyRelu;
  s.in_dim = s.out_dim = dim;
  s.leaky_slope = slope;
  return s;
}

LayerSpec LayerSpec::relu(std::size_t dim) {
  LayerSpec s;
  s.kind = LayerKind::Relu;
  s.in_dim = s.out_dim = dim;
  s.leaky_slope = 0.0;
  return s;
}

LayerSpec LayerSpec::softmax_heads(std::size_t heads, std::size_t categories) {
  LayerSpec s;
  s.kind = LayerKind::SoftmaxHeads;
  s.in_dim = s.out_dim = heads * categories;
  s.heads = heads;
  s.categories = categories;
  return s;
}

Mlp::Mlp(std::vector<LayerSpec> specs) : specs_(std::move(specs)) {
  if (specs_.empty()) throw std::invalid_argument("Mlp: no layers");
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const auto& s = specs_[i];
    if (s.in_dim == 0 || s.out_dim == 0) throw std::invalid_argument("Mlp: zero-width layer");
    if (i > 0 && specs_[i - 1].out_dim != s.in_dim)
      throw std::invalid_argument("Mlp: layer dimensions do not chain");
    if (s.kind != LayerKind::Linear && s.in_dim != s.out_dim)
      throw std::invalid_argument("Mlp: activation layers must preserve width");
    if (s.kind == LayerKind::SoftmaxHeads && s.heads * s.categories != s.out_dim)
      throw std::invalid_argument("Mlp: softmax heads must cover the output");
    if (s.kind == LayerKind::Linear) {
      linear_slot_.push_back(linears_.size());
      linears_.push_back({Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.out_dim),
                                                static_cast<Eigen::Index>(s.in_dim)),
                          Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.out_dim), 1)});
    } else {
      linear_slot_.push_back(static_cast<std::size_t>(-1));
    }
  }
}

void Mlp::init_glorot(RngStream& rng) {
  for (auto& layer : linears_) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(layer.weight.rows() + layer.weight.cols()));
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
        layer.weight(r, c) = rng.uniform(-limit, limit);
    layer.bias.setZero();
  }
}

std::size_t Mlp::input_dim() const { return specs_.front().in_dim; }
std::size_t Mlp::output_dim() const { return specs_.back().out_dim; }

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x, Tape* tape) const {
  if (specs_.empty()) throw StateError("Mlp::forward: network has no layers");
  if (static_cast<std::size_t>(x.size()) != input_dim())
    throw std::invalid_argument("Mlp::forward: input dimension mismatch");
  if (tape != nullptr) tape->inputs.clear();
  Eigen::VectorXd h = x;
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    if (tape != nullptr) tape->inputs.push_back(h);
    const auto& s = specs_[i];
    switch (s.kind) {
      case LayerKind::Linear: {
        const auto& l = linears_[linear_slot_[i]];
        h = l.weight * h + l.bias.col(0);
        break;
      }
      case LayerKind::LeakyRelu:
      case LayerKind::Relu:
        for (Eigen::Index k = 0; k < h.size(); ++k)
          if (h[k] < 0.0) h[k] *= s.leaky_slope;
        break;
      case LayerKind::SoftmaxHeads:
        break;
    }
  }
  return h;
}

const Eigen::VectorXd& Mlp::infer(const Eigen::VectorXd& x, Workspace& ws) const {
  if (static_cast<std::size_t>(x.size()) != input_dim())
    throw std::invalid_argument("Mlp::infer: input dimension mismatch");
  if (ws.buffers.size() != specs_.size()) {
    ws.buffers.resize(specs_.size());
    for (std::size_t i = 0; i < specs_.size(); ++i)
      ws.buffers[i].resize(static_cast<Eigen::Index>(specs_[i].out_dim));
  }
  const Eigen::VectorXd* h = &x;
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    Eigen::VectorXd& out = ws.buffers[i];
    const auto& s = specs_[i];
    if (s.kind == LayerKind::Linear) {
      const auto& l = linears_[linear_slot_[i]];
      out.noalias() = l.weight * (*h);
      out += l.bias.col(0);
    } else {
      out = *h;
      if (s.kind != LayerKind::SoftmaxHeads)
        for (Eigen::Index k = 0; k < out.size(); ++k)
          if (out[k] < 0.0) out[k] *= s.leaky_slope;
    }
    h = &out;
  }
  return *h;
}

Eigen::VectorXd Mlp::backward(const Tape& tape, const Eigen::VectorXd& grad_output,
                              Gradients& grads) const {
  if (tape.empty() || tape.inputs.size() != specs_.size())
    throw StateError("Mlp::backward: no forward tape recorded");
  if (static_cast<std::size_t>(grad_output.size()) != output_dim())
    throw std::invalid_argument("Mlp::backward: output gradient dimension mismatch");
  if (grads.size() != 2 * linears_.size())
    throw std::invalid_argument("Mlp::backward: gradient buffer has the wrong layout");
  Eigen::VectorXd g = grad_output;
  for (std::size_t i = specs_.size(); i-- > 0;) {
    const auto& s = specs_[i];
    const Eigen::VectorXd& in = tape.inputs[i];
    switch (s.kind) {
      case LayerKind::Linear: {
        const std::size_t slot = linear_slot_[i];
        const auto& l = linears_[slot];
        grads[2 * slot].noalias() += g * in.transpose();
        grads[2 * slot + 1].col(0) += g;
        g = l.weight.transpose() * g;
        break;
      }
      case LayerKind::LeakyRelu:
      case LayerKind::Relu:
        for (Eigen::Index k = 0; k < g.size(); ++k)
          if (in[k] < 0.0) g[k] *= s.leaky_slope;
        break;
      case LayerKind::SoftmaxHeads:
        break;
    }
  }
  return g;
}

std::vector<Eigen::MatrixXd*> Mlp::parameters() {
  std::vector<Eigen::MatrixXd*> out;
  for (auto& l : linears_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Eigen::MatrixXd*> Mlp::parameters() const {
  std::vector<const Eigen::MatrixXd*> out;
  for (const auto& l : linears_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

Gradients Mlp::zero_gradients() const {
  Gradients out;
  for (const auto& l : linears_) {
    out.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    out.push_back(Eigen::MatrixXd::Zero(l.bias.rows(), 1));
  }
  return out;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : linears_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

std::vector<LogitVector> split_heads(const Eigen::VectorXd& logits, std::size_t heads,
                                     std::size_t categories) {
  if (static_cast<std::size_t>(logits.size()) != heads * categories)
    throw std::invalid_argument("split_heads: size mismatch");
  std::vector<LogitVector> out;
  out.reserve(heads);
  for (std::size_t k = 0; k < heads; ++k) {
    std::vector<double> v(logits.data() + k * categories, logits.data() + (k + 1) * categories);
    out.emplace_back(std::move(v));
  }
  return out;
}

Eigen::VectorXd flatten_heads(const std::vector<std::vector<double>>& per_head) {
  std::size_t n = 0;
  for (const auto& h : per_head) n += h.size();
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  Eigen::Index i = 0;
  for (const auto& h : per_head)
    for (double v : h) out[i++] = v;
  return out;
}

Eigen::VectorXd one_hot(const std::vector<std::size_t>& codes, std::size_t categories) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(codes.size() * categories));
  for (std::size_t k = 0; k < codes.size(); ++k) {
    if (codes[k] >= categories) throw std::invalid_argument("one_hot: code out of range");
    out[static_cast<Eigen::Index>(k * categories + codes[k])] = 1.0;
  }
  return out;
}

Adam::Adam(const std::vector<Eigen::MatrixXd*>& params, Options options) : options_(options) {
  for (const auto* p : params) {
    m_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    v_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
  }
}

void Adam::ascend(const std::vector<Eigen::MatrixXd*>& params, const Gradients& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw std::invalid_argument("Adam::ascend: parameter layout changed");
  ++steps_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grads[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grads[i].cwiseProduct(grads[i]);
    auto& p = *params[i];
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const double m_hat = m_[i](k) / c1;
      const double v_hat = v_[i](k) / c2;
      p(k) += options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

std::vector<double> flatten(const Gradients& grads) {
  std::vector<double> out;
  for (const auto& g : grads) out.insert(out.end(), g.data(), g.data() + g.size());
  return out;
}

}  // namespace arsm
