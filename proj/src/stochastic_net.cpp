#include "arsm/stochastic_net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace arsm {

namespace {

double softplus(double l) { return std::max(l, 0.0) + std::log1p(std::exp(-std::abs(l))); }

double log_categorical(const std::vector<LogitVector>& heads, const Codes& z) {
  double total = 0.0;
  for (std::size_t k = 0; k < heads.size(); ++k) total += log_softmax(heads[k].values())[z[k]];
  return total;
}

void check_codes(const Codes& z, const VaeArchitecture& arch) {
  if (z.size() != arch.heads) throw std::invalid_argument("CategoricalVae: wrong number of heads");
  for (std::size_t c : z)
    if (c >= arch.categories) throw std::invalid_argument("CategoricalVae: code out of range");
}

// d/d(logits) of sum_k ln softmax(psi_k)[z_k].
Eigen::VectorXd categorical_score(const Eigen::VectorXd& logits, const Codes& z,
                                  std::size_t categories) {
  Eigen::VectorXd g(logits.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    const auto off = static_cast<Eigen::Index>(k * categories);
    const ProbVector p = softmax(std::span<const double>(logits.data() + off, categories));
    for (std::size_t c = 0; c < categories; ++c)
      g[off + static_cast<Eigen::Index>(c)] = (c == z[k] ? 1.0 : 0.0) - p[c];
  }
  return g;
}

void add_into(Gradients& dst, std::size_t offset, const Gradients& src) {
  for (std::size_t i = 0; i < src.size(); ++i) dst[offset + i] += src[i];
}

}  // namespace

CategoricalVae::CategoricalVae(VaeArchitecture arch) : arch_(arch) {
  if (arch_.layers == 0 || arch_.heads == 0 || arch_.categories < 2 || arch_.data_dim == 0 ||
      arch_.hidden == 0)
    throw std::invalid_argument("CategoricalVae: invalid architecture");
  const std::size_t kc = arch_.code_dim();
  for (std::size_t t = 0; t < arch_.layers; ++t) {
    if (t == 0) {
      encoders_.emplace_back(std::vector<LayerSpec>{
          LayerSpec::linear(arch_.data_dim, arch_.hidden),
          LayerSpec::leaky_relu(arch_.hidden, arch_.leaky_slope),
          LayerSpec::linear(arch_.hidden, kc),
          LayerSpec::softmax_heads(arch_.heads, arch_.categories)});
      decoders_.emplace_back(std::vector<LayerSpec>{
          LayerSpec::linear(kc, arch_.hidden),
          LayerSpec::leaky_relu(arch_.hidden, arch_.leaky_slope),
          LayerSpec::linear(arch_.hidden, arch_.data_dim)});
    } else {
      encoders_.emplace_back(std::vector<LayerSpec>{
          LayerSpec::linear(kc, kc), LayerSpec::softmax_heads(arch_.heads, arch_.categories)});
      decoders_.emplace_back(std::vector<LayerSpec>{
          LayerSpec::linear(kc, kc), LayerSpec::softmax_heads(arch_.heads, arch_.categories)});
    }
  }
}

void CategoricalVae::init(RngStream& rng) {
  for (auto& e : encoders_) e.init_glorot(rng);
  for (auto& d : decoders_) d.init_glorot(rng);
}

Eigen::VectorXd CategoricalVae::encoder_input(std::size_t t, const Eigen::VectorXd& x,
                                              const CodeStack& upstream) const {
  if (t >= arch_.layers) throw std::invalid_argument("encoder_input: layer out of range");
  if (t == 0) return x;
  if (upstream.size() < t) throw std::invalid_argument("encoder_input: missing upstream codes");
  return one_hot(upstream[t - 1], arch_.categories);
}

std::vector<LogitVector> CategoricalVae::encoder_logits(std::size_t t,
                                                        const Eigen::VectorXd& input) const {
  return split_heads(encoders_.at(t).forward(input), arch_.heads, arch_.categories);
}

CategoricalLayerSample CategoricalVae::sample_layer(std::size_t t, const Eigen::VectorXd& input,
                                                    RngStream& rng) const {
  CategoricalLayerSample s;
  s.logits = encoder_logits(t, input);
  for (const auto& phi : s.logits) {
    s.dirichlets.push_back(sample_dirichlet_ones(arch_.categories, rng));
    s.actions.push_back(racing_sample(phi, s.dirichlets.back()));
  }
  return s;
}

void CategoricalVae::sample_downstream(const Eigen::VectorXd& x, CodeStack& codes,
                                       RngStream& rng) const {
  while (codes.size() < arch_.layers) {
    const std::size_t t = codes.size();
    codes.push_back(sample_layer(t, encoder_input(t, x, codes), rng).actions);
  }
}

double bernoulli_log_likelihood(const Eigen::VectorXd& x, const Eigen::VectorXd& logits) {
  if (x.size() != logits.size())
    throw std::invalid_argument("bernoulli_log_likelihood: size mismatch");
  double total = 0.0;
  for (Eigen::Index d = 0; d < x.size(); ++d) total += x[d] * logits[d] - softplus(logits[d]);
  return total;
}

double CategoricalVae::log_likelihood(const Eigen::VectorXd& x, const Codes& z1) const {
  check_codes(z1, arch_);
  return bernoulli_log_likelihood(x, decoders_[0].forward(one_hot(z1, arch_.categories)));
}

double CategoricalVae::log_prior(const CodeStack& z) const {
  if (z.size() != arch_.layers) throw std::invalid_argument("log_prior: need one code per layer");
  double total = -static_cast<double>(arch_.heads) * std::log(static_cast<double>(arch_.categories));
  for (std::size_t t = 1; t < arch_.layers; ++t) {
    check_codes(z[t], arch_);
    check_codes(z[t - 1], arch_);
    const auto heads = split_heads(decoders_[t].forward(one_hot(z[t], arch_.categories)),
                                   arch_.heads, arch_.categories);
    total += log_categorical(heads, z[t - 1]);
  }
  return total;
}

double CategoricalVae::log_q(const Eigen::VectorXd& x, const CodeStack& z) const {
  if (z.size() != arch_.layers) throw std::invalid_argument("log_q: need one code per layer");
  double total = 0.0;
  for (std::size_t t = 0; t < arch_.layers; ++t) {
    check_codes(z[t], arch_);
    total += log_categorical(encoder_logits(t, encoder_input(t, x, z)), z[t]);
  }
  return total;
}

ElboSample CategoricalVae::elbo(const Eigen::VectorXd& x, const CodeStack& z) const {
  ElboSample s;
  s.log_likelihood = log_likelihood(x, z.at(0));
  s.log_prior = log_prior(z);
  s.log_q = log_q(x, z);
  s.elbo = s.log_likelihood + s.log_prior - s.log_q;
  return s;
}

ElboSample CategoricalVae::elbo_estimate(const Eigen::VectorXd& x, RngStream& rng) const {
  CodeStack z;
  sample_downstream(x, z, rng);
  return elbo(x, z);
}

GradientSample CategoricalVae::gradient_sample(const Eigen::VectorXd& x, EstimatorId mode,
                                               RngStream& rng) const {
  GradientSample out;
  out.grads = zero_gradients();
  const std::size_t C = arch_.categories;
  std::size_t offset = 0;

  for (std::size_t t = 0; t < arch_.layers; ++t) {
    RngStream layer_rng = rng.split(t);
    RngStream upstream_rng = layer_rng.split(0);
    RngStream pi_rng = layer_rng.split(1);
    RngStream ref_rng = layer_rng.split(2);
    RngStream downstream_rng = layer_rng.split(3);

    LayerTrace trace;
    for (std::size_t s = 0; s < t; ++s)
      trace.upstream.push_back(
          sample_layer(s, encoder_input(s, x, trace.upstream), upstream_rng).actions);

    Mlp::Tape tape;
    const Eigen::VectorXd logits =
        encoders_[t].forward(encoder_input(t, x, trace.upstream), &tape);
    trace.sample.logits = split_heads(logits, arch_.heads, C);
    for (const auto& phi : trace.sample.logits) {
      trace.sample.dirichlets.push_back(sample_dirichlet_ones(C, pi_rng));
      trace.sample.actions.push_back(racing_sample(phi, trace.sample.dirichlets.back()));
    }

    // The estimator evaluates the true vector first; remember its completion
    // so the decoder gradient uses the same sample.
    bool first_call = true;
    CodeStack true_codes;
    double true_value = 0.0;
    VectorRewardFn reward([&](std::span<const std::size_t> zt) {
      CodeStack codes = trace.upstream;
      codes.emplace_back(zt.begin(), zt.end());
      sample_downstream(x, codes, downstream_rng);
      const double v = elbo(x, codes).elbo;
      if (first_call) {
        true_codes = codes;
        true_value = v;
        first_call = false;
      }
      return v;
    });

    ReferenceChoice ref;
    if (mode == EstimatorId::Ars) ref = ReferenceChoice::draw(arch_.heads, C, ref_rng);
    trace.logit_grad = multivariate_grad(trace.sample.logits, reward, trace.sample.dirichlets,
                                         mode, mode == EstimatorId::Ars ? &ref : nullptr);

    Gradients local = encoders_[t].zero_gradients();
    encoders_[t].backward(tape, flatten_heads(trace.logit_grad.grad), local);
    add_into(out.grads, offset, local);
    offset += local.size();

    if (t == 0) {
      out.elbo = true_value;
      out.true_codes = true_codes;
    }
    out.layers.push_back(std::move(trace));
  }

  // Pathwise gradient of ln p(x | z_1) + sum ln p(z_t | z_{t+1}) at the true sample.
  const CodeStack& z = out.true_codes;
  for (std::size_t t = 0; t < arch_.layers; ++t) {
    Mlp::Tape tape;
    const Eigen::VectorXd out_logits = decoders_[t].forward(one_hot(z[t], C), &tape);
    Eigen::VectorXd g;
    if (t == 0) {
      g.resize(out_logits.size());
      for (Eigen::Index d = 0; d < g.size(); ++d)
        g[d] = x[d] - 1.0 / (1.0 + std::exp(-out_logits[d]));
    } else {
      g = categorical_score(out_logits, z[t - 1], C);
    }
    Gradients local = decoders_[t].zero_gradients();
    decoders_[t].backward(tape, g, local);
    add_into(out.grads, offset, local);
    offset += local.size();
  }
  return out;
}

TrainDiagnostics CategoricalVae::train_step(std::span<const Eigen::VectorXd> batch,
                                            EstimatorId mode, Adam& optimizer, RngStream& rng) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  TrainDiagnostics diag;
  diag.f_evals_per_layer.assign(arch_.layers, 0.0);
  Gradients total = zero_gradients();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    RngStream sample_rng = rng.split(b);
    GradientSample s = gradient_sample(batch[b], mode, sample_rng);
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += s.grads[i];
    diag.elbo += s.elbo * inv_b;
    for (std::size_t t = 0; t < arch_.layers; ++t)
      diag.f_evals_per_layer[t] += static_cast<double>(s.layers[t].logit_grad.f_evals) * inv_b;
  }
  for (auto& g : total) g *= inv_b;
  const std::size_t n_enc = encoder_parameter_count();
  for (std::size_t i = 0; i < n_enc; ++i)
    diag.encoder_grad.insert(diag.encoder_grad.end(), total[i].data(),
                             total[i].data() + total[i].size());
  optimizer.ascend(parameters(), total);
  return diag;
}

double CategoricalVae::marginal_loglik_estimate(const Eigen::VectorXd& x, std::size_t n_samples,
                                                RngStream& rng) const {
  if (n_samples == 0) throw std::invalid_argument("marginal_loglik_estimate: need samples");
  const std::size_t C = arch_.categories;
  std::vector<double> logs(n_samples);
  CodeStack z(arch_.layers, Codes(arch_.heads));
  for (std::size_t i = 0; i < n_samples; ++i) {
    for (auto& c : z.back()) c = rng.uniform_index(C);
    for (std::size_t t = arch_.layers - 1; t >= 1; --t) {
      const auto heads = split_heads(decoders_[t].forward(one_hot(z[t], C)), arch_.heads, C);
      for (std::size_t k = 0; k < arch_.heads; ++k)
        z[t - 1][k] = racing_sample(heads[k], sample_dirichlet_ones(C, rng));
    }
    logs[i] = log_likelihood(x, z[0]);
  }
  return log_mean_exp(logs);
}

std::vector<Eigen::MatrixXd*> CategoricalVae::parameters() {
  std::vector<Eigen::MatrixXd*> out;
  for (auto& e : encoders_)
    for (auto* p : e.parameters()) out.push_back(p);
  for (auto& d : decoders_)
    for (auto* p : d.parameters()) out.push_back(p);
  return out;
}

std::vector<const Eigen::MatrixXd*> CategoricalVae::parameters() const {
  std::vector<const Eigen::MatrixXd*> out;
  for (const auto& e : encoders_)
    for (const auto* p : e.parameters()) out.push_back(p);
  for (const auto& d : decoders_)
    for (const auto* p : d.parameters()) out.push_back(p);
  return out;
}

Gradients CategoricalVae::zero_gradients() const {
  Gradients out;
  for (const auto* p : parameters()) out.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
  return out;
}

std::size_t CategoricalVae::encoder_parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : encoders_) n += e.parameters().size();
  return n;
}

std::string CategoricalVae::to_json() const {
  nlohmann::json j;
  j["architecture"] = {{"data_dim", arch_.data_dim}, {"layers", arch_.layers},
                       {"heads", arch_.heads},       {"categories", arch_.categories},
                       {"hidden", arch_.hidden},     {"leaky_slope", arch_.leaky_slope}};
  nlohmann::json tensors = nlohmann::json::object();
  auto emit = [&](const std::string& prefix, const Mlp& net) {
    const auto params = net.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& m = *params[i];
      std::vector<double> data;
      data.reserve(static_cast<std::size_t>(m.size()));
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
      tensors[prefix + ".param" + std::to_string(i)] = {{"shape", {m.rows(), m.cols()}},
                                                        {"data", data}};
    }
  };
  for (std::size_t t = 0; t < encoders_.size(); ++t) emit("encoder" + std::to_string(t), encoders_[t]);
  for (std::size_t t = 0; t < decoders_.size(); ++t) emit("decoder" + std::to_string(t), decoders_[t]);
  j["tensors"] = std::move(tensors);
  return j.dump(1);
}

CategoricalVae CategoricalVae::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const auto& a = j.at("architecture");
  VaeArchitecture arch;
  arch.data_dim = a.at("data_dim").get<std::size_t>();
  arch.layers = a.at("layers").get<std::size_t>();
  arch.heads = a.at("heads").get<std::size_t>();
  arch.categories = a.at("categories").get<std::size_t>();
  arch.hidden = a.at("hidden").get<std::size_t>();
  arch.leaky_slope = a.at("leaky_slope").get<double>();
  CategoricalVae vae(arch);
  const auto& tensors = j.at("tensors");
  auto fill = [&](const std::string& prefix, Mlp& net) {
    auto params = net.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& entry = tensors.at(prefix + ".param" + std::to_string(i));
      const auto shape = entry.at("shape").get<std::vector<Eigen::Index>>();
      const auto data = entry.at("data").get<std::vector<double>>();
      auto& m = *params[i];
      if (shape.size() != 2 || shape[0] != m.rows() || shape[1] != m.cols() ||
          data.size() != static_cast<std::size_t>(m.size()))
        throw std::invalid_argument("checkpoint: tensor shape mismatch for " + prefix);
      std::size_t idx = 0;
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = data[idx++];
    }
  };
  for (std::size_t t = 0; t < arch.layers; ++t) fill("encoder" + std::to_string(t), vae.encoders_[t]);
  for (std::size_t t = 0; t < arch.layers; ++t) fill("decoder" + std::to_string(t), vae.decoders_[t]);
  return vae;
}

void CategoricalVae::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << to_json() << '\n';
}

CategoricalVae CategoricalVae::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

double log_mean_exp(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("log_mean_exp: empty input");
  return log_sum_exp(values) - std::log(static_cast<double>(values.size()));
}

std::vector<Eigen::VectorXd> bars_and_stripes(std::size_t n, std::size_t side, RngStream& rng) {
  if (side == 0) throw std::invalid_argument("bars_and_stripes: side must be positive");
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd img = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(side * side));
    const bool rows = rng.uniform_open() < 0.5;
    for (std::size_t line = 0; line < side; ++line) {
      if (rng.uniform_open() >= 0.5) continue;
      for (std::size_t p = 0; p < side; ++p) {
        const std::size_t r = rows ? line : p;
        const std::size_t c = rows ? p : line;
        img[static_cast<Eigen::Index>(r * side + c)] = 1.0;
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

}  // namespace arsm
