#include "arsm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "arsm/parallel.hpp"

namespace arsm {

EmaMoments::EmaMoments(double decay) : decay_(decay) {
  if (!(decay > 0.0 && decay < 1.0)) throw std::invalid_argument("EmaMoments: decay must lie in (0, 1)");
}

void EmaMoments::update(std::span<const double> sample) {
  if (count_ == 0) {
    m1_.assign(sample.size(), 0.0);
    m2_.assign(sample.size(), 0.0);
  } else if (sample.size() != m1_.size()) {
    throw std::invalid_argument("EmaMoments::update: dimension changed");
  }
  const double d = decay_;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    m1_[i] = d * m1_[i] + (1.0 - d) * sample[i];
    m2_[i] = d * m2_[i] + (1.0 - d) * sample[i] * sample[i];
  }
  ++count_;
}

std::vector<double> EmaMoments::mean() const {
  const double correction = 1.0 - std::pow(decay_, static_cast<double>(count_));
  std::vector<double> out(m1_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = m1_[i] / correction;
  return out;
}

std::vector<double> EmaMoments::variance() const {
  std::vector<double> out(m1_.size(), 0.0);
  if (count_ <= 1) return out;
  const double correction = 1.0 - std::pow(decay_, static_cast<double>(count_));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double mu = m1_[i] / correction;
    out[i] = std::max(0.0, m2_[i] / correction - mu * mu);
  }
  return out;
}

EmaMoments ema_update(EmaMoments state, std::span<const double> sample) {
  state.update(sample);
  return state;
}

std::optional<double> log_variance_report(const EmaMoments& state, std::size_t min_count) {
  if (state.count() < min_count || state.dim() == 0) return std::nullopt;
  const std::vector<double> v = state.variance();
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (!(mean > 0.0)) return std::nullopt;
  return std::log10(mean);
}

std::vector<double> batch_variance(const std::vector<std::vector<double>>& samples) {
  if (samples.size() < 2) throw std::invalid_argument("batch_variance: need at least two samples");
  const std::size_t dim = samples.front().size();
  // Shifted by the first sample so a constant stream gives exactly zero.
  const std::vector<double>& shift = samples.front();
  std::vector<double> mean(dim, 0.0), var(dim, 0.0);
  for (const auto& s : samples) {
    if (s.size() != dim) throw std::invalid_argument("batch_variance: ragged samples");
    for (std::size_t i = 0; i < dim; ++i) mean[i] += s[i] - shift[i];
  }
  for (double& m : mean) m /= static_cast<double>(samples.size());
  for (const auto& s : samples)
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = (s[i] - shift[i]) - mean[i];
      var[i] += d * d;
    }
  for (double& v : var) v /= static_cast<double>(samples.size() - 1);
  return var;
}

std::optional<double> log10_mean_variance(const std::vector<std::vector<double>>& samples) {
  const std::vector<double> v = batch_variance(samples);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (!(mean > 0.0)) return std::nullopt;
  return std::log10(mean);
}

UnbiasednessResult unbiasedness_check(EstimatorId estimator, const UnbiasednessInstance& instance,
                                      std::size_t n, std::uint64_t seed, double z_limit,
                                      EstimatorFault fault) {
  const LogitVector& phi = instance.phi;
  const std::size_t C = phi.size();
  UnbiasednessResult r;
  r.instance = instance.name;
  r.estimator = estimator;
  r.samples = n;
  r.z_limit = z_limit;
  r.oracle = analytic_grad_univariate(phi, RewardFn(instance.reward)).values();

  if (estimator == EstimatorId::Analytic) {
    r.samples = 1;
    r.mean = r.oracle;
    r.std_error.assign(C, 0.0);
    r.z.assign(C, 0.0);
    r.pass = true;
    return r;
  }
  if (n < 2) throw std::invalid_argument("unbiasedness_check: need at least two samples");

  constexpr std::size_t kChunk = 8192;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> sums(chunks, std::vector<double>(C, 0.0));
  std::vector<std::vector<double>> sumsq(chunks, std::vector<double>(C, 0.0));
  RngStream frozen_rng(seed, derive_stream_id({0xF0F0u}));
  const SimplexPoint frozen = sample_dirichlet_ones(C, frozen_rng);

  parallel_for(chunks, [&](std::size_t chunk) {
    RngStream rng(seed, derive_stream_id({static_cast<std::uint64_t>(estimator), chunk}));
    RngStream ref_rng = rng.split(1);
    const RewardFn f(instance.reward);
    const std::size_t begin = chunk * kChunk;
    const std::size_t end = std::min(n, begin + kChunk);
    for (std::size_t i = begin; i < end; ++i) {
      GradEstimate g;
      if (estimator == EstimatorId::Reinforce) {
        g = reinforce_grad(phi, f, rng);
      } else {
        const SimplexPoint pi =
            fault == EstimatorFault::FrozenDirichlet ? frozen : sample_dirichlet_ones(C, rng);
        switch (estimator) {
          case EstimatorId::Ar: g = ar_grad(phi, f, pi); break;
          case EstimatorId::Ars: g = ars_grad(phi, f, pi, ReferenceChoice::draw(1, C, ref_rng)); break;
          case EstimatorId::Arsm: g = arsm_grad(phi, f, pi); break;
          default: throw std::logic_error("unbiasedness_check: unexpected estimator");
        }
      }
      const double sign =
          (fault == EstimatorFault::ArsmMergeSignFlip && estimator == EstimatorId::Arsm) ? -1.0 : 1.0;
      const auto& v = g.values();
      for (std::size_t c = 0; c < C; ++c) {
        const double x = sign * v[c];
        sums[chunk][c] += x;
        sumsq[chunk][c] += x * x;
      }
    }
  });

  std::vector<double> s(C, 0.0), s2(C, 0.0);
  for (std::size_t k = 0; k < chunks; ++k)
    for (std::size_t c = 0; c < C; ++c) {
      s[c] += sums[k][c];
      s2[c] += sumsq[k][c];
    }
  const double dn = static_cast<double>(n);
  r.mean.resize(C);
  r.std_error.resize(C);
  r.z.resize(C);
  r.pass = true;
  for (std::size_t c = 0; c < C; ++c) {
    r.mean[c] = s[c] / dn;
    const double var = std::max(0.0, (s2[c] - s[c] * s[c] / dn) / (dn - 1.0));
    r.std_error[c] = std::sqrt(var / dn);
    const double diff = r.mean[c] - r.oracle[c];
    if (diff == 0.0) {
      r.z[c] = 0.0;
    } else if (r.std_error[c] == 0.0) {
      r.z[c] = std::copysign(std::numeric_limits<double>::infinity(), diff);
    } else {
      r.z[c] = diff / r.std_error[c];
    }
    r.max_abs_z = std::max(r.max_abs_z, std::abs(r.z[c]));
    if (!(std::abs(r.z[c]) <= z_limit)) r.pass = false;
  }
  return r;
}

std::vector<UnbiasednessResult> unbiasedness_suite(const std::vector<EstimatorId>& estimators,
                                                   const std::vector<UnbiasednessInstance>& instances,
                                                   std::size_t n, std::uint64_t seed,
                                                   double z_limit, EstimatorFault fault) {
  std::vector<UnbiasednessResult> out;
  for (std::size_t i = 0; i < instances.size(); ++i)
    for (EstimatorId e : estimators)
      out.push_back(unbiasedness_check(e, instances[i], n, splitmix64(seed + i), z_limit, fault));
  return out;
}

std::vector<UnbiasednessInstance> default_unbiasedness_instances(std::uint64_t seed) {
  struct Shape {
    std::size_t C;
    int reward;  // 0: z, 1: z^2, 2: indicator of the last category
  };
  const std::vector<Shape> shapes = {{2, 0},  {2, 1},  {2, 2},  {3, 0},  {3, 1},
                                     {3, 2},  {3, 0},  {5, 0},  {5, 1},  {5, 2},
                                     {5, 1},  {10, 0}, {10, 1}, {10, 2}, {10, 1}};
  static const char* kNames[] = {"z", "z2", "last"};
  std::vector<UnbiasednessInstance> out;
  RngStream rng(seed, derive_stream_id({0x1A57u}));
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto [C, kind] = shapes[i];
    std::vector<double> phi(C);
    for (double& p : phi) p = rng.uniform(-1.5, 1.5);
    std::function<double(std::size_t)> f;
    switch (kind) {
      case 0: f = [](std::size_t z) { return static_cast<double>(z + 1); }; break;
      case 1: f = [](std::size_t z) { return static_cast<double>((z + 1) * (z + 1)); }; break;
      default: f = [C = C](std::size_t z) { return z + 1 == C ? 1.0 : 0.0; }; break;
    }
    out.push_back({"C" + std::to_string(C) + "_" + kNames[kind] + "_" + std::to_string(i),
                   LogitVector(std::move(phi)), std::move(f)});
  }
  return out;
}

}  // namespace arsm
