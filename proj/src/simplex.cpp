#include "arsm/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace arsm {

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

LogitVector::LogitVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2)
    throw std::invalid_argument("LogitVector: need at least two categories");
  if (!all_finite(values_))
    throw std::invalid_argument("LogitVector: logits must be finite");
}

ProbVector::ProbVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("ProbVector: empty");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("ProbVector: entries must lie in [0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("ProbVector: entries must sum to one");
}

SimplexPoint SimplexPoint::from_weights(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w))
      throw std::invalid_argument("SimplexPoint: weights must be positive and finite");
    total += w;
  }
  SimplexPoint out;
  out.pi.resize(weights.size());
  out.log_pi.resize(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out.pi[i] = weights[i] / total;
    out.log_pi[i] = std::log(out.pi[i]);
  }
  return out;
}

SimplexPoint SimplexPoint::from_probs(std::vector<double> pi) {
  double total = 0.0;
  for (double p : pi) {
    if (!(p > 0.0 && p < 1.0))
      throw std::invalid_argument("SimplexPoint: coordinates must lie in (0, 1)");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("SimplexPoint: coordinates must sum to one");
  SimplexPoint out;
  out.log_pi.resize(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) out.log_pi[i] = std::log(pi[i]);
  out.pi = std::move(pi);
  return out;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

std::vector<double> log_softmax(std::span<const double> phi) {
  if (phi.empty() || !all_finite(phi))
    throw std::invalid_argument("log_softmax: logits must be non-empty and finite");
  const double lse = log_sum_exp(phi);
  std::vector<double> out(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) out[i] = phi[i] - lse;
  return out;
}

ProbVector softmax(std::span<const double> phi) {
  if (phi.empty() || !all_finite(phi))
    throw std::invalid_argument("softmax: logits must be non-empty and finite");
  const double m = *std::max_element(phi.begin(), phi.end());
  std::vector<double> p(phi.size());
  double s = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    p[i] = std::exp(phi[i] - m);
    s += p[i];
  }
  for (double& v : p) v /= s;
  return ProbVector(std::move(p));
}

SimplexPoint sample_dirichlet_ones(std::size_t num_categories, RngStream& rng) {
  if (num_categories < 2)
    throw std::invalid_argument("sample_dirichlet_ones: need at least two categories");
  std::vector<double> e(num_categories);
  for (double& x : e) x = rng.exponential();
  return SimplexPoint::from_weights(e);
}

std::size_t racing_sample(std::span<const double> phi, const SimplexPoint& pi) {
  if (phi.size() != pi.size() || phi.empty())
    throw std::invalid_argument("racing_sample: dimension mismatch");
  std::size_t best = 0;
  double best_val = pi.log_pi[0] - phi[0];
  for (std::size_t i = 1; i < phi.size(); ++i) {
    const double v = pi.log_pi[i] - phi[i];
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  return best;
}

std::vector<double> exponential_racing_check(std::span<const double> lambdas,
                                             std::size_t n, RngStream& rng) {
  if (lambdas.empty()) throw std::invalid_argument("exponential_racing_check: no rates");
  for (double l : lambdas)
    if (!(l > 0.0) || !std::isfinite(l))
      throw std::invalid_argument("exponential_racing_check: rates must be positive");
  std::vector<double> counts(lambdas.size(), 0.0);
  for (std::size_t draw = 0; draw < n; ++draw) {
    std::size_t best = 0;
    double best_tau = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      const double tau = rng.exponential() / lambdas[i];
      if (tau < best_tau) {
        best_tau = tau;
        best = i;
      }
    }
    counts[best] += 1.0;
  }
  if (n > 0)
    for (double& c : counts) c /= static_cast<double>(n);
  return counts;
}

}  // namespace arsm
