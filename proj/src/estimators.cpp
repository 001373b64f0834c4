#include "arsm/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace arsm {

namespace {

GradEstimate single_head(EstimatorId id, std::vector<double> g, std::size_t f_evals) {
  GradEstimate out;
  out.estimator = id;
  out.grad.push_back(std::move(g));
  out.f_evals = f_evals;
  return out;
}

// Lazily evaluated per-category reward cache.
class CategoryCache {
 public:
  CategoryCache(const RewardFn& f, std::size_t num_categories)
      : f_(f), values_(num_categories, std::numeric_limits<double>::quiet_NaN()),
        known_(num_categories, false) {}

  double operator()(std::size_t c) {
    if (!known_[c]) {
      values_[c] = f_(c);
      known_[c] = true;
      ++distinct_;
    }
    return values_[c];
  }
  std::size_t distinct() const { return distinct_; }

 private:
  const RewardFn& f_;
  std::vector<double> values_;
  std::vector<bool> known_;
  std::size_t distinct_ = 0;
};

class VectorCache {
 public:
  explicit VectorCache(const VectorRewardFn& f) : f_(f) {}

  double operator()(const std::vector<std::size_t>& z) {
    auto it = values_.find(z);
    if (it != values_.end()) return it->second;
    const double v = f_(z);
    values_.emplace(z, v);
    return v;
  }
  std::size_t distinct() const { return values_.size(); }

 private:
  const VectorRewardFn& f_;
  std::map<std::vector<std::size_t>, double> values_;
};

void check_heads(std::span<const LogitVector> phi, std::span<const SimplexPoint> pi) {
  if (phi.empty() || phi.size() != pi.size())
    throw std::invalid_argument("multivariate_grad: head count mismatch");
  const std::size_t C = phi.front().size();
  for (std::size_t k = 0; k < phi.size(); ++k)
    if (phi[k].size() != C || pi[k].size() != C)
      throw std::invalid_argument("multivariate_grad: inconsistent head dimensions");
}

}  // namespace

std::string_view to_string(EstimatorId id) {
  switch (id) {
    case EstimatorId::Analytic: return "analytic";
    case EstimatorId::Reinforce: return "reinforce";
    case EstimatorId::Ar: return "ar";
    case EstimatorId::Ars: return "ars";
    case EstimatorId::Arsm: return "arsm";
  }
  return "unknown";
}

EstimatorId parse_estimator(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "analytic") return EstimatorId::Analytic;
  if (lower == "reinforce") return EstimatorId::Reinforce;
  if (lower == "ar") return EstimatorId::Ar;
  if (lower == "ars") return EstimatorId::Ars;
  if (lower == "arsm") return EstimatorId::Arsm;
  throw std::invalid_argument("unknown estimator: " + std::string(name));
}

ReferenceChoice ReferenceChoice::draw(std::size_t heads, std::size_t num_categories,
                                      RngStream& rng) {
  ReferenceChoice ref;
  ref.j.resize(heads);
  for (auto& j : ref.j) j = rng.uniform_index(num_categories);
  return ref;
}

GradEstimate analytic_grad_univariate(const LogitVector& phi, const RewardFn& f) {
  const std::size_t C = phi.size();
  const ProbVector p = softmax(phi);
  std::vector<double> fv(C);
  double expected = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    fv[c] = f(c);
    expected += fv[c] * p[c];
  }
  std::vector<double> g(C);
  for (std::size_t c = 0; c < C; ++c) g[c] = p[c] * fv[c] - p[c] * expected;
  return single_head(EstimatorId::Analytic, std::move(g), C);
}

GradEstimate reinforce_grad_at(const LogitVector& phi, const RewardFn& f, std::size_t z) {
  if (z >= phi.size()) throw std::invalid_argument("reinforce_grad_at: category out of range");
  const ProbVector p = softmax(phi);
  const double fz = f(z);
  std::vector<double> g(phi.size());
  for (std::size_t c = 0; c < phi.size(); ++c)
    g[c] = fz * ((c == z ? 1.0 : 0.0) - p[c]);
  return single_head(EstimatorId::Reinforce, std::move(g), 1);
}

GradEstimate reinforce_grad(const LogitVector& phi, const RewardFn& f, RngStream& rng) {
  const ProbVector p = softmax(phi);
  const double u = rng.uniform_open();
  std::size_t z = phi.size() - 1;
  double cdf = 0.0;
  for (std::size_t c = 0; c < phi.size(); ++c) {
    cdf += p[c];
    if (u < cdf) {
      z = c;
      break;
    }
  }
  return reinforce_grad_at(phi, f, z);
}

GradEstimate ar_grad(const LogitVector& phi, const RewardFn& f, const SimplexPoint& pi) {
  const std::size_t C = phi.size();
  const std::size_t z = racing_sample(phi, pi);
  const double fz = f(z);
  std::vector<double> g(C);
  for (std::size_t c = 0; c < C; ++c)
    g[c] = fz * (1.0 - static_cast<double>(C) * pi.pi[c]);
  return single_head(EstimatorId::Ar, std::move(g), 1);
}

std::vector<double> ars_from_reward_column(std::span<const double> column, double pi_j) {
  const std::size_t C = column.size();
  // Work with differences from the first entry so identical rewards give an
  // exact zero.
  const double ref = column[0];
  double mean = 0.0;
  for (double v : column) mean += v - ref;
  mean /= static_cast<double>(C);
  const double weight = 1.0 - static_cast<double>(C) * pi_j;
  std::vector<double> g(C);
  for (std::size_t c = 0; c < C; ++c) g[c] = ((column[c] - ref) - mean) * weight;
  return g;
}

std::vector<double> arsm_from_reward_matrix(std::span<const double> rewards,
                                            std::span<const double> pi) {
  const std::size_t C = pi.size();
  if (rewards.size() != C * C)
    throw std::invalid_argument("arsm_from_reward_matrix: reward matrix must be C x C");
  const double inv_c = 1.0 / static_cast<double>(C);
  const double ref = rewards[0];
  std::vector<double> col_mean(C, 0.0);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t j = 0; j < C; ++j) col_mean[j] += rewards[c * C + j] - ref;
  for (double& m : col_mean) m *= inv_c;
  std::vector<double> g(C, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    double acc = 0.0;
    for (std::size_t j = 0; j < C; ++j)
      acc += ((rewards[c * C + j] - ref) - col_mean[j]) * (inv_c - pi[j]);
    g[c] = acc;
  }
  return g;
}

GradEstimate ars_grad(const LogitVector& phi, const RewardFn& f, const SimplexPoint& pi,
                      const ReferenceChoice& ref) {
  const std::size_t C = phi.size();
  if (pi.size() != C) throw std::invalid_argument("ars_grad: dimension mismatch");
  if (ref.j.size() != 1 || ref.j[0] >= C)
    throw std::invalid_argument("ars_grad: need one reference category in range");
  const std::size_t j = ref.j[0];
  const std::size_t z = racing_sample(phi, pi);
  CategoryCache cache(f, C);
  cache(z);
  std::vector<double> column(C);
  for (std::size_t c = 0; c < C; ++c) column[c] = cache(pseudo_action(phi.values(), pi, z, c, j));
  return single_head(EstimatorId::Ars, ars_from_reward_column(column, pi.pi[j]),
                     cache.distinct());
}

GradEstimate arsm_grad(const LogitVector& phi, const RewardFn& f, const SimplexPoint& pi) {
  const std::size_t C = phi.size();
  const PseudoActionTable table = pseudo_action_table_fast(phi, pi);
  const std::size_t z = table.true_action();
  CategoryCache cache(f, C);
  const double fz = cache(z);
  std::vector<double> g(C, 0.0);
  if (table.all_equal_true_action())
    return single_head(EstimatorId::Arsm, std::move(g), cache.distinct());

  // F_cj = f(z) + D_cj with D nonzero only on exception entries, so
  // g_c = sum_j D_cj w_j - sum_j mean_c(D_cj) w_j with w_j = 1/C - pi_j.
  const double inv_c = 1.0 / static_cast<double>(C);
  std::vector<double> weighted(C, 0.0);
  std::vector<double> col_sum(C, 0.0);
  for (const auto& e : table.exceptions()) {
    const double d = cache(e.action) - fz;
    weighted[e.row] += d * (inv_c - pi.pi[e.col]);
    weighted[e.col] += d * (inv_c - pi.pi[e.row]);
    col_sum[e.col] += d;
    col_sum[e.row] += d;
  }
  double baseline = 0.0;
  for (std::size_t j = 0; j < C; ++j) baseline += col_sum[j] * inv_c * (inv_c - pi.pi[j]);
  for (std::size_t c = 0; c < C; ++c) g[c] = weighted[c] - baseline;
  return single_head(EstimatorId::Arsm, std::move(g), cache.distinct());
}

GradEstimate arm_binary_grad(const LogitVector& phi, const RewardFn& f, double u) {
  if (phi.size() != 2) throw std::invalid_argument("arm_binary_grad: requires C = 2");
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("arm_binary_grad: u must lie in (0, 1)");
  const double threshold = 1.0 / (1.0 + std::exp(-(phi[0] - phi[1])));
  auto category = [threshold](double v) -> std::size_t { return v < threshold ? 0 : 1; };
  const std::size_t a = category(u);
  const std::size_t b = category(1.0 - u);
  std::vector<double> g(2, 0.0);
  std::size_t evals = 1;
  if (a != b) {
    g[0] = (f(a) - f(b)) * (0.5 - u);
    g[1] = -g[0];
    evals = 2;
  } else {
    f(a);
  }
  return single_head(EstimatorId::Arsm, std::move(g), evals);
}

GradEstimate multivariate_grad(std::span<const LogitVector> phi, const VectorRewardFn& f,
                               std::span<const SimplexPoint> pi, EstimatorId mode,
                               const ReferenceChoice* ref, MultivariateTrace* trace) {
  check_heads(phi, pi);
  const std::size_t K = phi.size();
  const std::size_t C = phi.front().size();
  const double dC = static_cast<double>(C);

  std::vector<std::size_t> z(K);
  for (std::size_t k = 0; k < K; ++k) z[k] = racing_sample(phi[k], pi[k]);

  VectorCache cache(f);
  const double fz = cache(z);

  GradEstimate out;
  out.estimator = mode;
  out.grad.assign(K, std::vector<double>(C, 0.0));
  std::vector<double> rewards;
  std::vector<std::size_t> unique_others;

  switch (mode) {
    case EstimatorId::Analytic:
      throw std::invalid_argument("multivariate_grad: analytic mode is not a sampling estimator");
    case EstimatorId::Reinforce:
      for (std::size_t k = 0; k < K; ++k) {
        const ProbVector p = softmax(phi[k]);
        for (std::size_t c = 0; c < C; ++c)
          out.grad[k][c] = fz * ((z[k] == c ? 1.0 : 0.0) - p[c]);
      }
      rewards = {fz};
      break;
    case EstimatorId::Ar:
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t c = 0; c < C; ++c) out.grad[k][c] = fz * (1.0 - dC * pi[k].pi[c]);
      rewards = {fz};
      break;
    case EstimatorId::Ars: {
      if (ref == nullptr || ref->j.size() != K)
        throw std::invalid_argument("multivariate_grad: ARS needs one reference per head");
      rewards.resize(C);
      std::vector<std::size_t> v(K);
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t k = 0; k < K; ++k)
          v[k] = pseudo_action(phi[k].values(), pi[k], z[k], c, ref->j[k]);
        rewards[c] = cache(v);
      }
      for (std::size_t k = 0; k < K; ++k)
        out.grad[k] = ars_from_reward_column(rewards, pi[k].pi[ref->j[k]]);
      break;
    }
    case EstimatorId::Arsm: {
      std::vector<PseudoActionTable> tables;
      tables.reserve(K);
      bool any_exception = false;
      for (std::size_t k = 0; k < K; ++k) {
        tables.push_back(pseudo_action_table_fast(phi[k], pi[k]));
        any_exception = any_exception || !tables.back().all_equal_true_action();
        unique_others.push_back(tables.back().unique_others().size());
      }
      rewards.assign(C * C, fz);
      if (any_exception) {
        std::vector<std::size_t> v(K);
        for (std::size_t c = 1; c < C; ++c) {
          for (std::size_t j = 0; j < c; ++j) {
            for (std::size_t k = 0; k < K; ++k) v[k] = tables[k].at(c, j);
            const double r = cache(v);
            rewards[c * C + j] = r;
            rewards[j * C + c] = r;
          }
        }
        for (std::size_t k = 0; k < K; ++k)
          out.grad[k] = arsm_from_reward_matrix(rewards, pi[k].pi);
      }
      break;
    }
  }
  out.f_evals = cache.distinct();
  if (trace != nullptr) {
    trace->true_action = z;
    trace->reward_matrix = std::move(rewards);
    trace->unique_others_per_head = std::move(unique_others);
  }
  return out;
}

GradEstimate estimate_univariate(EstimatorId id, const LogitVector& phi, const RewardFn& f,
                                 RngStream& rng) {
  switch (id) {
    case EstimatorId::Analytic: return analytic_grad_univariate(phi, f);
    case EstimatorId::Reinforce: return reinforce_grad(phi, f, rng);
    case EstimatorId::Ar: return ar_grad(phi, f, sample_dirichlet_ones(phi.size(), rng));
    case EstimatorId::Ars: {
      RngStream ref_rng = rng.split(rng.next());
      const SimplexPoint pi = sample_dirichlet_ones(phi.size(), rng);
      return ars_grad(phi, f, pi, ReferenceChoice::draw(1, phi.size(), ref_rng));
    }
    case EstimatorId::Arsm: return arsm_grad(phi, f, sample_dirichlet_ones(phi.size(), rng));
  }
  throw std::invalid_argument("estimate_univariate: unknown estimator");
}

double surrogate_loss(const GradEstimate& g, std::span<const std::vector<double>> phi) {
  if (g.grad.size() != phi.size())
    throw std::invalid_argument("surrogate_loss: head count mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) {
    if (g.grad[k].size() != phi[k].size())
      throw std::invalid_argument("surrogate_loss: category count mismatch");
    for (std::size_t c = 0; c < phi[k].size(); ++c) total += g.grad[k][c] * phi[k][c];
  }
  return total;
}

double surrogate_loss(const GradEstimate& g, std::span<const LogitVector> phi) {
  std::vector<std::vector<double>> raw;
  raw.reserve(phi.size());
  for (const auto& p : phi) raw.emplace_back(p.values().begin(), p.values().end());
  return surrogate_loss(g, raw);
}

}  // namespace arsm
