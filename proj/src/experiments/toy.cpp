#include <memory>
#include <sstream>

#include "arsm/diagnostics.hpp"
#include "arsm/estimators.hpp"
#include "arsm/experiments/csv.hpp"
#include "arsm/experiments/runners.hpp"

namespace arsm::experiments {

double toy_reward(std::size_t idx, std::size_t C, std::size_t R) {
  return 0.5 + static_cast<double>(idx + 1) / static_cast<double>(C * R);
}

ToyResult run_toy(const ExperimentConfig& config, std::ostream* csv) {
  const std::size_t C = config.C;
  const std::size_t R = config.R;
  const RewardFn f([C, R](std::size_t idx) { return toy_reward(idx, C, R); });
  std::vector<double> reward_table(C);
  for (std::size_t c = 0; c < C; ++c) reward_table[c] = toy_reward(c, C, R);

  std::unique_ptr<CsvWriter> writer;
  if (csv != nullptr) {
    std::ostringstream meta;
    meta << "estimator=" << to_string(config.estimator) << " seed=" << config.seed << " C=" << C
         << " R=" << R << " learning_rate=" << format_number(config.learning_rate);
    writer = std::make_unique<CsvWriter>(
        *csv, "toy", meta.str(),
        std::vector<std::string>{"iteration", "expected_reward", "grad_first", "grad_last",
                                 "prob_first", "prob_last", "log10_grad_variance", "f_evals"});
  }

  auto expected = [&](const ProbVector& p) {
    double e = 0.0;
    for (std::size_t c = 0; c < C; ++c) e += p[c] * reward_table[c];
    return e;
  };

  ToyResult result;
  std::vector<double> phi(C, 0.0);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    const LogitVector logits(phi);
    const ProbVector p = softmax(logits);
    const double e = expected(p);
    result.expected_reward.push_back(e);

    RngStream rng(config.seed, derive_stream_id({it, 0}));
    const GradEstimate g = estimate_univariate(config.estimator, logits, f, rng);

    std::optional<double> log_var;
    if (config.variance_samples >= 2) {
      std::vector<std::vector<double>> probes;
      probes.reserve(config.variance_samples);
      for (std::size_t s = 0; s < config.variance_samples; ++s) {
        RngStream probe_rng(config.seed, derive_stream_id({it, 1, s}));
        probes.push_back(estimate_univariate(config.estimator, logits, f, probe_rng).values());
      }
      log_var = log10_mean_variance(probes);
    }
    if (writer)
      writer->row({static_cast<double>(it), e, g.values().front(), g.values().back(), p[0],
                   p[C - 1], log_var, static_cast<double>(g.f_evals)});

    for (std::size_t c = 0; c < C; ++c) phi[c] += config.learning_rate * g.values()[c];
  }
  const ProbVector p = softmax(phi);
  result.final_expected_reward = expected(p);
  result.expected_reward.push_back(result.final_expected_reward);
  result.final_phi = phi;
  result.final_probs.assign(p.values().begin(), p.values().end());
  return result;
}

}  // namespace arsm::experiments
