#include <algorithm>
#include <cmath>
#include <sstream>

#include "arsm/diagnostics.hpp"
#include "arsm/estimators.hpp"
#include "arsm/experiments/runners.hpp"
#include "arsm/pseudo_actions.hpp"
#include "json.hpp"

namespace arsm::experiments {

namespace {

using nlohmann::json;

EstimatorFault parse_fault(const std::string& name) {
  if (name == "arsm_merge_sign_flip") return EstimatorFault::ArsmMergeSignFlip;
  if (name == "frozen_dirichlet") return EstimatorFault::FrozenDirichlet;
  return EstimatorFault::None;
}

std::vector<double> random_logits(std::size_t C, RngStream& rng, double scale) {
  std::vector<double> phi(C);
  for (double& p : phi) p = rng.uniform(-scale, scale);
  return phi;
}

SuiteCheck unbiasedness(const ExperimentConfig& c, EstimatorFault fault) {
  const auto instances = default_unbiasedness_instances(c.seed);
  const auto results = unbiasedness_suite(
      {EstimatorId::Reinforce, EstimatorId::Ar, EstimatorId::Ars, EstimatorId::Arsm}, instances,
      c.samples, c.seed, c.z_limit, fault);
  SuiteCheck check{"unbiasedness", true, "|z| <= " + std::to_string(c.z_limit), 0.0, ""};
  json details = json::array();
  for (const auto& r : results) {
    check.pass = check.pass && r.pass;
    check.statistic = std::max(check.statistic, r.max_abs_z);
    details.push_back({{"instance", r.instance},
                       {"estimator", std::string(to_string(r.estimator))},
                       {"samples", r.samples},
                       {"max_abs_z", r.max_abs_z},
                       {"z", r.z},
                       {"pass", r.pass}});
  }
  check.details = details.dump();
  return check;
}

SuiteCheck zero_sum(const ExperimentConfig& c) {
  RngStream rng(c.seed, derive_stream_id({0x2E50u}));
  double worst = 0.0;
  for (std::size_t i = 0; i < c.invariant_draws; ++i) {
    const std::size_t C = 2 + rng.uniform_index(9);
    const LogitVector phi(random_logits(C, rng, 3.0));
    std::vector<double> table(C);
    for (double& v : table) v = rng.uniform(-5.0, 5.0);
    const RewardFn f([&table](std::size_t z) { return table[z]; });
    const SimplexPoint pi = sample_dirichlet_ones(C, rng);
    const ReferenceChoice ref = ReferenceChoice::draw(1, C, rng);
    for (const GradEstimate& g : {ars_grad(phi, f, pi, ref), arsm_grad(phi, f, pi)}) {
      double s = 0.0;
      for (double v : g.values()) s += v;
      worst = std::max(worst, std::abs(s));
    }
  }
  return {"zero_sum", worst <= 1e-10, "|sum_c g_c| <= 1e-10", worst,
          json({{"draws", c.invariant_draws}}).dump()};
}

SuiteCheck tables(const ExperimentConfig& c) {
  RngStream rng(c.seed, derive_stream_id({0x7AB1u}));
  std::size_t mismatches = 0, structural = 0;
  for (std::size_t i = 0; i < c.invariant_draws; ++i) {
    const std::size_t C = 2 + rng.uniform_index(19);
    const std::vector<double> phi = random_logits(C, rng, 3.0);
    const SimplexPoint pi = sample_dirichlet_ones(C, rng);
    const PseudoActionTable fast = pseudo_action_table_fast(phi, pi);
    const PseudoActionTable naive = pseudo_action_table_naive(phi, pi);
    for (std::size_t m = 0; m < C; ++m) {
      if (fast.at(m, m) != fast.true_action()) ++structural;
      for (std::size_t j = 0; j < C; ++j) {
        if (fast.at(m, j) != naive.at(m, j)) ++mismatches;
        if (fast.at(m, j) != fast.at(j, m)) ++structural;
      }
    }
  }
  return {"pseudo_action_tables", mismatches == 0 && structural == 0,
          "fast == naive exactly; symmetric; diagonal equals true action",
          static_cast<double>(mismatches + structural),
          json({{"instances", c.invariant_draws}, {"mismatches", mismatches},
                {"structural_violations", structural}})
              .dump()};
}

SuiteCheck binary_arm_equivalence(const ExperimentConfig& c, EstimatorFault fault) {
  RngStream rng(c.seed, derive_stream_id({0xC011u}));
  const double sign = fault == EstimatorFault::ArsmMergeSignFlip ? -1.0 : 1.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < c.invariant_draws; ++i) {
    const LogitVector phi(random_logits(2, rng, 3.0));
    const double f0 = rng.uniform(-5.0, 5.0), f1 = rng.uniform(-5.0, 5.0);
    const RewardFn f([f0, f1](std::size_t z) { return z == 0 ? f0 : f1; });
    const double u = rng.uniform_open();
    const GradEstimate arm = arm_binary_grad(phi, f, u);
    const GradEstimate arsm = arsm_grad(phi, f, SimplexPoint::from_probs({u, 1.0 - u}));
    for (std::size_t k = 0; k < 2; ++k)
      worst = std::max(worst, std::abs(arm.values()[k] - sign * arsm.values()[k]));
  }
  return {"binary_arm_equivalence", worst <= 1e-12, "|ARM - ARSM| <= 1e-12", worst,
          json({{"samples", c.invariant_draws}}).dump()};
}

SuiteCheck variance_gap(const ExperimentConfig& c) {
  constexpr std::size_t C = 30, R = 30;
  const RewardFn f([](std::size_t z) { return toy_reward(z, C, R); });
  const LogitVector phi(std::vector<double>(C, 0.0));
  json details;
  std::vector<double> logs;
  for (EstimatorId id : {EstimatorId::Reinforce, EstimatorId::Ar, EstimatorId::Arsm}) {
    std::vector<std::vector<double>> samples;
    samples.reserve(c.variance_draws);
    for (std::size_t i = 0; i < c.variance_draws; ++i) {
      RngStream rng(c.seed, derive_stream_id({0x5A4u, static_cast<std::uint64_t>(id), i}));
      samples.push_back(estimate_univariate(id, phi, f, rng).values());
    }
    const auto lv = log10_mean_variance(samples);
    logs.push_back(lv ? *lv : -INFINITY);
    details[std::string(to_string(id))] = logs.back();
  }
  const double gap = std::min(logs[0] - logs[2], logs[1] - logs[2]);
  return {"variance_gap", gap >= 1.0, "log10 var(ARSM) at least 1 below REINFORCE and AR", gap,
          details.dump()};
}

}  // namespace

std::string SuiteReport::to_json() const {
  json j;
  j["pass"] = pass;
  j["checks"] = json::array();
  for (const auto& c : checks)
    j["checks"].push_back({{"name", c.name},
                           {"pass", c.pass},
                           {"tolerance", c.tolerance},
                           {"statistic", c.statistic},
                           {"details", json::parse(c.details)}});
  return j.dump(2);
}

SuiteReport run_suite(const ExperimentConfig& config) {
  const EstimatorFault fault = parse_fault(config.fault);
  SuiteReport report;
  report.checks.push_back(unbiasedness(config, fault));
  report.checks.push_back(zero_sum(config));
  report.checks.push_back(tables(config));
  report.checks.push_back(binary_arm_equivalence(config, fault));
  report.checks.push_back(variance_gap(config));
  report.pass = std::all_of(report.checks.begin(), report.checks.end(),
                            [](const SuiteCheck& c) { return c.pass; });
  return report;
}

}  // namespace arsm::experiments
