#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "arsm/environments.hpp"
#include "arsm/estimators.hpp"

namespace arsm::experiments {

/// Invalid or incomplete configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { Toy, Vae, Hier, Rl, Suite };

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_kind(std::string_view name);

enum class RlEnvironment { CartPole, Chain };

/// Union of the settings of every experiment kind. Only the keys that belong
/// to the selected kind are accepted in a config file.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Toy;
  EstimatorId estimator = EstimatorId::Arsm;
  std::uint64_t seed = 1;
  std::string output_path;  // empty: standard output

  // toy
  std::size_t C = 30;
  std::size_t R = 30;
  std::size_t iterations = 5000;
  double learning_rate = 1.0;
  std::size_t variance_samples = 100;

  // vae / hier
  std::size_t K = 4;
  std::size_t T = 1;
  std::size_t hidden_units = 32;
  std::size_t batch_size = 16;
  std::size_t dataset_size = 256;
  std::size_t image_side = 8;
  std::size_t smoothing_window = 100;
  double decay = 0.999;
  std::string checkpoint_path;

  // rl
  RlEnvironment environment = RlEnvironment::CartPole;
  std::size_t episodes = 2000;
  double gamma = 0.99;
  std::size_t S_max = 16;
  bool discount_weighting = false;
  double entropy_weight = 0.0;
  std::vector<std::size_t> hidden = {10, 10};
  std::size_t max_steps = 500;
  std::optional<double> stop_at_moving_average;
  ChainMdpConfig chain;

  // suite
  std::size_t samples = 200000;
  std::size_t invariant_draws = 100000;
  std::size_t variance_draws = 10000;
  double z_limit = 4.0;
  std::string fault = "none";
};

/// Defaults for a kind before any file is applied.
ExperimentConfig default_config(ExperimentKind kind);

/// Parses JSON text for a subcommand; unknown keys and wrong types are errors.
ExperimentConfig parse_config(std::string_view json_text, ExperimentKind kind);
ExperimentConfig load_config(const std::string& path, ExperimentKind kind);

}  // namespace arsm::experiments
