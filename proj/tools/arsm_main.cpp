// Experiment runner: arsm <toy|vae|hier|rl|suite> --config <path> [--seed N] [--out <path>]
//
// Exit codes: 0 success, 1 suite failure, 2 configuration error, 3 runtime error.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "arsm/experiments/config.hpp"
#include "arsm/experiments/csv.hpp"
#include "arsm/experiments/runners.hpp"

namespace ex = arsm::experiments;

namespace {

int run(ex::ExperimentKind kind, const std::string& config_path, std::optional<std::uint64_t> seed,
        const std::string& out_path) {
  ex::ExperimentConfig config = ex::load_config(config_path, kind);
  if (seed) config.seed = *seed;
  if (!out_path.empty()) config.output_path = out_path;

  std::unique_ptr<std::ofstream> file;
  std::ostream* out = &std::cout;
  if (!config.output_path.empty()) {
    file = std::make_unique<std::ofstream>(config.output_path);
    if (!*file) throw std::runtime_error("cannot open output file: " + config.output_path);
    out = file.get();
  }

  switch (kind) {
    case ex::ExperimentKind::Toy: {
      const auto r = ex::run_toy(config, out);
      std::cerr << "final expected reward " << ex::format_number(r.final_expected_reward) << '\n';
      return 0;
    }
    case ex::ExperimentKind::Vae:
    case ex::ExperimentKind::Hier: {
      const auto r = ex::run_vae(config, out);
      std::cerr << "final smoothed ELBO " << ex::format_number(r.final_smoothed_elbo) << '\n';
      return 0;
    }
    case ex::ExperimentKind::Rl: {
      const auto r = ex::run_rl(config, out);
      if (!r.moving_average.empty())
        std::cerr << "final moving-average return " << ex::format_number(r.moving_average.back())
                  << '\n';
      if (r.solved_episode) std::cerr << "solved at episode " << *r.solved_episode << '\n';
      return 0;
    }
    case ex::ExperimentKind::Suite: {
      const auto report = ex::run_suite(config);
      *out << report.to_json() << '\n';
      for (const auto& c : report.checks)
        std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << '\n';
      return report.pass ? 0 : 1;
    }
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Categorical gradient estimator experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  for (const char* name : {"toy", "vae", "hier", "rl", "suite"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out_path, "output path (CSV trace, or JSON report for suite)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const auto kind = ex::parse_kind(app.get_subcommands().front()->get_name());
    return run(kind, config_path, seed, out_path);
  } catch (const ex::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
