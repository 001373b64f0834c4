#include <deque>
#include <memory>
#include <sstream>

#include "arsm/diagnostics.hpp"
#include "arsm/experiments/csv.hpp"
#include "arsm/experiments/runners.hpp"
#include "arsm/stochastic_net.hpp"

namespace arsm::experiments {

VaeResult run_vae(const ExperimentConfig& config, std::ostream* csv) {
  VaeArchitecture arch;
  arch.data_dim = config.image_side * config.image_side;
  arch.layers = config.T;
  arch.heads = config.K;
  arch.categories = config.C;
  arch.hidden = config.hidden_units;

  RngStream data_rng(config.seed, derive_stream_id({0xDA7Au}));
  const std::vector<Eigen::VectorXd> data =
      bars_and_stripes(config.dataset_size, config.image_side, data_rng);

  CategoricalVae vae(arch);
  RngStream init_rng(config.seed, derive_stream_id({0x1417u}));
  vae.init(init_rng);
  Adam optimizer(vae.parameters(), Adam::Options{config.learning_rate, 0.9, 0.999, 1e-8});
  EmaMoments ema(config.decay);

  std::unique_ptr<CsvWriter> writer;
  if (csv != nullptr) {
    std::ostringstream meta;
    meta << "estimator=" << to_string(config.estimator) << " seed=" << config.seed
         << " K=" << config.K << " C=" << config.C << " T=" << config.T
         << " batch_size=" << config.batch_size
         << " learning_rate=" << format_number(config.learning_rate);
    std::vector<std::string> columns = {"iteration", "elbo", "elbo_smoothed", "log10_grad_variance"};
    for (std::size_t t = 0; t < config.T; ++t) columns.push_back("f_evals_layer" + std::to_string(t));
    writer = std::make_unique<CsvWriter>(*csv, std::string(to_string(config.kind)), meta.str(),
                                         std::move(columns));
  }

  VaeResult result;
  result.mean_f_evals.assign(config.T, 0.0);
  std::deque<double> window;
  double window_sum = 0.0;
  std::vector<Eigen::VectorXd> batch(config.batch_size);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    RngStream batch_rng(config.seed, derive_stream_id({it, 0}));
    for (auto& x : batch) x = data[batch_rng.uniform_index(data.size())];
    RngStream step_rng(config.seed, derive_stream_id({it, 1}));
    const TrainDiagnostics diag = vae.train_step(batch, config.estimator, optimizer, step_rng);

    window.push_back(diag.elbo);
    window_sum += diag.elbo;
    if (window.size() > config.smoothing_window) {
      window_sum -= window.front();
      window.pop_front();
    }
    const double smoothed = window_sum / static_cast<double>(window.size());
    ema.update(diag.encoder_grad);
    result.elbo.push_back(diag.elbo);
    result.smoothed_elbo.push_back(smoothed);
    for (std::size_t t = 0; t < config.T; ++t) result.mean_f_evals[t] += diag.f_evals_per_layer[t];

    if (writer) {
      std::vector<CsvWriter::Cell> row = {static_cast<double>(it), diag.elbo, smoothed,
                                          log_variance_report(ema)};
      for (double v : diag.f_evals_per_layer) row.emplace_back(v);
      writer->row(row);
    }
  }
  if (config.iterations > 0) {
    for (double& v : result.mean_f_evals) v /= static_cast<double>(config.iterations);
    result.final_smoothed_elbo = result.smoothed_elbo.back();
  }
  if (!config.checkpoint_path.empty()) vae.save(config.checkpoint_path);
  return result;
}

}  // namespace arsm::experiments
