#include "arsm/experiments/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace arsm::experiments {

namespace {

using nlohmann::json;

const std::set<std::string>& allowed_keys(ExperimentKind kind) {
  static const std::set<std::string> toy = {"experiment", "estimator", "seed", "output_path",
                                            "C", "R", "iterations", "learning_rate",
                                            "variance_samples"};
  static const std::set<std::string> vae = {
      "experiment", "estimator",    "seed",          "output_path",     "K",
      "C",          "T",            "hidden_units",  "batch_size",      "dataset_size",
      "image_side", "iterations",   "learning_rate", "decay",           "smoothing_window",
      "checkpoint_path"};
  static const std::set<std::string> rl = {
      "experiment", "estimator", "seed",  "output_path",        "environment",
      "episodes",   "gamma",     "learning_rate", "S_max",      "discount_weighting",
      "entropy_weight", "hidden", "max_steps",    "decay",      "stop_at_moving_average",
      "chain"};
  static const std::set<std::string> suite = {"experiment", "seed",          "output_path",
                                              "samples",    "invariant_draws", "variance_draws",
                                              "z_limit",    "fault"};
  switch (kind) {
    case ExperimentKind::Toy: return toy;
    case ExperimentKind::Vae:
    case ExperimentKind::Hier: return vae;
    case ExperimentKind::Rl: return rl;
    case ExperimentKind::Suite: return suite;
  }
  return suite;
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = get<T>(j, key);
}

std::size_t read_count(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(std::string("config key '") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

ChainMdpConfig parse_chain(const json& j) {
  static const std::set<std::string> keys = {"num_states", "num_actions", "rewards", "transitions",
                                             "initial",    "terminal",    "max_steps"};
  if (!j.is_object()) throw ConfigError("config key 'chain' must be an object");
  for (const auto& item : j.items())
    if (!keys.count(item.key())) throw ConfigError("unknown chain key: " + item.key());
  ChainMdpConfig c;
  c.num_states = read_count(j, "num_states", 0);
  c.num_actions = read_count(j, "num_actions", 0);
  c.rewards = get<std::vector<std::vector<double>>>(j, "rewards");
  c.transitions = get<std::vector<std::vector<std::vector<double>>>>(j, "transitions");
  if (j.contains("initial")) {
    c.initial = get<std::vector<double>>(j, "initial");
  } else {
    c.initial.assign(c.num_states, 0.0);
    if (c.num_states > 0) c.initial[0] = 1.0;
  }
  read(j, "terminal", c.terminal);
  c.max_steps = read_count(j, "max_steps", c.max_steps);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  switch (c.kind) {
    case ExperimentKind::Toy:
      if (c.C < 2) fail("toy: C must be at least 2");
      if (c.R == 0) fail("toy: R must be positive");
      break;
    case ExperimentKind::Vae:
    case ExperimentKind::Hier:
      if (c.C < 2 || c.K == 0 || c.T == 0) fail("vae: need C >= 2, K >= 1, T >= 1");
      if (c.batch_size == 0 || c.dataset_size == 0 || c.image_side == 0 || c.hidden_units == 0)
        fail("vae: batch_size, dataset_size, image_side and hidden_units must be positive");
      if (c.estimator == EstimatorId::Analytic) fail("vae: analytic gradients are not available");
      if (!(c.decay > 0.0 && c.decay < 1.0)) fail("vae: decay must lie in (0, 1)");
      if (c.smoothing_window == 0) fail("vae: smoothing_window must be positive");
      if (!(c.learning_rate > 0.0)) fail("vae: learning_rate must be positive");
      break;
    case ExperimentKind::Rl:
      if (c.estimator != EstimatorId::Arsm && c.estimator != EstimatorId::Ars &&
          c.estimator != EstimatorId::Reinforce)
        fail("rl: estimator must be arsm, ars or reinforce");
      if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) fail("rl: gamma must lie in [0, 1]");
      if (!(c.decay > 0.0 && c.decay < 1.0)) fail("rl: decay must lie in (0, 1)");
      if (!(c.learning_rate > 0.0)) fail("rl: learning_rate must be positive");
      if (c.max_steps == 0) fail("rl: max_steps must be positive");
      break;
    case ExperimentKind::Suite:
      if (c.samples < 2 || c.invariant_draws == 0 || c.variance_draws < 2)
        fail("suite: sample counts too small");
      if (!(c.z_limit > 0.0)) fail("suite: z_limit must be positive");
      if (c.fault != "none" && c.fault != "arsm_merge_sign_flip" && c.fault != "frozen_dirichlet")
        fail("suite: unknown fault '" + c.fault + "'");
      break;
  }
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Toy: return "toy";
    case ExperimentKind::Vae: return "vae";
    case ExperimentKind::Hier: return "hier";
    case ExperimentKind::Rl: return "rl";
    case ExperimentKind::Suite: return "suite";
  }
  return "unknown";
}

ExperimentKind parse_kind(std::string_view name) {
  for (auto k : {ExperimentKind::Toy, ExperimentKind::Vae, ExperimentKind::Hier,
                 ExperimentKind::Rl, ExperimentKind::Suite})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown experiment: " + std::string(name));
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::Toy:
      c.learning_rate = 1.0;
      break;
    case ExperimentKind::Vae:
    case ExperimentKind::Hier:
      c.C = 4;
      c.K = 4;
      c.T = kind == ExperimentKind::Hier ? 2 : 1;
      c.learning_rate = 1e-3;
      c.decay = 0.999;
      break;
    case ExperimentKind::Rl:
      c.learning_rate = 0.01;
      c.decay = 0.99;
      break;
    case ExperimentKind::Suite:
      break;
  }
  return c;
}

ExperimentConfig parse_config(std::string_view json_text, ExperimentKind kind) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const auto& keys = allowed_keys(kind);
  for (const auto& item : j.items())
    if (!keys.count(item.key()))
      throw ConfigError("unknown config key for " + std::string(to_string(kind)) + ": " +
                        item.key());

  ExperimentConfig c = default_config(kind);
  if (j.contains("experiment") && get<std::string>(j, "experiment") != to_string(kind))
    throw ConfigError("config is for experiment '" + get<std::string>(j, "experiment") +
                      "', not '" + std::string(to_string(kind)) + "'");

  if (kind != ExperimentKind::Suite) {
    if (!j.contains("estimator")) throw ConfigError("config key 'estimator' is required");
    try {
      c.estimator = parse_estimator(get<std::string>(j, "estimator"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("config key 'seed' must be unsigned");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  read(j, "output_path", c.output_path);

  c.C = read_count(j, "C", c.C);
  c.R = read_count(j, "R", c.R);
  c.iterations = read_count(j, "iterations", c.iterations);
  read(j, "learning_rate", c.learning_rate);
  c.variance_samples = read_count(j, "variance_samples", c.variance_samples);

  c.K = read_count(j, "K", c.K);
  c.T = read_count(j, "T", c.T);
  c.hidden_units = read_count(j, "hidden_units", c.hidden_units);
  c.batch_size = read_count(j, "batch_size", c.batch_size);
  c.dataset_size = read_count(j, "dataset_size", c.dataset_size);
  c.image_side = read_count(j, "image_side", c.image_side);
  c.smoothing_window = read_count(j, "smoothing_window", c.smoothing_window);
  read(j, "decay", c.decay);
  read(j, "checkpoint_path", c.checkpoint_path);

  if (kind == ExperimentKind::Rl) {
    if (!j.contains("environment")) throw ConfigError("config key 'environment' is required");
    const auto env = get<std::string>(j, "environment");
    if (env == "cartpole") {
      c.environment = RlEnvironment::CartPole;
      if (j.contains("chain")) throw ConfigError("'chain' is only valid with environment 'chain'");
    } else if (env == "chain") {
      c.environment = RlEnvironment::Chain;
      if (!j.contains("chain")) throw ConfigError("environment 'chain' needs a 'chain' object");
      c.chain = parse_chain(j.at("chain"));
      c.max_steps = c.chain.max_steps;
      c.hidden.clear();
      c.S_max = c.chain.num_actions * c.chain.max_steps;
    } else {
      throw ConfigError("unknown environment: " + env);
    }
    c.episodes = read_count(j, "episodes", c.episodes);
    read(j, "gamma", c.gamma);
    c.S_max = read_count(j, "S_max", c.S_max);
    read(j, "discount_weighting", c.discount_weighting);
    read(j, "entropy_weight", c.entropy_weight);
    if (j.contains("hidden")) c.hidden = get<std::vector<std::size_t>>(j, "hidden");
    if (c.environment == RlEnvironment::CartPole) c.max_steps = read_count(j, "max_steps", c.max_steps);
    else if (j.contains("max_steps")) throw ConfigError("set max_steps inside 'chain'");
    if (j.contains("stop_at_moving_average"))
      c.stop_at_moving_average = get<double>(j, "stop_at_moving_average");
  }

  c.samples = read_count(j, "samples", c.samples);
  c.invariant_draws = read_count(j, "invariant_draws", c.invariant_draws);
  c.variance_draws = read_count(j, "variance_draws", c.variance_draws);
  read(j, "z_limit", c.z_limit);
  read(j, "fault", c.fault);

  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path, ExperimentKind kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), kind);
}

}  // namespace arsm::experiments
