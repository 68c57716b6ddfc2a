#include "tadam/experiment_config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <functional>
#include <sstream>

#include "tadam/csv.hpp"

namespace tadam {
namespace {

struct Field {
  std::string_view key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view)> set;
};

template <class T, class Format>
std::string join(const std::vector<T>& items, Format format) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += format(items[i]);
  }
  return out;
}

template <class Parse>
auto parse_list(std::string_view text, Parse parse) {
  using T = decltype(parse(std::string_view{}));
  std::vector<T> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) out.push_back(parse(trim(item)));
  return out;
}

bool parse_bool(std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument("expected true or false, got '" + std::string(text) + "'");
}

std::string format_bool(bool value) { return value ? "true" : "false"; }

std::uint64_t parse_unsigned(std::string_view text) {
  const auto value = parse_integer(text);
  if (value < 0) throw std::invalid_argument("expected a nonnegative integer, got '" + std::string(text) + "'");
  return static_cast<std::uint64_t>(value);
}

int parse_int(std::string_view text) { return static_cast<int>(parse_integer(text)); }

NoiseSetting parse_noise_setting(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) {
    throw std::invalid_argument("noise setting must be nu:scale, got '" + std::string(text) + "'");
  }
  return {parse_double(parts[0]), parse_double(parts[1])};
}

std::string format_noise_setting(const NoiseSetting& s) {
  return format_double(s.nu_noise) + ":" + format_double(s.scale);
}

NoiseSpec parse_noise_spec(std::string_view text) {
  const auto parts = split(trim(text), ':');
  if (parts.size() != 3) {
    throw std::invalid_argument("noise spec must be nu:scale:p, got '" + std::string(text) + "'");
  }
  return {parse_double(parts[0]), parse_double(parts[1]), parse_int(parts[2])};
}

std::string format_noise_spec(const NoiseSpec& s) {
  return format_double(s.nu_noise) + ":" + format_double(s.scale) + ":" + std::to_string(s.p_percent);
}

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  using SV = std::string_view;
  auto num = [](double v) { return format_double(v); };
  static const std::vector<Field> table = {
      {"experiment", [](const C& c) { return std::string(to_string(c.experiment)); },
       [](C& c, SV v) { c.experiment = parse_experiment(v); }},
      {"algorithm", [](const C& c) { return std::string(to_string(c.optimizer.algorithm)); },
       [](C& c, SV v) { c.optimizer.algorithm = parse_algorithm(v); }},
      {"alpha", [num](const C& c) { return num(c.optimizer.alpha); },
       [](C& c, SV v) { c.optimizer.alpha = parse_double(v); }},
      {"beta1", [num](const C& c) { return num(c.optimizer.beta1); },
       [](C& c, SV v) { c.optimizer.beta1 = parse_double(v); }},
      {"beta2", [num](const C& c) { return num(c.optimizer.beta2); },
       [](C& c, SV v) { c.optimizer.beta2 = parse_double(v); }},
      {"epsilon", [num](const C& c) { return num(c.optimizer.epsilon); },
       [](C& c, SV v) { c.optimizer.epsilon = parse_double(v); }},
      {"nu", [](const C& c) { return to_string(c.optimizer.nu); },
       [](C& c, SV v) { c.optimizer.nu = parse_degrees_of_freedom(v); }},
      {"amsgrad", [](const C& c) { return format_bool(c.optimizer.amsgrad); },
       [](C& c, SV v) { c.optimizer.amsgrad = parse_bool(v); }},
      {"optimizers",
       [](const C& c) { return join(c.optimizers, [](Algorithm a) { return std::string(to_string(a)); }); },
       [](C& c, SV v) { c.optimizers = parse_list(v, parse_algorithm); }},
      {"noise_settings", [](const C& c) { return join(c.noise_settings, format_noise_setting); },
       [](C& c, SV v) { c.noise_settings = parse_list(v, parse_noise_setting); }},
      {"p_values", [](const C& c) { return join(c.p_values, [](int p) { return std::to_string(p); }); },
       [](C& c, SV v) { c.p_values = parse_list(v, parse_int); }},
      {"seeds",
       [](const C& c) { return join(c.seeds, [](std::uint64_t s) { return std::to_string(s); }); },
       [](C& c, SV v) { c.seeds = parse_list(v, parse_unsigned); }},
      {"epochs", [](const C& c) { return std::to_string(c.epochs); },
       [](C& c, SV v) { c.epochs = parse_int(v); }},
      {"batch_size", [](const C& c) { return std::to_string(c.batch_size); },
       [](C& c, SV v) { c.batch_size = parse_int(v); }},
      {"n_train", [](const C& c) { return std::to_string(c.n_train); },
       [](C& c, SV v) { c.n_train = parse_unsigned(v); }},
      {"eval_points", [](const C& c) { return std::to_string(c.eval_points); },
       [](C& c, SV v) { c.eval_points = parse_unsigned(v); }},
      {"write_datasets", [](const C& c) { return format_bool(c.write_datasets); },
       [](C& c, SV v) { c.write_datasets = parse_bool(v); }},
      {"equivalence_steps", [](const C& c) { return std::to_string(c.equivalence_steps); },
       [](C& c, SV v) { c.equivalence_steps = parse_integer(v); }},
      {"equivalence_nu", [num](const C& c) { return num(c.equivalence_nu); },
       [](C& c, SV v) { c.equivalence_nu = parse_double(v); }},
      {"equivalence_noise", [](const C& c) { return format_noise_spec(c.equivalence_noise); },
       [](C& c, SV v) { c.equivalence_noise = parse_noise_spec(v); }},
      {"verify_dims",
       [](const C& c) { return join(c.verify_dims, [](std::size_t d) { return std::to_string(d); }); },
       [](C& c, SV v) {
         auto dims = parse_list(v, parse_unsigned);
         c.verify_dims.assign(dims.begin(), dims.end());
       }},
      {"verify_nu", [](const C& c) { return to_string(c.verify_nu); },
       [](C& c, SV v) { c.verify_nu = parse_degrees_of_freedom(v); }},
      {"verify_beta1", [num](const C& c) { return join(c.verify_beta1, num); },
       [](C& c, SV v) { c.verify_beta1 = parse_list(v, parse_double); }},
      {"verify_steps", [](const C& c) { return std::to_string(c.verify_steps); },
       [](C& c, SV v) { c.verify_steps = parse_integer(v); }},
      {"regret_horizon", [](const C& c) { return std::to_string(c.regret_horizon); },
       [](C& c, SV v) { c.regret_horizon = parse_integer(v); }},
      {"regret_alpha", [num](const C& c) { return num(c.regret_alpha); },
       [](C& c, SV v) { c.regret_alpha = parse_double(v); }},
      {"regret_dim", [](const C& c) { return std::to_string(c.regret_dim); },
       [](C& c, SV v) { c.regret_dim = parse_unsigned(v); }},
      {"regret_outlier_prob", [num](const C& c) { return num(c.regret_outlier_prob); },
       [](C& c, SV v) { c.regret_outlier_prob = parse_double(v); }},
      {"regret_outlier_value", [num](const C& c) { return num(c.regret_outlier_value); },
       [](C& c, SV v) { c.regret_outlier_value = parse_double(v); }},
      {"output_dir", [](const C& c) { return c.output_dir; },
       [](C& c, SV v) { c.output_dir = std::string(v); }},
      {"workers", [](const C& c) { return std::to_string(c.workers); },
       [](C& c, SV v) { c.workers = parse_int(v); }},
  };
  return table;
}

}  // namespace

std::string_view to_string(Experiment experiment) {
  switch (experiment) {
    case Experiment::Regress: return "regress";
    case Experiment::Verify: return "verify";
    case Experiment::Regret: return "regret";
    case Experiment::Equivalence: return "equivalence";
  }
  return "unknown";
}

Experiment parse_experiment(std::string_view text) {
  text = trim(text);
  if (text == "regress") return Experiment::Regress;
  if (text == "verify") return Experiment::Verify;
  if (text == "regret") return Experiment::Regret;
  if (text == "equivalence") return Experiment::Equivalence;
  throw ConfigError("unknown experiment '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
  optimizer.validate();
  if (std::find(optimizers.begin(), optimizers.end(), Algorithm::TAdam) != optimizers.end()) {
    auto tadam = optimizer;
    tadam.algorithm = Algorithm::TAdam;
    tadam.validate();
  }
  if (seeds.empty()) throw ConfigError("seeds: at least one seed is required");
  if (epochs < 1) throw ConfigError("epochs: must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size: must be at least 1");
  if (n_train < 1) throw ConfigError("n_train: must be at least 1");
  if (eval_points < 2) throw ConfigError("eval_points: must be at least 2");
  if (optimizers.empty()) throw ConfigError("optimizers: at least one optimizer is required");
  if (equivalence_steps < 0) throw ConfigError("equivalence_steps: must be nonnegative");
  if (!(equivalence_nu > 0.0)) throw ConfigError("equivalence_nu: must be positive");
  if (verify_steps < 10000) throw ConfigError("verify_steps: at least 10000 steps are required");
  if (regret_horizon < 1) throw ConfigError("regret_horizon: must be at least 1");
  if (!(regret_alpha > 0.0)) throw ConfigError("regret_alpha: must be positive");
  if (regret_dim < 1) throw ConfigError("regret_dim: must be at least 1");
  if (workers < 0) throw ConfigError("workers: must be nonnegative");
  try {
    for (const auto& spec : noise_grid()) spec.validate();
    equivalence_noise.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("noise: ") + e.what());
  }
}

std::vector<NoiseSpec> ExperimentConfig::noise_grid() const {
  std::vector<NoiseSpec> grid;
  for (const auto& setting : noise_settings) {
    for (const int p : p_values) grid.push_back({setting.nu_noise, setting.scale, p});
  }
  return grid;
}

ExperimentConfig default_config(Experiment experiment) {
  ExperimentConfig config;
  config.experiment = experiment;
  return config;
}

std::string serialize(const ExperimentConfig& config) {
  std::string out;
  for (const auto& field : fields()) {
    out += field.key;
    out += " = ";
    out += field.get(config);
    out += '\n';
  }
  return out;
}

void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  for (const auto& field : fields()) {
    if (field.key != key) continue;
    try {
      field.set(config, value);
    } catch (const std::exception& e) {
      throw ConfigError(std::string(key) + ": " + e.what());
    }
    return;
  }
  throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

std::string config_hash(const ExperimentConfig& config) {
  const auto text = serialize(config);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    char buf[3];
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

}  // namespace tadam
