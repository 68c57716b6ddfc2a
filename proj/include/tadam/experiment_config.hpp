#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tadam/noise.hpp"
#include "tadam/optim.hpp"

namespace tadam {

enum class Experiment { Regress, Verify, Regret, Equivalence };

std::string_view to_string(Experiment experiment);
Experiment parse_experiment(std::string_view text);

/// (nu_noise, scale) pair of the corruption model; crossed with p_values to form
/// the sweep's noise grid.
struct NoiseSetting {
  double nu_noise = 1.0;
  double scale = 0.05;

  bool operator==(const NoiseSetting&) const = default;
};

/// Everything needed to reproduce one invocation of the bench tool. The text
/// form is a flat `key = value` file; see README for the key list.
struct ExperimentConfig {
  Experiment experiment = Experiment::Regress;
  OptimizerConfig optimizer;

  // Regression sweep.
  std::vector<Algorithm> optimizers{Algorithm::Adam, Algorithm::TAdam};
  std::vector<NoiseSetting> noise_settings{{1.0, 0.05}, {2.0, 0.03}};
  std::vector<int> p_values{0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  int epochs = 200;
  int batch_size = 64;
  std::size_t n_train = 1000;
  std::size_t eval_points = 1000;
  bool write_datasets = true;

  // Adam/TAdam twin-run check.
  std::int64_t equivalence_steps = 1000;
  double equivalence_nu = 1e10;
  NoiseSpec equivalence_noise{1.0, 0.05, 0};

  // Monte-Carlo checks; verify_nu = auto pairs nu with d.
  std::vector<std::size_t> verify_dims{5, 10, 50};
  DegreesOfFreedom verify_nu = DegreesOfFreedom::automatic();
  std::vector<double> verify_beta1{0.7, 0.9, 0.99};
  std::int64_t verify_steps = 100000;

  // Online regret runs.
  std::int64_t regret_horizon = 10000;
  double regret_alpha = 0.5;
  std::size_t regret_dim = 1;
  double regret_outlier_prob = 0.0;
  double regret_outlier_value = 100.0;

  std::string output_dir = "results";
  /// 0 = one worker per hardware thread.
  int workers = 0;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  /// noise_settings x p_values, settings-major.
  std::vector<NoiseSpec> noise_grid() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Defaults for a given experiment.
ExperimentConfig default_config(Experiment experiment);

/// Canonical text: every key, fixed order, shortest round-trip numbers.
std::string serialize(const ExperimentConfig& config);

/// Parses `key = value` lines ('#' starts a comment) on top of `base`.
/// Unknown keys and malformed values raise ConfigError with the line number.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});

/// Applies one `key = value` assignment.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Hex SHA-256 of the canonical serialization.
std::string config_hash(const ExperimentConfig& config);

}  // namespace tadam
