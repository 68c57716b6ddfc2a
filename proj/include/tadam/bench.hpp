#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "tadam/experiment_config.hpp"
#include "tadam/mlp.hpp"
#include "tadam/noise.hpp"
#include "tadam/optim.hpp"
#include "tadam/verify.hpp"

namespace tadam {

struct EpochRecord {
  double train_loss = 0.0;
  // Student-t weight statistics over every group-step of the epoch; NaN for
  // optimizers other than TAdam.
  double mean_weight = 0.0;
  double min_weight = 0.0;
  double mean_beta_w = 0.0;
};

/// One training trajectory of the regression experiment.
struct RunRecord {
  Algorithm optimizer = Algorithm::Adam;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  int epochs = 0;
  std::vector<EpochRecord> history;
  /// MSE against sin(2*pi*x) on the dense evaluation grid; NaN for failed runs.
  double final_clean_mse = 0.0;
  /// Empty on success; otherwise why the run was aborted.
  std::string failure;
  std::vector<double> grid_x;
  std::vector<double> predictions;
  double mean_weight = 0.0;
  double min_weight = 0.0;
  double mean_beta_w = 0.0;
  double wall_seconds = 0.0;

  bool ok() const { return failure.empty(); }
  /// Stable file-name stem, e.g. tadam_nu1_s0.05_p50_seed3.
  std::string key() const;
};

/// Evenly spaced points on [0, 1], endpoints included.
std::vector<double> evaluation_grid(std::size_t points);

/// Epoch-wise minibatch order for a dataset of n points; identical for every
/// optimizer trained at the same seed.
std::vector<std::size_t> epoch_permutation(std::size_t n, Engine& engine);

/// Trains the 5x50 regression network once. The dataset and initial weights
/// depend only on (noise, seed), so Adam and TAdam runs at the same seed see
/// identical data.
RunRecord train_regression(const ExperimentConfig& config, Algorithm optimizer,
                           const NoiseSpec& noise, std::uint64_t seed);

/// Runs `count` independent jobs on up to `workers` threads (0 = hardware).
/// Exceptions from jobs are rethrown after all workers finish.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& job);

/// Every (noise setting, p, seed, optimizer) combination of the config, returned
/// in that nesting order regardless of completion order. When `run_dir` is
/// non-empty each finished run is also written there as its own file.
std::vector<RunRecord> run_regression_sweep(const ExperimentConfig& config,
                                            const std::filesystem::path& run_dir = {});

struct AggregateRow {
  Algorithm optimizer = Algorithm::Adam;
  NoiseSpec noise;
  std::size_t runs = 0;
  std::size_t failed = 0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

/// Median and interquartile range of final clean-MSE per (optimizer, noise).
/// Sorted by key; independent of record order.
std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records);

/// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> values, double q);

struct EquivalenceReport {
  std::int64_t steps = 0;
  double nu = 0.0;
  /// max over steps of ||theta_tadam - theta_adam||_inf / ||theta_adam||_inf
  double max_relative_divergence = 0.0;
  std::vector<double> divergence;  // per step
  double min_weight = 0.0;
  double max_weight = 0.0;
};

/// Twin Adam / TAdam(nu = config.equivalence_nu) runs from the same initial
/// weights on the same minibatch stream.
EquivalenceReport run_equivalence_check(const ExperimentConfig& config);

/// One row of results.csv.
struct ResultRow {
  std::string optimizer;
  int p = 0;
  double nu_noise = 0.0;
  double scale = 0.0;
  std::uint64_t seed = 0;
  double final_clean_mse = 0.0;
  int epochs = 0;

  bool operator==(const ResultRow&) const = default;
};

ResultRow to_result_row(const RunRecord& record);
void write_results_csv(std::ostream& out, const std::vector<RunRecord>& records);
std::vector<ResultRow> read_results_csv(std::istream& in);
void write_diagnostics_csv(std::ostream& out, const std::vector<RunRecord>& records);
void write_predictions_csv(std::ostream& out, const std::vector<RunRecord>& records);
void write_summary_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

/// Writes results.csv, diagnostics.csv, predictions.csv, summary.csv and
/// manifest.json into `output_dir`. Returns the written file names.
std::vector<std::string> emit_results(const std::vector<RunRecord>& records,
                                      const ExperimentConfig& config,
                                      const std::filesystem::path& output_dir);

/// manifest.json contents: config hash and text, seeds, library versions, files.
std::string manifest_json(const ExperimentConfig& config, const std::vector<std::string>& files,
                          const std::vector<std::string>& flagged_runs);

struct ExperimentOutcome {
  std::vector<std::string> files;
  /// Human-readable one-line summaries for the console.
  std::vector<std::string> summary;
};

/// Runs config.experiment and writes every output file under config.output_dir.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

}  // namespace tadam
