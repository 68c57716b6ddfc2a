#include "tadam/bench.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>
#include <tuple>

#include "tadam/csv.hpp"

#ifndef TADAM_VERSION
#define TADAM_VERSION "unknown"
#endif

namespace tadam {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Running min/mean of the student-t diagnostics.
struct WeightStats {
  double weight_sum = 0.0;
  double beta_sum = 0.0;
  double min_weight = std::numeric_limits<double>::infinity();
  std::size_t count = 0;

  void add(const std::vector<StepDiagnostics>& diags) {
    for (const auto& d : diags) {
      weight_sum += d.weight;
      beta_sum += d.beta_w;
      min_weight = std::min(min_weight, d.weight);
      ++count;
    }
  }
  double mean_weight() const { return count ? weight_sum / static_cast<double>(count) : kNaN; }
  double mean_beta() const { return count ? beta_sum / static_cast<double>(count) : kNaN; }
  double min() const { return count ? min_weight : kNaN; }
};

// Cycles through the training set in per-epoch shuffled minibatches.
class MinibatchStream {
 public:
  MinibatchStream(const Dataset& data, int batch_size, std::uint64_t seed)
      : data_(data), batch_size_(static_cast<std::size_t>(batch_size)),
        engine_(make_stream(seed, Stream::Shuffle)) {}

  /// Fills `batch` with the next minibatch; returns true when it is the last of an epoch.
  bool next(Batch& batch) {
    if (cursor_ == 0) order_ = epoch_permutation(data_.size(), engine_);
    const auto size = std::min(batch_size_, data_.size() - cursor_);
    batch.inputs.resize(static_cast<Eigen::Index>(size), 1);
    batch.targets.resize(static_cast<Eigen::Index>(size), 1);
    for (std::size_t k = 0; k < size; ++k) {
      const auto i = order_[cursor_ + k];
      batch.inputs(static_cast<Eigen::Index>(k), 0) = data_.xs[i];
      batch.targets(static_cast<Eigen::Index>(k), 0) = data_.ts[i];
    }
    cursor_ += size;
    if (cursor_ == data_.size()) {
      cursor_ = 0;
      return true;
    }
    return false;
  }

 private:
  const Dataset& data_;
  std::size_t batch_size_;
  Engine engine_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

Eigen::MatrixXd column(const std::vector<double>& values) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<Eigen::Index>(i), 0) = values[i];
  return out;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::string to_csv_text(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream out;
  writer(out);
  return out.str();
}

std::string noise_key(const NoiseSpec& noise) {
  return "nu" + format_double(noise.nu_noise) + "_s" + format_double(noise.scale) + "_p" +
         std::to_string(noise.p_percent);
}

void write_history_csv(std::ostream& out, const RunRecord& record) {
  CsvTable table;
  table.header = {"epoch", "train_loss", "mean_w", "min_w", "mean_beta_w"};
  for (std::size_t e = 0; e < record.history.size(); ++e) {
    const auto& h = record.history[e];
    table.rows.push_back({std::to_string(e + 1), format_double(h.train_loss),
                          format_double(h.mean_weight), format_double(h.min_weight),
                          format_double(h.mean_beta_w)});
  }
  write_csv(out, table);
}

}  // namespace

std::string RunRecord::key() const {
  return std::string(to_string(optimizer)) + "_" + noise_key(noise) + "_seed" + std::to_string(seed);
}

std::vector<double> evaluation_grid(std::size_t points) {
  if (points < 2) throw std::invalid_argument("evaluation grid needs at least two points");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

std::vector<std::size_t> epoch_permutation(std::size_t n, Engine& engine) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  // Fisher-Yates with a vendor-independent integer distribution (std::shuffle's
  // output is implementation-defined).
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(engine, i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

RunRecord train_regression(const ExperimentConfig& config, Algorithm optimizer,
                           const NoiseSpec& noise, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord record;
  record.optimizer = optimizer;
  record.noise = noise;
  record.seed = seed;
  record.epochs = config.epochs;

  const auto data = make_dataset(config.n_train, noise, seed);
  auto model = init_model(kRegressionShape, seed);
  auto opt_config = config.optimizer;
  opt_config.algorithm = optimizer;
  const auto sizes = model.group_sizes();
  Optimizer opt(opt_config, sizes);
  MinibatchStream stream(data, config.batch_size, seed);

  WeightStats run_stats;
  Batch batch;
  try {
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      WeightStats epoch_stats;
      double loss_sum = 0.0;
      bool epoch_done = false;
      while (!epoch_done) {
        epoch_done = stream.next(batch);
        const auto result = model.mse_loss_and_grad(batch);
        if (!std::isfinite(result.loss)) {
          throw std::runtime_error("non-finite training loss at epoch " + std::to_string(epoch + 1));
        }
        loss_sum += result.loss * static_cast<double>(batch.inputs.rows());
        const auto params = model.parameter_groups();
        const auto grads = result.groups();
        const auto diags = opt.step(params, grads);
        epoch_stats.add(diags);
        run_stats.add(diags);
      }
      record.history.push_back({loss_sum / static_cast<double>(data.size()),
                                epoch_stats.mean_weight(), epoch_stats.min(),
                                epoch_stats.mean_beta()});
    }
  } catch (const std::exception& e) {
    record.failure = e.what();
  }

  record.mean_weight = run_stats.mean_weight();
  record.min_weight = run_stats.min();
  record.mean_beta_w = run_stats.mean_beta();
  record.grid_x = evaluation_grid(config.eval_points);
  if (record.ok()) {
    const Eigen::MatrixXd predictions = model.forward(column(record.grid_x));
    record.predictions.assign(predictions.data(), predictions.data() + predictions.size());
    double sq = 0.0;
    for (std::size_t i = 0; i < record.grid_x.size(); ++i) {
      const double r = record.predictions[i] - ground_truth(record.grid_x[i]);
      sq += r * r;
    }
    record.final_clean_mse = sq / static_cast<double>(record.grid_x.size());
    if (!std::isfinite(record.final_clean_mse)) {
      record.failure = "non-finite evaluation error";
      record.final_clean_mse = kNaN;
    }
  } else {
    record.final_clean_mse = kNaN;
    record.predictions.assign(record.grid_x.size(), kNaN);
  }
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& job) {
  std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers)
                                    : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const auto i = next.fetch_add(1);
      if (i >= count) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

std::vector<RunRecord> run_regression_sweep(const ExperimentConfig& config,
                                            const fs::path& run_dir) {
  config.validate();
  struct Job {
    NoiseSpec noise;
    std::uint64_t seed;
    Algorithm optimizer;
  };
  std::vector<Job> jobs;
  for (const auto& noise : config.noise_grid()) {
    for (const auto seed : config.seeds) {
      for (const auto optimizer : config.optimizers) jobs.push_back({noise, seed, optimizer});
    }
  }
  if (!run_dir.empty()) ensure_directory(run_dir);

  std::vector<RunRecord> records(jobs.size());
  parallel_for(jobs.size(), config.workers, [&](std::size_t i) {
    const auto& job = jobs[i];
    records[i] = train_regression(config, job.optimizer, job.noise, job.seed);
    if (!run_dir.empty()) {
      write_file_atomic(run_dir / (records[i].key() + ".csv"),
                        to_csv_text([&](std::ostream& out) { write_history_csv(out, records[i]); }));
    }
  });
  return records;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records) {
  using Key = std::tuple<double, double, int, int>;  // nu, scale, p, optimizer
  std::map<Key, std::pair<std::vector<double>, std::size_t>> groups;
  for (const auto& r : records) {
    auto& [values, failed] =
        groups[{r.noise.nu_noise, r.noise.scale, r.noise.p_percent, static_cast<int>(r.optimizer)}];
    if (r.ok()) {
      values.push_back(r.final_clean_mse);
    } else {
      ++failed;
    }
  }
  std::vector<AggregateRow> rows;
  for (const auto& [key, entry] : groups) {
    const auto& [nu, scale, p, optimizer] = key;
    AggregateRow row;
    row.optimizer = static_cast<Algorithm>(optimizer);
    row.noise = {nu, scale, p};
    row.runs = entry.first.size() + entry.second;
    row.failed = entry.second;
    row.median = quantile(entry.first, 0.5);
    row.q25 = quantile(entry.first, 0.25);
    row.q75 = quantile(entry.first, 0.75);
    rows.push_back(row);
  }
  return rows;
}

EquivalenceReport run_equivalence_check(const ExperimentConfig& config) {
  config.validate();
  const auto seed = config.seeds.front();
  const auto data = make_dataset(config.n_train, config.equivalence_noise, seed);
  auto adam_model = init_model(kRegressionShape, seed);
  auto tadam_model = adam_model;

  auto adam_config = config.optimizer;
  adam_config.algorithm = Algorithm::Adam;
  auto tadam_config = config.optimizer;
  tadam_config.algorithm = Algorithm::TAdam;
  tadam_config.nu = DegreesOfFreedom::fixed(config.equivalence_nu);
  const auto sizes = adam_model.group_sizes();
  Optimizer adam(adam_config, sizes);
  Optimizer tadam(tadam_config, sizes);
  MinibatchStream stream(data, config.batch_size, seed);

  EquivalenceReport report;
  report.steps = config.equivalence_steps;
  report.nu = config.equivalence_nu;
  report.min_weight = std::numeric_limits<double>::infinity();
  report.max_weight = -std::numeric_limits<double>::infinity();
  Batch batch;
  for (std::int64_t step = 0; step < config.equivalence_steps; ++step) {
    stream.next(batch);
    const auto adam_grads = adam_model.mse_loss_and_grad(batch);
    const auto tadam_grads = tadam_model.mse_loss_and_grad(batch);
    adam.step(adam_model.parameter_groups(), adam_grads.groups());
    for (const auto& d : tadam.step(tadam_model.parameter_groups(), tadam_grads.groups())) {
      report.min_weight = std::min(report.min_weight, d.weight);
      report.max_weight = std::max(report.max_weight, d.weight);
    }

    double diff = 0.0;
    double scale = 0.0;
    const auto a = adam_model.parameter_groups();
    const auto t = tadam_model.parameter_groups();
    for (std::size_t g = 0; g < a.size(); ++g) {
      for (std::size_t j = 0; j < a[g].size(); ++j) {
        diff = std::max(diff, std::abs(t[g][j] - a[g][j]));
        scale = std::max(scale, std::abs(a[g][j]));
      }
    }
    const double divergence = scale > 0.0 ? diff / scale : diff;
    report.divergence.push_back(divergence);
    report.max_relative_divergence = std::max(report.max_relative_divergence, divergence);
  }
  if (report.divergence.empty()) report.min_weight = report.max_weight = kNaN;
  return report;
}

ResultRow to_result_row(const RunRecord& record) {
  return {std::string(to_string(record.optimizer)), record.noise.p_percent, record.noise.nu_noise,
          record.noise.scale, record.seed, record.final_clean_mse,
          static_cast<int>(record.history.size())};
}

void write_results_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  CsvTable table;
  table.header = {"optimizer", "p", "nu_noise", "scale", "seed", "final_clean_mse", "epochs"};
  for (const auto& r : records) {
    const auto row = to_result_row(r);
    table.rows.push_back({row.optimizer, std::to_string(row.p), format_double(row.nu_noise),
                          format_double(row.scale), std::to_string(row.seed),
                          format_double(row.final_clean_mse), std::to_string(row.epochs)});
  }
  write_csv(out, table);
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  const auto table = read_csv(in);
  const auto c_opt = table.column("optimizer");
  const auto c_p = table.column("p");
  const auto c_nu = table.column("nu_noise");
  const auto c_scale = table.column("scale");
  const auto c_seed = table.column("seed");
  const auto c_mse = table.column("final_clean_mse");
  const auto c_epochs = table.column("epochs");
  std::vector<ResultRow> rows;
  for (const auto& cells : table.rows) {
    rows.push_back({cells[c_opt], static_cast<int>(parse_integer(cells[c_p])),
                    parse_double(cells[c_nu]), parse_double(cells[c_scale]),
                    static_cast<std::uint64_t>(parse_integer(cells[c_seed])),
                    parse_double(cells[c_mse]), static_cast<int>(parse_integer(cells[c_epochs]))});
  }
  return rows;
}

void write_diagnostics_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  CsvTable table;
  table.header = {"optimizer", "p", "nu_noise", "scale", "seed", "epoch",
                  "train_loss", "mean_w", "min_w", "mean_beta_w"};
  for (const auto& r : records) {
    const auto prefix = std::vector<std::string>{
        std::string(to_string(r.optimizer)), std::to_string(r.noise.p_percent),
        format_double(r.noise.nu_noise), format_double(r.noise.scale), std::to_string(r.seed)};
    for (std::size_t e = 0; e < r.history.size(); ++e) {
      const auto& h = r.history[e];
      auto row = prefix;
      row.insert(row.end(), {std::to_string(e + 1), format_double(h.train_loss),
                             format_double(h.mean_weight), format_double(h.min_weight),
                             format_double(h.mean_beta_w)});
      table.rows.push_back(std::move(row));
    }
  }
  write_csv(out, table);
}

void write_predictions_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  CsvTable table;
  table.header = {"optimizer", "p", "nu_noise", "scale", "seed", "x", "prediction", "clean_t"};
  for (const auto& r : records) {
    const auto prefix = std::vector<std::string>{
        std::string(to_string(r.optimizer)), std::to_string(r.noise.p_percent),
        format_double(r.noise.nu_noise), format_double(r.noise.scale), std::to_string(r.seed)};
    for (std::size_t i = 0; i < r.grid_x.size(); ++i) {
      auto row = prefix;
      row.insert(row.end(), {format_double(r.grid_x[i]), format_double(r.predictions[i]),
                             format_double(ground_truth(r.grid_x[i]))});
      table.rows.push_back(std::move(row));
    }
  }
  write_csv(out, table);
}

void write_summary_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  CsvTable table;
  table.header = {"optimizer", "p", "nu_noise", "scale", "runs", "failed",
                  "median_clean_mse", "q25_clean_mse", "q75_clean_mse"};
  for (const auto& r : rows) {
    table.rows.push_back({std::string(to_string(r.optimizer)), std::to_string(r.noise.p_percent),
                          format_double(r.noise.nu_noise), format_double(r.noise.scale),
                          std::to_string(r.runs), std::to_string(r.failed),
                          format_double(r.median), format_double(r.q25), format_double(r.q75)});
  }
  write_csv(out, table);
}

std::string manifest_json(const ExperimentConfig& config, const std::vector<std::string>& files,
                          const std::vector<std::string>& flagged_runs) {
  json settings = json::object();
  for (const auto& line : split(serialize(config), '\n')) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    settings[line.substr(0, eq)] = line.substr(eq + 3);
  }
  json manifest = {
      {"tool", "tadam-bench"},
      {"experiment", std::string(to_string(config.experiment))},
      {"config_hash", config_hash(config)},
      {"config", settings},
      {"seeds", config.seeds},
      {"versions",
       {{"tadam", TADAM_VERSION},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION)},
        {"boost", BOOST_LIB_VERSION},
        {"compiler", __VERSION__}}},
      {"files", files},
      {"flagged_runs", flagged_runs},
  };
  return manifest.dump(2) + "\n";
}

std::vector<std::string> emit_results(const std::vector<RunRecord>& records,
                                      const ExperimentConfig& config, const fs::path& output_dir) {
  if (records.empty()) throw std::invalid_argument("emit_results: no records to write");
  ensure_directory(output_dir);
  std::vector<std::string> files = {"results.csv", "diagnostics.csv", "predictions.csv",
                                    "summary.csv"};
  write_file_atomic(output_dir / "results.csv",
                    to_csv_text([&](std::ostream& out) { write_results_csv(out, records); }));
  write_file_atomic(output_dir / "diagnostics.csv",
                    to_csv_text([&](std::ostream& out) { write_diagnostics_csv(out, records); }));
  write_file_atomic(output_dir / "predictions.csv",
                    to_csv_text([&](std::ostream& out) { write_predictions_csv(out, records); }));
  write_file_atomic(output_dir / "summary.csv", to_csv_text([&](std::ostream& out) {
                      write_summary_csv(out, aggregate(records));
                    }));
  std::vector<std::string> flagged;
  for (const auto& r : records) {
    if (!r.ok()) flagged.push_back(r.key() + ": " + r.failure);
  }
  files.push_back("manifest.json");
  write_file_atomic(output_dir / "manifest.json", manifest_json(config, files, flagged));
  return files;
}

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
  config.validate();
  const fs::path out_dir = config.output_dir;
  ensure_directory(out_dir);
  ExperimentOutcome outcome;

  switch (config.experiment) {
    case Experiment::Regress: {
      const auto records = run_regression_sweep(config, out_dir / "runs");
      if (config.write_datasets) {
        ensure_directory(out_dir / "datasets");
        for (const auto& noise : config.noise_grid()) {
          for (const auto seed : config.seeds) {
            const auto data = make_dataset(config.n_train, noise, seed);
            const auto name = "datasets/" + noise_key(noise) + "_seed" + std::to_string(seed) + ".csv";
            write_file_atomic(out_dir / name,
                              to_csv_text([&](std::ostream& out) { write_dataset_csv(out, data); }));
          }
        }
      }
      outcome.files = emit_results(records, config, out_dir);
      double wall = 0.0;
      for (const auto& r : records) wall += r.wall_seconds;
      for (const auto& row : aggregate(records)) {
        outcome.summary.push_back(std::string(to_string(row.optimizer)) + " " + noise_key(row.noise) +
                                  ": median clean MSE " + format_double(row.median) + " (IQR " +
                                  format_double(row.q25) + " .. " + format_double(row.q75) + ", " +
                                  std::to_string(row.failed) + " failed)");
      }
      outcome.summary.push_back(std::to_string(records.size()) + " runs, " +
                                format_double(std::round(wall * 10.0) / 10.0) + " s of training");
      break;
    }
    case Experiment::Equivalence: {
      const auto report = run_equivalence_check(config);
      json j = {
          {"claim", "TAdam with large nu tracks Adam"},
          {"statistic", "max_relative_divergence"},
          {"value", report.max_relative_divergence},
          {"steps", report.steps},
          {"nu", report.nu},
          {"min_weight", std::isfinite(report.min_weight) ? json(report.min_weight) : json(nullptr)},
          {"max_weight", std::isfinite(report.max_weight) ? json(report.max_weight) : json(nullptr)},
      };
      write_file_atomic(out_dir / "equivalence.json", j.dump(2) + "\n");
      CsvTable table;
      table.header = {"step", "relative_divergence"};
      for (std::size_t i = 0; i < report.divergence.size(); ++i) {
        table.rows.push_back({std::to_string(i + 1), format_double(report.divergence[i])});
      }
      write_file_atomic(out_dir / "equivalence.csv",
                        to_csv_text([&](std::ostream& out) { write_csv(out, table); }));
      outcome.files = {"equivalence.json", "equivalence.csv"};
      outcome.summary.push_back("max relative divergence over " + std::to_string(report.steps) +
                                " steps at nu=" + format_double(report.nu) + ": " +
                                format_double(report.max_relative_divergence));
      break;
    }
    case Experiment::Verify: {
      struct Job {
        std::size_t d;
        double beta1;
        std::uint64_t seed;
      };
      std::vector<Job> jobs;
      for (const auto d : config.verify_dims) {
        for (const auto beta1 : config.verify_beta1) {
          for (const auto seed : config.seeds) jobs.push_back({d, beta1, seed});
        }
      }
      std::vector<MomentCheckReport> reports(jobs.size());
      parallel_for(jobs.size(), config.workers, [&](std::size_t i) {
        const auto& job = jobs[i];
        reports[i] = mc_theorem2(job.d, config.verify_nu.resolve(job.d), job.beta1,
                                 config.verify_steps, job.seed);
      });
      write_file_atomic(out_dir / "verify.json", moment_reports_json(reports));
      CsvTable table;
      table.header = {"d", "nu", "beta1", "seed", "mean_D", "se_D", "mean_w", "se_w",
                      "mean_beta_w", "se_beta_w", "passed"};
      for (const auto& r : reports) {
        table.rows.push_back({std::to_string(r.d), format_double(r.nu), format_double(r.beta1),
                              std::to_string(r.seed), format_double(r.distance.mean),
                              format_double(r.distance.std_error), format_double(r.weight.mean),
                              format_double(r.weight.std_error), format_double(r.beta_w.mean),
                              format_double(r.beta_w.std_error), r.passed() ? "1" : "0"});
        for (const auto& c : r.claims) {
          outcome.summary.push_back("d=" + std::to_string(r.d) + " nu=" + format_double(r.nu) +
                                    " beta1=" + format_double(r.beta1) + " seed=" +
                                    std::to_string(r.seed) + " | " + c.claim + ": " +
                                    (!c.checked ? "skipped" : (c.pass ? "pass" : "FAIL")) +
                                    " (" + c.statistic + " = " + format_double(c.value) + ")");
        }
      }
      write_file_atomic(out_dir / "verify.csv",
                        to_csv_text([&](std::ostream& out) { write_csv(out, table); }));
      outcome.files = {"verify.json", "verify.csv"};
      break;
    }
    case Experiment::Regret: {
      OnlineProblem problem;
      problem.dim = config.regret_dim;
      problem.outlier_prob = config.regret_outlier_prob;
      problem.outlier_value = config.regret_outlier_value;
      json all = json::array();
      for (const auto optimizer : config.optimizers) {
        if (optimizer == Algorithm::SGD) continue;
        auto opt_config = config.optimizer;
        opt_config.algorithm = optimizer;
        opt_config.amsgrad = true;
        opt_config.alpha = config.regret_alpha;
        for (const auto seed : config.seeds) {
          const auto trace = run_regret_experiment(problem, opt_config, config.regret_horizon, seed);
          auto j = json::parse(regret_json(trace));
          j["seed"] = seed;
          all.push_back(j);
          const auto name = "regret_" + std::string(to_string(optimizer)) + "_seed" +
                            std::to_string(seed) + ".csv";
          write_file_atomic(out_dir / name,
                            to_csv_text([&](std::ostream& out) { write_regret_csv(out, trace); }));
          outcome.files.push_back(name);
          outcome.summary.push_back(std::string(to_string(optimizer)) + " seed " + std::to_string(seed) +
                                    ": R_T = " + format_double(trace.final_regret()) + ", bound " +
                                    format_double(trace.bound_rhs()) + " -> " +
                                    j["verdict"].get<std::string>());
        }
      }
      write_file_atomic(out_dir / "regret.json", all.dump(2) + "\n");
      outcome.files.push_back("regret.json");
      break;
    }
  }

  if (config.experiment != Experiment::Regress) {
    outcome.files.push_back("manifest.json");
    write_file_atomic(out_dir / "manifest.json", manifest_json(config, outcome.files, {}));
  }
  return outcome;
}

}  // namespace tadam
