#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tadam {

/// Raised when hyperparameters are invalid (out-of-range decay rates, ν ≤ 0, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when step inputs are malformed (length mismatch, NaN/inf gradients).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Algorithm { SGD, Adam, TAdam };

std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view text);

/// Student-t degrees of freedom: a fixed positive value, or "auto", which
/// resolves to the parameter count of the group it is applied to.
class DegreesOfFreedom {
 public:
  static DegreesOfFreedom automatic() { return DegreesOfFreedom{}; }
  static DegreesOfFreedom fixed(double nu) { return DegreesOfFreedom{nu}; }

  bool is_auto() const { return !nu_.has_value(); }
  /// Throws ConfigError when auto.
  double value() const;
  double resolve(std::size_t group_dim) const;

  bool operator==(const DegreesOfFreedom&) const = default;

 private:
  DegreesOfFreedom() = default;
  explicit DegreesOfFreedom(double nu) : nu_(nu) {}

  std::optional<double> nu_;
};

std::string to_string(const DegreesOfFreedom& nu);
DegreesOfFreedom parse_degrees_of_freedom(std::string_view text);

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::Adam;
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  DegreesOfFreedom nu = DegreesOfFreedom::automatic();
  bool amsgrad = false;

  /// Throws ConfigError. TAdam additionally requires beta1 >= 0.5 so that the
  /// weight-mass decay (2*beta1 - 1)/beta1 stays nonnegative.
  void validate() const;

  bool operator==(const OptimizerConfig&) const = default;
};

/// Per-group optimizer state. `weight_mass` is the decayed sum of student-t
/// sample weights (W); it is only meaningful for TAdam.
struct GroupState {
  std::vector<double> m;
  std::vector<double> v;
  std::vector<double> v_hat;
  double weight_mass = 0.0;
  double nu = 0.0;
  std::int64_t t = 0;

  std::size_t dim() const { return m.size(); }
};

/// Fresh state for a group of `dim` parameters; resolves ν once here.
GroupState make_group_state(std::size_t dim, const OptimizerConfig& config);

struct StepDiagnostics {
  double weight = 1.0;    // w_t
  double distance = 0.0;  // D_t
  double beta_w = 0.0;    // W_{t-1} / (W_{t-1} + w_t)
};

// Building blocks shared by the TAdam step and the Monte-Carlo checks.

/// sum_j (g_j - m_j)^2 / (v_j + epsilon)
double mahalanobis_distance(std::span<const double> grad, std::span<const double> mean,
                            std::span<const double> variance, double epsilon);
/// (nu + d) / (nu + distance)
double student_t_weight(double nu, std::size_t dim, double distance);
/// W / (W + w)
double effective_decay(double weight_mass, double weight);
/// (2*beta1 - 1) / beta1, the per-step decay of W.
double weight_mass_decay(double beta1);

void sgd_step(std::span<double> params, std::span<const double> grad, double alpha);

void adam_step(GroupState& state, std::span<double> params, std::span<const double> grad,
               const OptimizerConfig& config);

StepDiagnostics tadam_step(GroupState& state, std::span<double> params,
                           std::span<const double> grad, const OptimizerConfig& config);

/// Owns one GroupState per registered parameter group and dispatches on the
/// configured algorithm.
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, std::span<const std::size_t> group_sizes);

  /// Advances every group by one step. Returns one diagnostics entry per group
  /// for TAdam and an empty vector otherwise.
  std::vector<StepDiagnostics> step(std::span<const std::span<double>> params,
                                    std::span<const std::span<const double>> grads);

  /// Used by schedules such as alpha/sqrt(t).
  void set_learning_rate(double alpha);

  const OptimizerConfig& config() const { return config_; }
  const std::vector<GroupState>& groups() const { return groups_; }
  std::int64_t steps() const { return steps_; }

 private:
  OptimizerConfig config_;
  std::vector<GroupState> groups_;
  std::int64_t steps_ = 0;
};

}  // namespace tadam
