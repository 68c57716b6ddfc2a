#include "tadam/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tadam/csv.hpp"

namespace tadam {
namespace {

void check_lengths(std::size_t params, std::size_t grad, std::size_t dim) {
  if (params != dim || grad != dim) {
    throw InputError("dimension mismatch: group has " + std::to_string(dim) + " parameters, got " +
                     std::to_string(params) + " params and " + std::to_string(grad) +
                     " gradient entries");
  }
}

void check_finite(std::span<const double> grad) {
  for (std::size_t j = 0; j < grad.size(); ++j) {
    if (!std::isfinite(grad[j])) {
      throw InputError("non-finite gradient entry at index " + std::to_string(j) + ": " +
                       format_double(grad[j]));
    }
  }
}

void update_second_moment(GroupState& state, std::span<const double> grad,
                          const OptimizerConfig& config) {
  const double b2 = config.beta2;
  for (std::size_t j = 0; j < grad.size(); ++j) {
    state.v[j] = b2 * state.v[j] + (1.0 - b2) * grad[j] * grad[j];
  }
  if (config.amsgrad) {
    for (std::size_t j = 0; j < grad.size(); ++j) {
      state.v_hat[j] = std::max(state.v_hat[j], state.v[j]);
    }
  }
}

// theta -= alpha * m / ((1 - beta1^t) * (sqrt(v / (1 - beta2^t)) + eps)), with the
// AMSGrad running max standing in for v when enabled.
void apply_update(const GroupState& state, std::span<double> params,
                  const OptimizerConfig& config) {
  const double t = static_cast<double>(state.t);
  const double bias1 = 1.0 - std::pow(config.beta1, t);
  const double bias2 = 1.0 - std::pow(config.beta2, t);
  const auto& second = config.amsgrad ? state.v_hat : state.v;
  for (std::size_t j = 0; j < params.size(); ++j) {
    params[j] -= config.alpha * state.m[j] /
                 (bias1 * (std::sqrt(second[j] / bias2) + config.epsilon));
  }
}

void expect_algorithm(const OptimizerConfig& config, Algorithm expected) {
  if (config.algorithm != expected) {
    throw ConfigError("step called with algorithm " + std::string(to_string(config.algorithm)) +
                      ", expected " + std::string(to_string(expected)));
  }
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::SGD: return "sgd";
    case Algorithm::Adam: return "adam";
    case Algorithm::TAdam: return "tadam";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view text) {
  std::string lower(trim(text));
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "sgd") return Algorithm::SGD;
  if (lower == "adam") return Algorithm::Adam;
  if (lower == "tadam") return Algorithm::TAdam;
  throw ConfigError("unknown algorithm '" + std::string(text) + "' (expected sgd, adam or tadam)");
}

double DegreesOfFreedom::value() const {
  if (!nu_) throw ConfigError("degrees of freedom is 'auto' and has not been resolved");
  return *nu_;
}

double DegreesOfFreedom::resolve(std::size_t group_dim) const {
  return nu_ ? *nu_ : static_cast<double>(group_dim);
}

std::string to_string(const DegreesOfFreedom& nu) {
  return nu.is_auto() ? std::string("auto") : format_double(nu.value());
}

DegreesOfFreedom parse_degrees_of_freedom(std::string_view text) {
  text = trim(text);
  if (text == "auto") return DegreesOfFreedom::automatic();
  try {
    return DegreesOfFreedom::fixed(parse_double(text));
  } catch (const std::invalid_argument&) {
    throw ConfigError("degrees of freedom must be a number or 'auto', got '" + std::string(text) +
                      "'");
  }
}

void OptimizerConfig::validate() const {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw ConfigError("alpha must be finite and nonnegative, got " + format_double(alpha));
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0)) {
    throw ConfigError("beta1 must lie in [0, 1), got " + format_double(beta1));
  }
  if (!(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("beta2 must lie in [0, 1), got " + format_double(beta2));
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("epsilon must be positive, got " + format_double(epsilon));
  }
  if (!nu.is_auto() && !(nu.value() > 0.0 && std::isfinite(nu.value()))) {
    throw ConfigError("degrees of freedom must be positive, got " + format_double(nu.value()));
  }
  if (algorithm == Algorithm::TAdam && beta1 < 0.5) {
    throw ConfigError("TAdam requires beta1 >= 0.5 (weight-mass decay (2*beta1-1)/beta1 < 0), got " +
                      format_double(beta1));
  }
}

GroupState make_group_state(std::size_t dim, const OptimizerConfig& config) {
  if (dim == 0) throw InputError("parameter group must have at least one entry");
  config.validate();
  GroupState state;
  state.m.assign(dim, 0.0);
  state.v.assign(dim, 0.0);
  state.v_hat.assign(dim, 0.0);
  state.nu = config.nu.resolve(dim);
  if (config.algorithm == Algorithm::TAdam) {
    state.weight_mass = config.beta1 / (1.0 - config.beta1);
  }
  return state;
}

double mahalanobis_distance(std::span<const double> grad, std::span<const double> mean,
                            std::span<const double> variance, double epsilon) {
  double sum = 0.0;
  for (std::size_t j = 0; j < grad.size(); ++j) {
    const double diff = grad[j] - mean[j];
    sum += diff * diff / (variance[j] + epsilon);
  }
  return sum;
}

double student_t_weight(double nu, std::size_t dim, double distance) {
  return (nu + static_cast<double>(dim)) / (nu + distance);
}

double effective_decay(double weight_mass, double weight) {
  if (!(weight_mass >= 0.0) || !(weight > 0.0)) {
    throw InputError("effective_decay requires W >= 0 and w > 0, got W=" +
                     format_double(weight_mass) + " w=" + format_double(weight));
  }
  return weight_mass / (weight_mass + weight);
}

double weight_mass_decay(double beta1) { return (2.0 * beta1 - 1.0) / beta1; }

void sgd_step(std::span<double> params, std::span<const double> grad, double alpha) {
  check_lengths(params.size(), grad.size(), params.size());
  check_finite(grad);
  for (std::size_t j = 0; j < params.size(); ++j) {
    if (!std::isfinite(params[j])) {
      throw InputError("non-finite parameter at index " + std::to_string(j));
    }
  }
  if (!std::isfinite(alpha)) throw InputError("non-finite learning rate");
  for (std::size_t j = 0; j < params.size(); ++j) params[j] -= alpha * grad[j];
}

void adam_step(GroupState& state, std::span<double> params, std::span<const double> grad,
               const OptimizerConfig& config) {
  expect_algorithm(config, Algorithm::Adam);
  check_lengths(params.size(), grad.size(), state.dim());
  check_finite(grad);

  ++state.t;
  const double b1 = config.beta1;
  for (std::size_t j = 0; j < grad.size(); ++j) {
    state.m[j] = b1 * state.m[j] + (1.0 - b1) * grad[j];
  }
  update_second_moment(state, grad, config);
  apply_update(state, params, config);
}

StepDiagnostics tadam_step(GroupState& state, std::span<double> params,
                           std::span<const double> grad, const OptimizerConfig& config) {
  expect_algorithm(config, Algorithm::TAdam);
  check_lengths(params.size(), grad.size(), state.dim());
  check_finite(grad);
  if (!(state.nu > 0.0)) {
    throw ConfigError("degrees of freedom must be positive, got " + format_double(state.nu));
  }

  ++state.t;
  StepDiagnostics diag;
  // D_t uses the previous moments, before either is updated.
  diag.distance = mahalanobis_distance(grad, state.m, state.v, config.epsilon);
  diag.weight = student_t_weight(state.nu, state.dim(), diag.distance);
  // W stays >= 1 for beta1 >= 0.5, so the ratio is well defined even when an
  // overflowing distance drives w to zero.
  diag.beta_w = state.weight_mass / (state.weight_mass + diag.weight);

  const double keep = diag.beta_w;
  const double take = diag.weight / (state.weight_mass + diag.weight);
  for (std::size_t j = 0; j < grad.size(); ++j) {
    state.m[j] = keep * state.m[j] + take * grad[j];
  }
  state.weight_mass = weight_mass_decay(config.beta1) * state.weight_mass + diag.weight;

  update_second_moment(state, grad, config);
  apply_update(state, params, config);
  return diag;
}

Optimizer::Optimizer(OptimizerConfig config, std::span<const std::size_t> group_sizes)
    : config_(std::move(config)) {
  config_.validate();
  groups_.reserve(group_sizes.size());
  for (const auto size : group_sizes) groups_.push_back(make_group_state(size, config_));
}

std::vector<StepDiagnostics> Optimizer::step(std::span<const std::span<double>> params,
                                             std::span<const std::span<const double>> grads) {
  if (params.size() != groups_.size() || grads.size() != groups_.size()) {
    throw InputError("expected " + std::to_string(groups_.size()) + " parameter groups, got " +
                     std::to_string(params.size()) + " params and " +
                     std::to_string(grads.size()) + " gradients");
  }
  std::vector<StepDiagnostics> diagnostics;
  switch (config_.algorithm) {
    case Algorithm::SGD:
      for (std::size_t i = 0; i < groups_.size(); ++i) {
        check_lengths(params[i].size(), grads[i].size(), groups_[i].dim());
        sgd_step(params[i], grads[i], config_.alpha);
        ++groups_[i].t;
      }
      break;
    case Algorithm::Adam:
      for (std::size_t i = 0; i < groups_.size(); ++i) {
        adam_step(groups_[i], params[i], grads[i], config_);
      }
      break;
    case Algorithm::TAdam:
      diagnostics.reserve(groups_.size());
      for (std::size_t i = 0; i < groups_.size(); ++i) {
        diagnostics.push_back(tadam_step(groups_[i], params[i], grads[i], config_));
      }
      break;
  }
  ++steps_;
  return diagnostics;
}

void Optimizer::set_learning_rate(double alpha) {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw ConfigError("learning rate must be finite and nonnegative, got " + format_double(alpha));
  }
  config_.alpha = alpha;
}

}  // namespace tadam
