#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tadam/optim.hpp"

namespace tadam {

/// Sample mean with a batch-means standard error (robust to the serial
/// correlation that the weight-mass recursion introduces) and a two-sided 99%
/// interval.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t samples = 0;
};

/// Batch-means estimate over `batches` contiguous blocks.
Estimate batch_means_estimate(std::span<const double> series, std::size_t batches = 100);

/// z such that P(Z <= z) = probability for a standard normal.
double normal_quantile(double probability);

struct ClaimResult {
  std::string claim;
  std::string statistic;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool checked = true;
  bool pass = false;
  std::string note;
};

struct MomentCheckReport {
  std::size_t d = 0;
  double nu = 0.0;
  double beta1 = 0.0;
  std::int64_t n_steps = 0;
  std::uint64_t seed = 0;
  Estimate distance;
  Estimate weight;
  Estimate beta_w;
  /// (nu + d)/(d - 2); NaN when d <= 2.
  double weight_upper_bound = 0.0;
  std::vector<ClaimResult> claims;

  /// True when every checked claim passed.
  bool passed() const;
};

/// Gaussian-gradient Monte Carlo under the moment-matched premise: g ~ N(0, I_d),
/// m pinned at 0 and v pinned at 1, with the weight mass W following the full
/// TAdam recursion. Checks E[D] ~= d (within 2%), 1 <= E[w] <= (nu+d)/(d-2) for
/// d > 2, and E[beta_w] <= beta1 at one-sided 99% confidence.
MomentCheckReport mc_theorem2(std::size_t d, double nu, double beta1, std::int64_t n_steps,
                              std::uint64_t seed);

/// Raised when the regret bound's preconditions (gamma < 1, beta_w_bar < 1) fail.
class BoundInapplicable : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class LossKind { Quadratic, Absolute };

/// Per-round losses f_t(theta) = sum_i a * (theta_i - c_{t,i})^2 (or a * |.|) with
/// targets c drawn uniformly from [target_low, target_high]. With probability
/// outlier_prob a round's observed target is replaced by outlier_value; regret is
/// always measured against the uncorrupted targets. Iterates live in the box
/// [-radius, radius]^dim.
struct OnlineProblem {
  LossKind kind = LossKind::Quadratic;
  std::size_t dim = 1;
  double curvature = 1.0;
  double target_low = -1.0;
  double target_high = 1.0;
  double radius = 2.0;
  double initial = 1.0;
  double outlier_prob = 0.0;
  double outlier_value = 100.0;
  /// Grid resolution for the hindsight minimizer of non-quadratic losses.
  std::size_t grid_points = 4001;

  /// Throws std::invalid_argument; a negative curvature is a non-convex problem.
  void validate() const;
  /// Infinity-norm diameter of the feasible box.
  double diameter() const { return 2.0 * radius; }
};

struct BoundTerms {
  double initial_distance = 0.0;
  double momentum = 0.0;
  double gradient = 0.0;

  double total() const { return initial_distance + momentum + gradient; }
};

struct BoundInputs {
  std::vector<double> final_v_hat;                // v_hat_{T,i}
  std::vector<std::vector<double>> v_hat_history;  // v_hat_{t,i}, t = 1..T
  std::vector<double> beta1t;                      // beta_{1t}, t = 1..T
  std::vector<double> grad_norms;                  // ||g_{1:T,i}||_2
  double diameter = 0.0;
  double alpha = 0.0;
  double beta2 = 0.0;
  double beta_w_bar = 0.0;
  std::int64_t horizon = 0;
};

/// Evaluates the three-term regret bound
///   D^2/(2 a_T (1-b)) sum_i sqrt(vh_{T,i})
/// + D^2/(1-b)^2 sum_t sum_i b_{1t} sqrt(vh_{t,i}) / a_t
/// + a sqrt(1 + log T) / ((1-b)^2 (1-gamma) sqrt(1-beta2)) sum_i ||g_{1:T,i}||_2
/// with a_t = alpha/sqrt(t), b = beta_w_bar and gamma = b/sqrt(beta2).
BoundTerms eval_bound_rhs(const BoundInputs& inputs);

struct RegretTrace {
  Algorithm algorithm = Algorithm::TAdam;
  std::int64_t horizon = 0;
  std::vector<double> cumulative_regret;      // R_t, t = 1..T
  std::vector<BoundTerms> bound_series;       // bound evaluated at each t
  BoundTerms bound;                           // at t = T
  BoundInputs bound_inputs;
  double beta_w_mean = 0.0;
  double beta_w_bar = 0.0;                    // mean plus its 99% upper edge
  double diameter = 0.0;
  double max_grad = 0.0;                      // observed G_inf
  double gamma = 0.0;
  bool bound_applicable = false;
  std::vector<double> theta_final;
  std::vector<double> theta_star;

  double final_regret() const { return cumulative_regret.back(); }
  double bound_rhs() const { return bound.total(); }
};

/// Projected online run with alpha_t = alpha/sqrt(t). The config's algorithm is
/// Adam or TAdam; amsgrad must be on for the bound to be meaningful, but is not
/// forced. Regret at each t is against the best fixed point for the first t
/// rounds (analytic for quadratics, grid search otherwise).
RegretTrace run_regret_experiment(const OnlineProblem& problem, const OptimizerConfig& config,
                                  std::int64_t horizon, std::uint64_t seed);

/// JSON array of {claim, statistic, interval, verdict, ...} records.
std::string moment_reports_json(std::span<const MomentCheckReport> reports);
std::string regret_json(const RegretTrace& trace);
/// Columns: t,regret,bound_initial_distance,bound_momentum,bound_gradient,bound_total
void write_regret_csv(std::ostream& out, const RegretTrace& trace);

}  // namespace tadam
