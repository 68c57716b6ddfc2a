#include "tadam/verify.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <ostream>

#include "tadam/csv.hpp"
#include "tadam/random.hpp"

namespace tadam {
namespace {

using nlohmann::json;

// JSON has no NaN or infinity.
json number_or_null(double value) { return std::isfinite(value) ? json(value) : json(nullptr); }

double quadratic_hindsight(double curvature, double radius, double count, double sum,
                           double sum_sq, double* argmin) {
  const double theta = std::clamp(sum / count, -radius, radius);
  if (argmin) *argmin = theta;
  return curvature * (count * theta * theta - 2.0 * theta * sum + sum_sq);
}

ClaimResult make_claim(std::string claim, std::string statistic, double value, double lower,
                       double upper) {
  ClaimResult c;
  c.claim = std::move(claim);
  c.statistic = std::move(statistic);
  c.value = value;
  c.lower = lower;
  c.upper = upper;
  return c;
}

}  // namespace

double normal_quantile(double probability) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), probability);
}

Estimate batch_means_estimate(std::span<const double> series, std::size_t batches) {
  if (series.empty()) throw std::invalid_argument("cannot estimate the mean of an empty series");
  batches = std::clamp<std::size_t>(batches, 2, std::max<std::size_t>(series.size(), 2));
  Estimate est;
  est.samples = series.size();
  est.mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
  if (series.size() < 2) {
    est.lower = est.upper = est.mean;
    return est;
  }
  std::vector<double> means;
  means.reserve(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    const auto begin = b * series.size() / batches;
    const auto end = (b + 1) * series.size() / batches;
    if (end == begin) continue;
    means.push_back(std::accumulate(series.begin() + static_cast<std::ptrdiff_t>(begin),
                                    series.begin() + static_cast<std::ptrdiff_t>(end), 0.0) /
                    static_cast<double>(end - begin));
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
  double ss = 0.0;
  for (const double m : means) ss += (m - grand) * (m - grand);
  const double k = static_cast<double>(means.size());
  est.std_error = std::sqrt(ss / (k - 1.0) / k);
  const double z = normal_quantile(0.995);
  est.lower = est.mean - z * est.std_error;
  est.upper = est.mean + z * est.std_error;
  return est;
}

bool MomentCheckReport::passed() const {
  return std::all_of(claims.begin(), claims.end(),
                     [](const ClaimResult& c) { return !c.checked || c.pass; });
}

MomentCheckReport mc_theorem2(std::size_t d, double nu, double beta1, std::int64_t n_steps,
                              std::uint64_t seed) {
  if (d == 0) throw std::invalid_argument("dimension must be at least 1");
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  if (!(beta1 >= 0.5 && beta1 < 1.0)) throw std::invalid_argument("beta1 must lie in [0.5, 1)");
  if (n_steps < 10000) throw std::invalid_argument("at least 10^4 Monte-Carlo steps are required");

  auto engine = make_stream(seed, Stream::Gradients);
  const std::vector<double> mean(d, 0.0);
  const std::vector<double> variance(d, 1.0);
  std::vector<double> grad(d);
  std::vector<double> distances(static_cast<std::size_t>(n_steps));
  std::vector<double> weights(distances.size());
  std::vector<double> decays(distances.size());

  const double decay = weight_mass_decay(beta1);
  double weight_mass = beta1 / (1.0 - beta1);
  for (std::size_t t = 0; t < distances.size(); ++t) {
    for (auto& g : grad) g = standard_normal(engine);
    // The premise has m and v at their true values, so no epsilon.
    const double dist = mahalanobis_distance(grad, mean, variance, 0.0);
    const double w = student_t_weight(nu, d, dist);
    decays[t] = effective_decay(weight_mass, w);
    weight_mass = decay * weight_mass + w;
    distances[t] = dist;
    weights[t] = w;
  }

  MomentCheckReport report;
  report.d = d;
  report.nu = nu;
  report.beta1 = beta1;
  report.n_steps = n_steps;
  report.seed = seed;
  report.distance = batch_means_estimate(distances);
  report.weight = batch_means_estimate(weights);
  report.beta_w = batch_means_estimate(decays);
  const double dd = static_cast<double>(d);
  report.weight_upper_bound =
      d > 2 ? (nu + dd) / (dd - 2.0) : std::numeric_limits<double>::quiet_NaN();

  {
    auto c = make_claim("E[D_t] = d (chi-squared mean), within 2%", "mean_D", report.distance.mean, report.distance.lower,
                        report.distance.upper);
    c.pass = std::abs(report.distance.mean - dd) <= 0.02 * dd;
    report.claims.push_back(c);
  }
  {
    auto c = make_claim("E[w_t] >= 1", "mean_w", report.weight.mean, report.weight.lower,
                        report.weight.upper);
    c.pass = report.weight.mean >= 1.0;
    report.claims.push_back(c);
  }
  {
    auto c = make_claim("E[w_t] <= (nu+d)/(d-2)", "mean_w", report.weight.mean, report.weight.lower,
                        report.weight.upper);
    if (d > 2) {
      c.pass = report.weight.mean <= report.weight_upper_bound;
    } else {
      c.checked = false;
      c.note = "skipped: the upper bound requires d > 2";
    }
    report.claims.push_back(c);
  }
  {
    // One-sided test of H0: E[beta_w] <= beta1 at the 1% level.
    const double z = normal_quantile(0.99);
    auto c = make_claim("E[beta_w] <= beta1 (one-sided, 99%)", "mean_beta_w", report.beta_w.mean, report.beta_w.mean - z * report.beta_w.std_error,
                        report.beta_w.mean + z * report.beta_w.std_error);
    c.pass = report.beta_w.mean <= beta1 + z * report.beta_w.std_error;
    if (!c.pass) {
      c.note = "mean exceeds beta1 by " +
               format_double((report.beta_w.mean - beta1) / report.beta_w.std_error) +
               " standard errors";
    }
    report.claims.push_back(c);
  }
  return report;
}

void OnlineProblem::validate() const {
  if (dim == 0) throw std::invalid_argument("online problem dimension must be positive");
  if (curvature < 0.0) {
    throw std::invalid_argument("online problem is non-convex (negative curvature " +
                                format_double(curvature) + ")");
  }
  if (!(radius > 0.0)) throw std::invalid_argument("feasible box radius must be positive");
  if (!(target_low <= target_high)) throw std::invalid_argument("target range is empty");
  if (!(outlier_prob >= 0.0 && outlier_prob <= 1.0)) {
    throw std::invalid_argument("outlier probability must lie in [0, 1]");
  }
  if (kind == LossKind::Absolute && grid_points < 2) {
    throw std::invalid_argument("grid search needs at least two points");
  }
}

BoundTerms eval_bound_rhs(const BoundInputs& in) {
  if (in.horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (in.v_hat_history.size() != static_cast<std::size_t>(in.horizon) ||
      in.beta1t.size() != static_cast<std::size_t>(in.horizon)) {
    throw std::invalid_argument("bound history length does not match the horizon");
  }
  const double b = in.beta_w_bar;
  if (!(b < 1.0)) throw BoundInapplicable("beta_w_bar must be < 1, got " + format_double(b));
  const double gamma = b / std::sqrt(in.beta2);
  if (!(gamma < 1.0)) {
    throw BoundInapplicable("gamma = beta_w_bar/sqrt(beta2) must be < 1, got " + format_double(gamma));
  }
  const double d2 = in.diameter * in.diameter;
  const double horizon = static_cast<double>(in.horizon);

  BoundTerms terms;
  double sqrt_final = 0.0;
  for (const double v : in.final_v_hat) sqrt_final += std::sqrt(v);
  const double alpha_T = in.alpha / std::sqrt(horizon);
  terms.initial_distance = d2 / (2.0 * alpha_T * (1.0 - b)) * sqrt_final;

  double momentum = 0.0;
  for (std::size_t t = 0; t < in.v_hat_history.size(); ++t) {
    const double alpha_t = in.alpha / std::sqrt(static_cast<double>(t + 1));
    double row = 0.0;
    for (const double v : in.v_hat_history[t]) row += std::sqrt(v);
    momentum += in.beta1t[t] * row / alpha_t;
  }
  terms.momentum = d2 / ((1.0 - b) * (1.0 - b)) * momentum;

  double norms = 0.0;
  for (const double n : in.grad_norms) norms += n;
  terms.gradient = in.alpha * std::sqrt(1.0 + std::log(horizon)) /
                   ((1.0 - b) * (1.0 - b) * (1.0 - gamma) * std::sqrt(1.0 - in.beta2)) * norms;
  return terms;
}

RegretTrace run_regret_experiment(const OnlineProblem& problem, const OptimizerConfig& config,
                                  std::int64_t horizon, std::uint64_t seed) {
  problem.validate();
  config.validate();
  if (config.algorithm == Algorithm::SGD) {
    throw ConfigError("regret experiment needs an adaptive optimizer (adam or tadam)");
  }
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");

  const std::size_t dim = problem.dim;
  const auto T = static_cast<std::size_t>(horizon);
  auto targets = make_stream(seed, Stream::Targets);
  auto outliers = make_stream(seed, Stream::CorruptionMask);

  const std::size_t sizes[] = {dim};
  Optimizer optimizer(config, sizes);
  std::vector<double> theta(dim, std::clamp(problem.initial, -problem.radius, problem.radius));
  std::vector<double> grad(dim);
  std::vector<double> clean(dim);
  std::vector<double> observed(dim);

  // Hindsight-minimizer bookkeeping: running sums for quadratics, running grid
  // totals otherwise.
  std::vector<double> sum(dim, 0.0);
  std::vector<double> sum_sq(dim, 0.0);
  std::vector<double> grid;
  std::vector<std::vector<double>> grid_totals;
  if (problem.kind == LossKind::Absolute) {
    grid.resize(problem.grid_points);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      grid[k] = -problem.radius + problem.diameter() * static_cast<double>(k) /
                                      static_cast<double>(grid.size() - 1);
    }
    grid_totals.assign(dim, std::vector<double>(grid.size(), 0.0));
  }
  auto loss = [&](double th, double c) {
    const double r = th - c;
    return problem.kind == LossKind::Quadratic ? problem.curvature * r * r
                                               : problem.curvature * std::abs(r);
  };
  auto derivative = [&](double th, double c) {
    const double r = th - c;
    if (problem.kind == LossKind::Quadratic) return 2.0 * problem.curvature * r;
    return problem.curvature * static_cast<double>((r > 0.0) - (r < 0.0));
  };

  RegretTrace trace;
  trace.algorithm = config.algorithm;
  trace.horizon = horizon;
  trace.diameter = problem.diameter();
  trace.cumulative_regret.resize(T);
  trace.theta_star.assign(dim, 0.0);
  auto& bound_in = trace.bound_inputs;
  bound_in.v_hat_history.reserve(T);
  bound_in.beta1t.reserve(T);
  std::vector<std::vector<double>> grad_history;
  grad_history.reserve(T);

  double online_loss = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    const bool outlier = problem.outlier_prob > 0.0 && uniform01(outliers) < problem.outlier_prob;
    for (std::size_t i = 0; i < dim; ++i) {
      clean[i] = problem.target_low + (problem.target_high - problem.target_low) * uniform01(targets);
      observed[i] = outlier ? problem.outlier_value : clean[i];
      online_loss += loss(theta[i], clean[i]);
      grad[i] = derivative(theta[i], observed[i]);
      trace.max_grad = std::max(trace.max_grad, std::abs(grad[i]));
    }

    double best = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      if (problem.kind == LossKind::Quadratic) {
        sum[i] += clean[i];
        sum_sq[i] += clean[i] * clean[i];
        best += quadratic_hindsight(problem.curvature, problem.radius, static_cast<double>(t),
                                    sum[i], sum_sq[i], &trace.theta_star[i]);
      } else {
        auto& totals = grid_totals[i];
        std::size_t arg = 0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
          totals[k] += loss(grid[k], clean[i]);
          if (totals[k] < totals[arg]) arg = k;
        }
        trace.theta_star[i] = grid[arg];
        best += totals[arg];
      }
    }
    trace.cumulative_regret[t - 1] = online_loss - best;

    optimizer.set_learning_rate(config.alpha / std::sqrt(static_cast<double>(t)));
    std::span<double> params_view(theta);
    std::span<const double> grad_view(grad);
    const auto diag = optimizer.step(std::span(&params_view, 1), std::span(&grad_view, 1));
    for (auto& th : theta) th = std::clamp(th, -problem.radius, problem.radius);

    const auto& state = optimizer.groups().front();
    bound_in.v_hat_history.push_back(config.amsgrad ? state.v_hat : state.v);
    bound_in.beta1t.push_back(diag.empty() ? config.beta1 : diag.front().beta_w);
    grad_history.push_back(grad);
  }
  trace.theta_final = theta;

  const auto beta_est = batch_means_estimate(bound_in.beta1t);
  trace.beta_w_mean = beta_est.mean;
  trace.beta_w_bar = config.algorithm == Algorithm::TAdam ? beta_est.upper : config.beta1;

  bound_in.final_v_hat = bound_in.v_hat_history.back();
  bound_in.grad_norms.assign(dim, 0.0);
  for (const auto& g : grad_history) {
    for (std::size_t i = 0; i < dim; ++i) bound_in.grad_norms[i] += g[i] * g[i];
  }
  for (auto& n : bound_in.grad_norms) n = std::sqrt(n);
  bound_in.diameter = problem.diameter();
  bound_in.alpha = config.alpha;
  bound_in.beta2 = config.beta2;
  bound_in.beta_w_bar = trace.beta_w_bar;
  bound_in.horizon = horizon;
  trace.gamma = trace.beta_w_bar / std::sqrt(config.beta2);

  try {
    trace.bound = eval_bound_rhs(bound_in);
    trace.bound_applicable = true;
  } catch (const BoundInapplicable&) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    trace.bound = BoundTerms{nan, nan, nan};
    trace.bound_applicable = false;
  }

  // Running form of the same bound for the time-series output.
  trace.bound_series.resize(T);
  if (trace.bound_applicable) {
    const double b = trace.beta_w_bar;
    const double d2 = trace.diameter * trace.diameter;
    const double g_coef = config.alpha / ((1.0 - b) * (1.0 - b) * (1.0 - trace.gamma) *
                                          std::sqrt(1.0 - config.beta2));
    std::vector<double> sq(dim, 0.0);
    double momentum = 0.0;
    for (std::size_t t = 1; t <= T; ++t) {
      const double alpha_t = config.alpha / std::sqrt(static_cast<double>(t));
      double root = 0.0;
      for (const double v : bound_in.v_hat_history[t - 1]) root += std::sqrt(v);
      momentum += bound_in.beta1t[t - 1] * root / alpha_t;
      double norms = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        sq[i] += grad_history[t - 1][i] * grad_history[t - 1][i];
        norms += std::sqrt(sq[i]);
      }
      auto& terms = trace.bound_series[t - 1];
      terms.initial_distance = d2 / (2.0 * alpha_t * (1.0 - b)) * root;
      terms.momentum = d2 / ((1.0 - b) * (1.0 - b)) * momentum;
      terms.gradient = g_coef * std::sqrt(1.0 + std::log(static_cast<double>(t))) * norms;
    }
  } else {
    std::fill(trace.bound_series.begin(), trace.bound_series.end(), trace.bound);
  }
  return trace;
}

std::string moment_reports_json(std::span<const MomentCheckReport> reports) {
  json out = json::array();
  for (const auto& r : reports) {
    for (const auto& c : r.claims) {
      out.push_back({
          {"claim", c.claim},
          {"statistic", c.statistic},
          {"value", number_or_null(c.value)},
          {"interval", {number_or_null(c.lower), number_or_null(c.upper)}},
          {"verdict", !c.checked ? "skipped" : (c.pass ? "pass" : "fail")},
          {"note", c.note},
          {"d", r.d},
          {"nu", r.nu},
          {"beta1", r.beta1},
          {"n_steps", r.n_steps},
          {"seed", r.seed},
      });
    }
  }
  return out.dump(2) + "\n";
}

std::string regret_json(const RegretTrace& trace) {
  const bool holds = trace.bound_applicable && trace.final_regret() <= trace.bound_rhs();
  json out = {
      {"algorithm", std::string(to_string(trace.algorithm))},
      {"horizon", trace.horizon},
      {"final_regret", trace.final_regret()},
      {"bound_rhs", number_or_null(trace.bound_rhs())},
      {"bound_terms",
       {number_or_null(trace.bound.initial_distance), number_or_null(trace.bound.momentum),
        number_or_null(trace.bound.gradient)}},
      {"beta_w_mean", trace.beta_w_mean},
      {"beta_w_bar", trace.beta_w_bar},
      {"gamma", trace.gamma},
      {"D_inf", trace.diameter},
      {"G_inf", trace.max_grad},
      {"bound_applicable", trace.bound_applicable},
      {"claim", "R_T <= regret bound"},
      {"verdict", !trace.bound_applicable ? "inapplicable" : (holds ? "pass" : "fail")},
      {"theta_final", trace.theta_final},
      {"theta_star", trace.theta_star},
  };
  return out.dump(2) + "\n";
}

void write_regret_csv(std::ostream& out, const RegretTrace& trace) {
  CsvTable table;
  table.header = {"t", "regret", "bound_initial_distance", "bound_momentum", "bound_gradient",
                  "bound_total"};
  table.rows.reserve(trace.cumulative_regret.size());
  for (std::size_t t = 0; t < trace.cumulative_regret.size(); ++t) {
    const auto& b = trace.bound_series[t];
    table.rows.push_back({std::to_string(t + 1), format_double(trace.cumulative_regret[t]),
                          format_double(b.initial_distance), format_double(b.momentum),
                          format_double(b.gradient), format_double(b.total())});
  }
  write_csv(out, table);
}

}  // namespace tadam
