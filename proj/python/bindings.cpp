#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <span>
#include <string>
#include <vector>

#include "tadam/bench.hpp"
#include "tadam/experiment_config.hpp"
#include "tadam/mlp.hpp"
#include "tadam/noise.hpp"
#include "tadam/optim.hpp"
#include "tadam/verify.hpp"

namespace py = pybind11;
using namespace tadam;

namespace {

// Parameters are updated in place, so silent dtype/layout conversion would lose the update.
std::span<double> writable(py::array& a, const char* what) {
  if (!py::isinstance<py::array_t<double>>(a) || !(a.flags() & py::array::c_style) ||
      !a.writeable()) {
    throw py::type_error(std::string(what) + " must be a writeable C-contiguous float64 array");
  }
  return {static_cast<double*>(a.mutable_data()), static_cast<std::size_t>(a.size())};
}

py::array_t<double> to_numpy(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

std::vector<double> from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  return {a.data(), a.data() + a.size()};
}

py::object nu_to_py(const DegreesOfFreedom& nu) {
  if (nu.is_auto()) return py::str("auto");
  return py::float_(nu.value());
}

DegreesOfFreedom nu_from_py(const py::object& o) {
  if (py::isinstance<py::str>(o)) return parse_degrees_of_freedom(o.cast<std::string>());
  return DegreesOfFreedom::fixed(o.cast<double>());
}

}  // namespace

PYBIND11_MODULE(_tadam, m) {
  m.doc() = "Adam / TAdam optimizers, regression network, noise model and verification tools";
  m.attr("__version__") = TADAM_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

  py::enum_<Algorithm>(m, "Algorithm")
      .value("SGD", Algorithm::SGD)
      .value("ADAM", Algorithm::Adam)
      .value("TADAM", Algorithm::TAdam);

  py::class_<OptimizerConfig>(m, "OptimizerConfig")
      .def(py::init([](Algorithm algorithm, double alpha, double beta1, double beta2, double epsilon,
                       const py::object& nu, bool amsgrad) {
             OptimizerConfig c{algorithm, alpha, beta1, beta2, epsilon, nu_from_py(nu), amsgrad};
             c.validate();
             return c;
           }),
           py::arg("algorithm") = Algorithm::Adam, py::arg("alpha") = 1e-3, py::arg("beta1") = 0.9,
           py::arg("beta2") = 0.999, py::arg("epsilon") = 1e-8, py::arg("nu") = py::str("auto"),
           py::arg("amsgrad") = false)
      .def_readwrite("algorithm", &OptimizerConfig::algorithm)
      .def_readwrite("alpha", &OptimizerConfig::alpha)
      .def_readwrite("beta1", &OptimizerConfig::beta1)
      .def_readwrite("beta2", &OptimizerConfig::beta2)
      .def_readwrite("epsilon", &OptimizerConfig::epsilon)
      .def_readwrite("amsgrad", &OptimizerConfig::amsgrad)
      .def_property(
          "nu", [](const OptimizerConfig& c) { return nu_to_py(c.nu); },
          [](OptimizerConfig& c, const py::object& o) { c.nu = nu_from_py(o); })
      .def("validate", &OptimizerConfig::validate);

  py::class_<GroupState>(m, "GroupState")
      .def_property_readonly("m", [](const GroupState& s) { return to_numpy(s.m); })
      .def_property_readonly("v", [](const GroupState& s) { return to_numpy(s.v); })
      .def_property_readonly("v_hat", [](const GroupState& s) { return to_numpy(s.v_hat); })
      .def_readonly("weight_mass", &GroupState::weight_mass)
      .def_readonly("nu", &GroupState::nu)
      .def_readonly("t", &GroupState::t)
      .def_property_readonly("dim", &GroupState::dim);

  py::class_<StepDiagnostics>(m, "StepDiagnostics")
      .def_readonly("weight", &StepDiagnostics::weight)
      .def_readonly("distance", &StepDiagnostics::distance)
      .def_readonly("beta_w", &StepDiagnostics::beta_w);

  m.def("make_group_state", &make_group_state, py::arg("dim"), py::arg("config"));
  m.def(
      "adam_step",
      [](GroupState& s, py::array params, const py::array_t<double, py::array::c_style | py::array::forcecast>& g,
         const OptimizerConfig& c) {
        adam_step(s, writable(params, "params"), {g.data(), static_cast<std::size_t>(g.size())}, c);
      },
      py::arg("state"), py::arg("params"), py::arg("grad"), py::arg("config"),
      "Updates params in place.");
  m.def(
      "tadam_step",
      [](GroupState& s, py::array params, const py::array_t<double, py::array::c_style | py::array::forcecast>& g,
         const OptimizerConfig& c) {
        return tadam_step(s, writable(params, "params"),
                          {g.data(), static_cast<std::size_t>(g.size())}, c);
      },
      py::arg("state"), py::arg("params"), py::arg("grad"), py::arg("config"),
      "Updates params in place; returns the step's weight, distance and effective decay.");
  m.def(
      "sgd_step",
      [](py::array params, const py::array_t<double, py::array::c_style | py::array::forcecast>& g,
         double alpha) {
        sgd_step(writable(params, "params"), {g.data(), static_cast<std::size_t>(g.size())}, alpha);
      },
      py::arg("params"), py::arg("grad"), py::arg("alpha"));
  m.def("effective_decay", &effective_decay, py::arg("weight_mass"), py::arg("weight"));

  py::class_<NoiseSpec>(m, "NoiseSpec")
      .def(py::init([](double nu_noise, double scale, int p_percent) {
             NoiseSpec n{nu_noise, scale, p_percent};
             n.validate();
             return n;
           }),
           py::arg("nu_noise") = 1.0, py::arg("scale") = 0.05, py::arg("p_percent") = 0)
      .def_readwrite("nu_noise", &NoiseSpec::nu_noise)
      .def_readwrite("scale", &NoiseSpec::scale)
      .def_readwrite("p_percent", &NoiseSpec::p_percent);

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("xs", [](const Dataset& d) { return to_numpy(d.xs); })
      .def_property_readonly("ts", [](const Dataset& d) { return to_numpy(d.ts); })
      .def_property_readonly("clean_ts", [](const Dataset& d) { return to_numpy(d.clean_ts); })
      .def_property_readonly("corrupted", [](const Dataset& d) {
        py::array_t<bool> out(static_cast<py::ssize_t>(d.size()));
        auto view = out.mutable_unchecked<1>();
        for (std::size_t i = 0; i < d.size(); ++i) view(i) = d.corrupted[i];
        return out;
      })
      .def("__len__", &Dataset::size);
  m.def("make_dataset", &make_dataset, py::arg("n"), py::arg("noise"), py::arg("seed"));

  py::class_<MlpModel>(m, "MlpModel")
      .def("forward", &MlpModel::forward, py::arg("inputs"))
      .def(
          "mse_loss_and_grad",
          [](MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
            auto lg = model.mse_loss_and_grad(Batch{inputs, targets});
            py::list grads;
            for (const auto& g : lg.groups()) grads.append(to_numpy({g.begin(), g.end()}));
            return py::make_tuple(lg.loss, grads);
          },
          py::arg("inputs"), py::arg("targets"),
          "Returns (loss, gradients) with one flat array per parameter group.")
      .def("parameters", [](MlpModel& model) {
        py::list out;
        for (auto g : model.parameter_groups()) out.append(to_numpy({g.begin(), g.end()}));
        return out;
      })
      .def("set_parameters",
           [](MlpModel& model, const std::vector<std::vector<double>>& values) {
             auto groups = model.parameter_groups();
             if (values.size() != groups.size()) throw InputError("wrong number of parameter groups");
             for (std::size_t i = 0; i < groups.size(); ++i) {
               if (values[i].size() != groups[i].size()) throw InputError("wrong parameter group size");
               std::copy(values[i].begin(), values[i].end(), groups[i].begin());
             }
           })
      .def_property_readonly("group_sizes", &MlpModel::group_sizes)
      .def_property_readonly("parameter_count", &MlpModel::parameter_count);
  m.def(
      "init_model",
      [](const std::vector<std::size_t>& sizes, std::uint64_t seed) { return init_model(sizes, seed); },
      py::arg("layer_sizes"), py::arg("seed"));

  py::class_<MomentCheckReport>(m, "MomentCheckReport")
      .def_readonly("d", &MomentCheckReport::d)
      .def_readonly("nu", &MomentCheckReport::nu)
      .def_readonly("beta1", &MomentCheckReport::beta1)
      .def_property_readonly("mean_distance", [](const MomentCheckReport& r) { return r.distance.mean; })
      .def_property_readonly("mean_weight", [](const MomentCheckReport& r) { return r.weight.mean; })
      .def_property_readonly("mean_beta_w", [](const MomentCheckReport& r) { return r.beta_w.mean; })
      .def_property_readonly("beta_w_stderr", [](const MomentCheckReport& r) { return r.beta_w.std_error; })
      .def_readonly("weight_upper_bound", &MomentCheckReport::weight_upper_bound)
      .def_property_readonly("claims", [](const MomentCheckReport& r) {
        py::list out;
        for (const auto& c : r.claims) {
          out.append(py::dict(py::arg("claim") = c.claim, py::arg("statistic") = c.statistic,
                              py::arg("value") = c.value, py::arg("checked") = c.checked,
                              py::arg("pass") = c.pass, py::arg("note") = c.note));
        }
        return out;
      })
      .def("passed", &MomentCheckReport::passed);
  m.def("mc_theorem2", &mc_theorem2, py::arg("d"), py::arg("nu"), py::arg("beta1"),
        py::arg("n_steps"), py::arg("seed"), py::call_guard<py::gil_scoped_release>());

  py::enum_<LossKind>(m, "LossKind")
      .value("QUADRATIC", LossKind::Quadratic)
      .value("ABSOLUTE", LossKind::Absolute);

  py::class_<OnlineProblem>(m, "OnlineProblem")
      .def(py::init<>())
      .def_readwrite("kind", &OnlineProblem::kind)
      .def_readwrite("dim", &OnlineProblem::dim)
      .def_readwrite("curvature", &OnlineProblem::curvature)
      .def_readwrite("target_low", &OnlineProblem::target_low)
      .def_readwrite("target_high", &OnlineProblem::target_high)
      .def_readwrite("radius", &OnlineProblem::radius)
      .def_readwrite("initial", &OnlineProblem::initial)
      .def_readwrite("outlier_prob", &OnlineProblem::outlier_prob)
      .def_readwrite("outlier_value", &OnlineProblem::outlier_value)
      .def_readwrite("grid_points", &OnlineProblem::grid_points);

  py::class_<BoundTerms>(m, "BoundTerms")
      .def_readonly("initial_distance", &BoundTerms::initial_distance)
      .def_readonly("momentum", &BoundTerms::momentum)
      .def_readonly("gradient", &BoundTerms::gradient)
      .def("total", &BoundTerms::total);

  py::class_<BoundInputs>(m, "BoundInputs")
      .def(py::init<>())
      .def_readwrite("final_v_hat", &BoundInputs::final_v_hat)
      .def_readwrite("v_hat_history", &BoundInputs::v_hat_history)
      .def_readwrite("beta1t", &BoundInputs::beta1t)
      .def_readwrite("grad_norms", &BoundInputs::grad_norms)
      .def_readwrite("diameter", &BoundInputs::diameter)
      .def_readwrite("alpha", &BoundInputs::alpha)
      .def_readwrite("beta2", &BoundInputs::beta2)
      .def_readwrite("beta_w_bar", &BoundInputs::beta_w_bar)
      .def_readwrite("horizon", &BoundInputs::horizon);
  m.def("eval_bound_rhs", &eval_bound_rhs, py::arg("inputs"));

  py::class_<RegretTrace>(m, "RegretTrace")
      .def_property_readonly("cumulative_regret",
                             [](const RegretTrace& r) { return to_numpy(r.cumulative_regret); })
      .def_property_readonly("bound_total", [](const RegretTrace& r) {
        std::vector<double> totals;
        for (const auto& b : r.bound_series) totals.push_back(b.total());
        return to_numpy(totals);
      })
      .def_readonly("bound", &RegretTrace::bound)
      .def_readonly("bound_inputs", &RegretTrace::bound_inputs)
      .def_readonly("beta_w_mean", &RegretTrace::beta_w_mean)
      .def_readonly("beta_w_bar", &RegretTrace::beta_w_bar)
      .def_readonly("bound_applicable", &RegretTrace::bound_applicable)
      .def_readonly("theta_final", &RegretTrace::theta_final)
      .def_readonly("theta_star", &RegretTrace::theta_star)
      .def("final_regret", &RegretTrace::final_regret)
      .def("bound_rhs", &RegretTrace::bound_rhs);
  m.def("run_regret_experiment", &run_regret_experiment, py::arg("problem"), py::arg("config"),
        py::arg("horizon"), py::arg("seed"), py::call_guard<py::gil_scoped_release>());

  m.def(
      "parse_config",
      [](const std::string& experiment, const std::string& text) {
        return serialize(parse_config(text, default_config(parse_experiment(experiment))));
      },
      py::arg("experiment"), py::arg("text") = "",
      "Returns the canonical text of the defaults for `experiment` overridden by `text`.");
  m.def(
      "config_hash",
      [](const std::string& text) { return config_hash(parse_config(text)); }, py::arg("text"));
  m.def(
      "run_experiment",
      [](const std::string& text) {
        auto config = parse_config(text);
        config.validate();
        ExperimentOutcome outcome;
        {
          py::gil_scoped_release release;
          outcome = run_experiment(config);
        }
        return outcome.files;
      },
      py::arg("config_text"), "Runs a full configuration text and returns the written file names.");
}
