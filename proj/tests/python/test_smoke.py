import math

import numpy as np
import pytest

import tadam


def test_adam_first_step():
    cfg = tadam.OptimizerConfig(algorithm=tadam.Algorithm.ADAM)
    state = tadam.make_group_state(1, cfg)
    theta = np.zeros(1)
    tadam.adam_step(state, theta, np.array([1.0]), cfg)
    assert state.m[0] == pytest.approx(0.1)
    assert state.v[0] == pytest.approx(0.001)
    assert theta[0] == pytest.approx(-0.001, rel=1e-6)


def test_tadam_first_step_degeneracy():
    cfg = tadam.OptimizerConfig(algorithm=tadam.Algorithm.TADAM, nu=1.0)
    state = tadam.make_group_state(1, cfg)
    diag = tadam.tadam_step(state, np.zeros(1), np.array([1.0]), cfg)
    assert diag.distance == pytest.approx(1e8)
    assert diag.weight == pytest.approx(2e-8, rel=1e-6)
    assert state.m[0] == pytest.approx(2.2e-9, rel=0.02)


def test_params_must_be_writeable_float64():
    cfg = tadam.OptimizerConfig(algorithm=tadam.Algorithm.ADAM)
    state = tadam.make_group_state(2, cfg)
    with pytest.raises(TypeError):
        tadam.adam_step(state, np.zeros(2, dtype=np.float32), np.ones(2), cfg)
    with pytest.raises(ValueError):
        tadam.adam_step(state, np.zeros(2), np.ones(3), cfg)


def test_config_errors_are_value_errors():
    with pytest.raises(tadam.ConfigError):
        tadam.OptimizerConfig(algorithm=tadam.Algorithm.TADAM, beta1=0.3)
    assert tadam.OptimizerConfig().nu == "auto"


def test_dataset_and_model():
    data = tadam.make_dataset(200, tadam.NoiseSpec(1.0, 0.05, 50), 0)
    assert len(data) == 200
    assert data.corrupted.dtype == np.bool_
    np.testing.assert_array_equal(data.clean_ts, np.sin(2 * np.pi * data.xs))
    model = tadam.init_model(tadam.REGRESSION_SHAPE, 0)
    assert model.parameter_count == 7801
    x = data.xs.reshape(-1, 1)
    loss, grads = model.mse_loss_and_grad(x, data.ts.reshape(-1, 1))
    assert loss == pytest.approx(np.mean((model.forward(x) - data.ts.reshape(-1, 1)) ** 2))
    assert [g.size for g in grads] == model.group_sizes


def test_training_loop_reduces_loss():
    data = tadam.make_dataset(256, tadam.NoiseSpec(1.0, 0.05, 0), 1)
    x, t = data.xs.reshape(-1, 1), data.ts.reshape(-1, 1)
    model = tadam.init_model((1, 16, 16, 1), 1)
    cfg = tadam.OptimizerConfig(algorithm=tadam.Algorithm.TADAM, alpha=1e-2)
    params = model.parameters()
    states = [tadam.make_group_state(p.size, cfg) for p in params]
    first, _ = model.mse_loss_and_grad(x, t)
    for _ in range(300):
        _, grads = model.mse_loss_and_grad(x, t)
        for p, g, s in zip(params, grads, states):
            tadam.tadam_step(s, p, g, cfg)
        model.set_parameters(params)
    last, _ = model.mse_loss_and_grad(x, t)
    assert last < 0.5 * first


def test_moment_check():
    report = tadam.mc_theorem2(10, 10.0, 0.9, 10000, 0)
    assert 9.8 <= report.mean_distance <= 10.2
    assert 1.0 <= report.mean_weight <= 2.5
    assert len(report.claims) == 4


def test_regret_and_bound():
    cfg = tadam.OptimizerConfig(algorithm=tadam.Algorithm.TADAM, alpha=0.5, amsgrad=True)
    trace = tadam.run_regret_experiment(tadam.OnlineProblem(), cfg, 2000, 0)
    assert trace.cumulative_regret.shape == (2000,)
    assert trace.final_regret() <= trace.bound_rhs()
    again = tadam.eval_bound_rhs(trace.bound_inputs)
    assert again.total() == pytest.approx(trace.bound.total(), rel=1e-9)

    zero = tadam.BoundInputs()
    zero.final_v_hat = [0.0]
    zero.v_hat_history = [[0.0]] * 3
    zero.beta1t = [0.9] * 3
    zero.grad_norms = [0.0]
    zero.diameter, zero.alpha, zero.beta2, zero.beta_w_bar, zero.horizon = 4.0, 0.5, 0.999, 0.9, 3
    assert tadam.eval_bound_rhs(zero).total() == 0.0


def test_config_text_and_experiment(tmp_path):
    text = tadam.parse_config("regret", f"regret_horizon = 100\nseeds = 0\noutput_dir = {tmp_path}\n")
    assert "regret_horizon = 100" in text
    assert len(tadam.config_hash(text)) == 64
    files = tadam.run_experiment(text)
    assert "regret.json" in files
    assert (tmp_path / "regret_tadam_seed0.csv").exists()
    assert not math.isnan(float((tmp_path / "regret_tadam_seed0.csv").read_text().splitlines()[1].split(",")[1]))
