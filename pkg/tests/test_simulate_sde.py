"""Tests for simulate_sde and simulate_brownian modules."""

import warnings
from dataclasses import replace

import numpy as np
import pytest
from functions.calc_lyapunov import matexp
from functions.errors import SimulationDivergenceError
from functions.sde_models import SdeModel, build_model
from functions.simulate_brownian import simulate_brownian_particle
from functions.simulate_sde import (SimConfig, propagate_states, simulate_conditional, simulate_stationary,
                                    simulate_twin)


def test_exact_stationary_variance():
    """Exact-propagator samples of the 1D OU process have variance 0.5."""
    model = build_model('ou1', a=0.1, q=0.1)
    ens = simulate_stationary(model, SimConfig(method='exact', n_trajectories=20_000, tau_record=(1.0,)))
    assert ens.state(0).shape == (20_000, 1)
    assert abs(ens.component(0).var() - 0.5) < 0.03
    corr = np.corrcoef(ens.component(0, 0.0), ens.component(0, 1.0))[0, 1]
    assert abs(corr - np.exp(-0.1)) < 0.02


def test_euler_stationary_variance():
    """Euler-Maruyama with burn-in reaches the stationary variance."""
    model = build_model('ou1', a=1.0, q=2.0)
    cfg = SimConfig(dt=0.01, burn_in=10.0, n_trajectories=5000, tau_record=(), method='euler')
    ens = simulate_stationary(model, cfg)
    assert abs(ens.component(0).var() - 1.0) < 0.08


def test_same_seed_identical():
    """Identical configurations give byte-identical ensembles."""
    model = build_model('quad')
    cfg = SimConfig(dt=0.01, burn_in=2.0, n_trajectories=600, block_size=256, tau_record=(0.5,))
    a = simulate_stationary(model, cfg)
    b = simulate_stationary(model, cfg)
    assert a.samples.tobytes() == b.samples.tobytes()


def test_threads_match_serial():
    """Worker count does not change the draws for a fixed block size."""
    model = build_model('quad')
    cfg = SimConfig(dt=0.01, burn_in=2.0, n_trajectories=600, block_size=128, tau_record=(0.5,))
    serial = simulate_stationary(model, cfg)
    threaded = simulate_stationary(model, replace(cfg, n_workers=3))
    np.testing.assert_array_equal(serial.samples, threaded.samples)


def test_different_seeds_differ():
    """Changing the seed changes the draws."""
    model = build_model('ou1')
    a = simulate_stationary(model, SimConfig(method='exact', n_trajectories=100, seed=1))
    b = simulate_stationary(model, SimConfig(method='exact', n_trajectories=100, seed=2))
    assert not np.array_equal(a.samples, b.samples)


def test_twin_difference_is_deterministic_for_linear_models():
    """With shared noise the twin difference is exp(-A tau) applied to the kick."""
    model = build_model('ou2')
    cfg = SimConfig(method='exact', n_trajectories=200, tau_record=(3.0,))
    nat, pert = simulate_twin(model, cfg, [0.2, -0.1], 0.05)
    expected = 0.05 * matexp(-model.linear.A * 3.0)[:, 0]
    np.testing.assert_allclose(pert.state(3.0) - nat.state(3.0), np.tile(expected, (200, 1)), atol=1e-10)
    assert pert.provenance['perturbation']['eps'] == 0.05


def test_twin_zero_kick_identical():
    """An eps = 0 twin reproduces the natural run bit for bit."""
    model = build_model('quad')
    cfg = SimConfig(dt=0.05, n_trajectories=300, block_size=128, tau_record=(1.0, 3.0))
    nat, pert = simulate_twin(model, cfg, [0.3, 1.0], 0.0)
    assert nat.samples.tobytes() == pert.samples.tobytes()


def test_twin_difference_spreads_for_nonlinear_models():
    """The x difference stays deterministic while the y difference depends on the shared noise."""
    model = build_model('quad')
    cfg = SimConfig(dt=0.05, n_trajectories=500, tau_record=(3.0,))
    nat, pert = simulate_twin(model, cfg, [0.3, 1.0], 0.25)
    dx = pert.component(0, 3.0) - nat.component(0, 3.0)
    dy = pert.component(1, 3.0) - nat.component(1, 3.0)
    np.testing.assert_allclose(dx, dx[0], rtol=1e-12)
    assert abs(dx[0] - 0.25 * (1.0 - 0.1 * 0.05) ** 60) < 1e-12
    assert dy.std() > 1e-3
    assert np.all(np.isfinite(dy))


def test_noiseless_decay_matches_propagator():
    """With Q = 0 both integrators follow start exp(-A tau)^T; Euler converges as dt shrinks."""
    A = [[0.5, 0.0], [-0.4, 0.2]]
    model = build_model('inline', A=A, Q=np.zeros((2, 2)))
    start = np.array([1.0, -0.5])
    expected = start @ matexp(-np.asarray(A) * 3.0).T

    exact = simulate_conditional(model, SimConfig(method='exact', n_trajectories=4, tau_record=(3.0,)), start)
    np.testing.assert_allclose(exact.state(3.0), np.tile(expected, (4, 1)), rtol=1e-12, atol=1e-14)

    errors = []
    for dt in (0.1, 0.05, 0.01):
        euler = simulate_conditional(model, SimConfig(dt=dt, n_trajectories=4, tau_record=(3.0,)), start)
        assert np.ptp(euler.state(3.0), axis=0).max() == 0.0
        errors.append(abs(euler.state(3.0)[0, 0] - expected[0]))
    assert errors[0] > errors[1] > errors[2]
    # x decays on its own: (1 - dt / 2)^(3 / dt) against exp(-3 / 2)
    assert errors[0] / errors[2] == pytest.approx(10.0, rel=0.15)


def test_euler_stationary_variance_bias_shrinks_with_dt():
    """Euler-Maruyama stationary variance of dx = -x dt + sqrt(2) dW is 1 / (1 - dt / 2)."""
    model = build_model('ou1', a=1.0, q=2.0)
    variances = {}
    for dt in (0.2, 0.01):
        cfg = SimConfig(dt=dt, burn_in=10.0, n_trajectories=20_000, tau_record=(), seed=8)
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            variances[dt] = simulate_stationary(model, cfg).component(0).var()
    assert abs(variances[0.2] - 1.0 / 0.9) < 0.04
    assert abs(variances[0.01] - 1.0 / 0.995) < 0.04
    assert variances[0.2] > variances[0.01]


def test_conditional_mean():
    """Conditional ensembles relax toward zero as exp(-a tau)."""
    model = build_model('ou1', a=0.5, q=0.2)
    ens = simulate_conditional(model, SimConfig(method='exact', n_trajectories=20_000, tau_record=(2.0,)), [1.0])
    assert abs(ens.component(0, 2.0).mean() - np.exp(-1.0)) < 0.01
    np.testing.assert_array_equal(ens.component(0), 1.0)


def test_propagate_per_trajectory_starts():
    """Per-trajectory starting states keep their row order."""
    model = build_model('ou2')
    starts = np.column_stack([np.linspace(-1, 1, 50), np.zeros(50)])
    (ens,) = propagate_states(model, SimConfig(method='exact', n_trajectories=50, tau_record=(1.0,)), [starts])
    np.testing.assert_array_equal(ens.state(0), starts)
    with pytest.raises(ValueError):
        ens.state(2.0)


def test_to_frame_columns():
    """Frame has initial coordinates and y at each positive lag."""
    ens = simulate_stationary(build_model('ou2'), SimConfig(method='exact', n_trajectories=10, tau_record=(1.0, 3.0)))
    assert list(ens.to_frame().columns) == ['x0', 'y0', 'y_tau=1', 'y_tau=3']


def test_divergence_detected():
    """Exploding trajectories raise SimulationDivergenceError."""
    model = SdeModel(name='blowup', n=1, drift=lambda s: s ** 3, noise_cov=[[0.0]], timescales=(1.0,))
    cfg = SimConfig(dt=0.01, n_trajectories=4, tau_record=(5.0,))
    with pytest.raises(SimulationDivergenceError):
        simulate_conditional(model, cfg, [10.0])


def test_config_validation():
    """Invalid settings are rejected at construction."""
    with pytest.raises(ValueError):
        SimConfig(dt=0.0)
    with pytest.raises(ValueError):
        SimConfig(method='rk4')
    with pytest.raises(ValueError):
        SimConfig(tau_record=(-1.0,))
    with pytest.raises(ValueError):
        propagate_states(build_model('ou1'), SimConfig(dt=0.01, tau_record=(0.015,)), [np.zeros((3, 1))])


def test_brownian_work_moments():
    """Mean work f^2/2m and variance 2 <W> T for a short pulse."""
    cfg = SimConfig(n_trajectories=20_000, seed=3)
    out = simulate_brownian_particle(1.0, 1.0, 1.0, 0.5, 1e-3, cfg, n_substeps=50)
    W = out['W']
    assert W.shape == (20_000,)
    assert abs(W.mean() - 0.125) < 0.01 * 0.125
    assert abs(W.var(ddof=1) - 0.25) < 0.05 * 0.25
    # first block holds antithetic pairs (v0, -v0)
    np.testing.assert_array_equal(out['v0'][:2048], -out['v0'][2048:4096])


def test_brownian_zero_force():
    """Without a force no work is done."""
    out = simulate_brownian_particle(1.0, 1.0, 1.0, 0.0, 1e-3, SimConfig(n_trajectories=100))
    np.testing.assert_array_equal(out['W'], 0.0)
    with pytest.raises(ValueError):
        simulate_brownian_particle(1.0, 1.0, 1.0, 0.5, 0.0, SimConfig(n_trajectories=10))
