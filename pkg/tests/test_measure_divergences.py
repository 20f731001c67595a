"""Tests for measure_divergences module."""

import numpy as np
import pytest
from functions.calc_conditionals import linear_conditionals
from functions.calc_lyapunov import solve_lyapunov
from functions.errors import DegeneracyError
from functions.measure_divergences import (ensemble_response_divergence, local_response_divergence,
                                           perturbation_divergence)
from functions.sde_models import build_model
from functions.simulate_sde import SimConfig, simulate_stationary


def test_local_response_divergence_linear():
    """For a linear model the local divergence is g^2 eps^2 / (2 var_full)."""
    model = build_model('ou2')
    c = linear_conditionals(model.linear, 3.0)
    eps = np.sqrt(0.6 * c['var_full']) / c['g']
    cfg = SimConfig(method='exact', n_trajectories=5000, seed=1)
    est = local_response_divergence(model, [0.3, -0.2], eps, 3.0, cfg)
    assert abs(est.value - 0.3) < 0.05


def test_local_response_divergence_time_arrow():
    """Zero before the perturbation, undefined at tau = 0."""
    model = build_model('ou2')
    cfg = SimConfig(method='exact', n_trajectories=100)
    assert local_response_divergence(model, [0.0, 0.0], 0.1, -1.0, cfg).value == 0.0
    with pytest.raises(DegeneracyError):
        local_response_divergence(model, [0.0, 0.0], 0.1, 0.0, cfg)


def test_perturbation_divergence_brownian():
    """Shifting equilibrium velocities by eps costs eps^2 m / 2T."""
    model = build_model('brownian', m=1.0, lam=1.0, temp=1.0)
    cfg = SimConfig(method='exact', n_trajectories=40_000, seed=2)
    est = perturbation_divergence(model, 0.5, cfg=cfg)
    assert abs(est.value - 0.125) < 0.02
    assert est.n_p == 20_000


def test_perturbation_divergence_correlated_pair():
    """On the correlated (x, y) cloud of ou2 a shift in x costs eps^2 / (2 var_x|y)."""
    model = build_model('ou2')
    S = solve_lyapunov(model.linear)
    var_xy = S[0, 0] - S[0, 1] ** 2 / S[1, 1]
    eps = 0.7 * np.sqrt(var_xy)
    cfg = SimConfig(method='exact', n_trajectories=100_000, seed=4)
    est = perturbation_divergence(model, eps, cfg=cfg)
    assert abs(est.value - 0.245) < 4.0 * est.stderr + 0.01


def test_perturbation_divergence_needs_input():
    """Either a config or stationary states must be supplied."""
    with pytest.raises(ValueError):
        perturbation_divergence(build_model('ou1'), 0.1)
    with pytest.raises(ValueError):
        perturbation_divergence(build_model('ou1'), 0.1, states=np.zeros((3, 1)))


def test_ensemble_response_divergence_linear():
    """Whole-ensemble shift of x moves <y_tau> by g eps: D = g^2 eps^2 / (2 var_y)."""
    model = build_model('ou2')
    c = linear_conditionals(model.linear, 3.0)
    eps = np.sqrt(0.4 * c['var_y']) / c['g']
    cfg = SimConfig(method='exact', n_trajectories=20_000, seed=3, tau_record=(3.0,))
    stationary = simulate_stationary(model, cfg)
    est = ensemble_response_divergence(model, eps, 3.0, cfg, stationary=stationary)
    assert abs(est.value - 0.2) < 0.04
    assert ensemble_response_divergence(model, eps, -2.0, cfg).value == 0.0


def test_scalar_model_has_no_response():
    """Response divergences need a response variable."""
    model = build_model('ou1')
    with pytest.raises(ValueError):
        local_response_divergence(model, [0.0], 0.1, 1.0, SimConfig(method='exact', n_trajectories=100))
