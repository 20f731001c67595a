"""Tests for calc_lyapunov module."""

import numpy as np
import pytest
from functions.calc_lyapunov import lagged_joint, matexp, solve_lyapunov
from functions.linear_model import LinearModel, ou_1d, ou_hierarchical, random_stable_model


def test_1d_variance():
    """dx/dt = -0.1 x + eta with q = 0.1 has stationary variance q/2a = 0.5."""
    sigma = solve_lyapunov(ou_1d(a=0.1, q=0.1))
    assert abs(sigma[0, 0] - 0.5) < 1e-12


def test_lyapunov_residual_and_symmetry():
    """Solution satisfies A S + S A^T = Q and is symmetric PSD."""
    rng = np.random.default_rng(0)
    for n in (2, 4, 6):
        model = random_stable_model(rng, n)
        S = solve_lyapunov(model)
        np.testing.assert_allclose(model.A @ S + S @ model.A.T, model.Q, atol=1e-10)
        np.testing.assert_array_equal(S, S.T)
        assert np.linalg.eigvalsh(S).min() > 0


def test_large_model_uses_scipy_path():
    """Above the Kronecker limit the Bartels-Stewart solution still satisfies the equation."""
    n = 24
    A = np.eye(n) + 0.1 * np.diag(np.ones(n - 1), -1)
    model = LinearModel(A=A, Q=np.eye(n))
    S = solve_lyapunov(model)
    np.testing.assert_allclose(A @ S + S @ A.T, np.eye(n), atol=1e-10)


def test_hierarchical_x_variance():
    """The driver of the hierarchical model is an autonomous OU with variance q t_R / 2."""
    S = solve_lyapunov(ou_hierarchical(t_R=10.0, q=0.1))
    assert abs(S[0, 0] - 0.5) < 1e-12


def test_matexp_diagonal():
    """exp of a diagonal matrix is the elementwise exp of the diagonal."""
    np.testing.assert_allclose(matexp(np.diag([-1.0, 0.5])), np.diag(np.exp([-1.0, 0.5])))
    with pytest.raises(ValueError):
        matexp(np.ones((2, 3)))


def test_lagged_joint_1d_autocovariance():
    """Cov(x_tau, x_0) = exp(-a tau) var_x for a 1D OU process."""
    lj = lagged_joint(ou_1d(a=0.1, q=0.1), 3.0)
    assert lj.joint.dim == 2
    assert abs(lj.cross[0, 0] - 0.5 * np.exp(-0.3)) < 1e-12
    np.testing.assert_allclose(lj.stationary, [[0.5]])
    assert lj.index_at_tau(0) == 1


def test_lagged_joint_negative_tau():
    """Negative lags are rejected."""
    with pytest.raises(ValueError):
        lagged_joint(ou_1d(), -1.0)
