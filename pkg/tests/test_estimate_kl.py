"""Tests for estimate_kl and estimate_te modules."""

import numpy as np
import pytest
from functions.errors import EstimatorError
from functions.estimate_kl import KlEstimate, jackknife_groups, jackknife_stderr, kl_knn
from functions.estimate_te import granger_te, knn_cmi


def test_kl_same_distribution():
    """Two samples of one Gaussian give a divergence consistent with zero."""
    rng = np.random.default_rng(0)
    est = kl_knn(rng.standard_normal(5000), rng.standard_normal(5000), seed=0)
    assert est.estimator == 'knn_k' and est.k == 5
    assert abs(est.value) < 4.0 * est.stderr + 1e-3


def test_kl_shifted_mean():
    """N(0.25, 0.5) against N(0, 0.5) has divergence 0.0625."""
    rng = np.random.default_rng(1)
    p = rng.normal(0.25, np.sqrt(0.5), 20_000)
    q = rng.normal(0.0, np.sqrt(0.5), 20_000)
    est = kl_knn(p, q, seed=1)
    assert abs(est.value - 0.0625) < 0.02
    assert 0 < est.stderr < 0.02


def test_kl_halved_variance_2d():
    """Halved variance in each of two dimensions: 2 x (1/2 - 1 - ln(1/2))/2 = ln 2 - 1/2."""
    rng = np.random.default_rng(2)
    p = rng.normal(0.0, np.sqrt(0.5), (50_000, 2))
    q = rng.standard_normal((50_000, 2))
    est = kl_knn(p, q, n_blocks=0, seed=2)
    assert abs(est.value - (np.log(2.0) - 0.5)) < 0.03


def test_kl_doubled_variance_2d_biased_low():
    """A p wider than q is underestimated in two dimensions, by a few hundredths of a nat."""
    rng = np.random.default_rng(2)
    p = rng.normal(0.0, np.sqrt(2.0), (20_000, 2))
    q = rng.standard_normal((20_000, 2))
    est = kl_knn(p, q, n_blocks=0, seed=2)
    shortfall = (1.0 - np.log(2.0)) - est.value
    assert 0.0 < shortfall < 0.08


def test_kl_affine_invariance():
    """Shifting, rescaling and mixing coordinates of both sets leaves the estimate unchanged."""
    rng = np.random.default_rng(12)
    p = rng.normal(0.3, 1.0, (3000, 2))
    q = rng.standard_normal((3000, 2))
    M = np.array([[2.0, 0.5], [-1.0, 3.0]])
    b = np.array([10.0, -4.0])
    base = kl_knn(p, q, seed=12)
    mapped = kl_knn(p @ M.T + b, q @ M.T + b, seed=12)
    assert mapped.value == pytest.approx(base.value, rel=1e-8, abs=1e-10)
    assert mapped.stderr == pytest.approx(base.stderr, rel=1e-6, abs=1e-10)


def test_kl_seeded_reproducible():
    """Same inputs and seed give identical estimates and errors."""
    rng = np.random.default_rng(3)
    p, q = rng.standard_normal((500, 2)), rng.standard_normal((500, 2))
    assert kl_knn(p, q, seed=7).to_record() == kl_knn(p, q, seed=7).to_record()


def test_kl_input_checks():
    """Dimension mismatch, too few points and duplicated samples are rejected."""
    rng = np.random.default_rng(4)
    with pytest.raises(ValueError):
        kl_knn(rng.standard_normal((100, 2)), rng.standard_normal((100, 1)))
    with pytest.raises(ValueError):
        kl_knn(rng.standard_normal(4), rng.standard_normal(100), k=5)
    dup = np.repeat(rng.standard_normal(100), 10)
    with pytest.raises(EstimatorError):
        kl_knn(dup, rng.standard_normal(1000))
    with pytest.raises(EstimatorError):
        kl_knn(np.zeros(100), np.zeros(100))


def test_jackknife_helpers():
    """Groups are balanced and constant estimates have zero error."""
    groups = jackknife_groups(100, 10, seed=0)
    assert np.all(np.bincount(groups) == 10)
    assert jackknife_stderr([1.0, 1.0, 1.0]) == 0.0
    with pytest.raises(ValueError):
        KlEstimate(0.1, -1.0, 'knn_k', 10, 10)


def test_granger_linear():
    """y_tau = x_0 + y_0 + noise with independent unit inputs: T = ln(2)/2."""
    rng = np.random.default_rng(5)
    n = 20_000
    x0, y0 = rng.standard_normal(n), rng.standard_normal(n)
    yt = x0 + y0 + rng.standard_normal(n)
    est = granger_te(x0, y0, yt)
    assert est.estimator == 'granger' and est.metadata['linear_only']
    assert abs(est.value - 0.5 * np.log(2.0)) < 0.02


def test_granger_pure_noise():
    """Without coupling the Granger estimate is essentially zero."""
    rng = np.random.default_rng(6)
    n = 10_000
    est = granger_te(rng.standard_normal(n), rng.standard_normal(n), rng.standard_normal(n))
    assert est.value < 1e-3
    with pytest.raises(ValueError):
        granger_te(np.zeros(10), np.zeros(10), np.zeros(10))


def test_knn_mutual_information_gaussian():
    """Correlated Gaussians: I = -ln(1 - rho^2) / 2."""
    rng = np.random.default_rng(7)
    rho = 0.6
    x = rng.standard_normal(4000)
    y = rho * x + np.sqrt(1 - rho ** 2) * rng.standard_normal(4000)
    est = knn_cmi(x, y, seed=7)
    assert abs(est.value + 0.5 * np.log(1 - rho ** 2)) < 0.03
    assert est.estimator == 'ksg' and not est.metadata['conditional']


def test_knn_cmi_conditionally_independent():
    """x and y sharing only a common driver z have zero conditional information."""
    rng = np.random.default_rng(8)
    z = rng.standard_normal(4000)
    x = 0.5 * z + rng.standard_normal(4000)
    y = 0.5 * z + rng.standard_normal(4000)
    est = knn_cmi(x, y, z, seed=8)
    assert abs(est.value) < 0.03
    assert est.metadata['conditional']
