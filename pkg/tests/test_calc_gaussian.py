"""Tests for calc_gaussian module."""

import numpy as np
import pytest
from functions.calc_gaussian import GaussianDist, condition, gaussian_kl, gaussian_score
from functions.errors import DegeneracyError


def test_condition_bivariate():
    """Unit-variance pair with correlation 0.5: slope 0.5, residual variance 0.75."""
    joint = GaussianDist([0.0, 0.0], [[1.0, 0.5], [0.5, 1.0]])
    spec = condition(joint, [0], [1])
    assert abs(spec.B[0, 0] - 0.5) < 1e-12
    assert abs(spec.R[0, 0] - 0.75) < 1e-12
    assert abs(spec.mean([2.0])[0] - 1.0) < 1e-12
    assert spec.coefficient(1)[0] == pytest.approx(0.5)


def test_condition_on_nothing_is_marginal():
    """An empty given set returns the marginal covariance."""
    joint = GaussianDist([1.0, 2.0], [[2.0, 0.3], [0.3, 1.0]])
    spec = condition(joint, [0], [])
    np.testing.assert_allclose(spec.R, [[2.0]])
    np.testing.assert_allclose(spec.mean_target, [1.0])


def test_condition_singular_block():
    """Conditioning on perfectly correlated variables is degenerate."""
    joint = GaussianDist(np.zeros(3), [[1.0, 1.0, 0.2], [1.0, 1.0, 0.2], [0.2, 0.2, 1.0]])
    with pytest.raises(DegeneracyError):
        condition(joint, [2], [0, 1])


def test_condition_overlap_rejected():
    """Target and given sets must be disjoint."""
    joint = GaussianDist(np.zeros(2), np.eye(2))
    with pytest.raises(ValueError):
        condition(joint, [0], [0])


def test_gaussian_kl_oracles():
    """Shifted mean and doubled variance against their closed forms."""
    p = GaussianDist([0.25], [[0.5]])
    q = GaussianDist([0.0], [[0.5]])
    assert abs(gaussian_kl(p, q) - 0.0625) < 1e-12
    wide = GaussianDist([0.0], [[2.0]])
    unit = GaussianDist([0.0], [[1.0]])
    assert abs(gaussian_kl(wide, unit) - 0.5 * (1.0 - np.log(2.0))) < 1e-12
    assert gaussian_kl(unit, unit) == 0.0


def test_gaussian_kl_singular():
    """A singular covariance cannot enter the divergence."""
    p = GaussianDist(np.zeros(2), [[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(DegeneracyError):
        gaussian_kl(p, GaussianDist(np.zeros(2), np.eye(2)))


def test_gaussian_score_standard_normal():
    """Score of the standard normal is -x."""
    pts = np.array([[1.0, -2.0], [0.5, 0.0]])
    np.testing.assert_allclose(gaussian_score(GaussianDist(np.zeros(2), np.eye(2)), pts), -pts)


def test_invalid_covariance():
    """Asymmetric covariances are rejected."""
    with pytest.raises(ValueError):
        GaussianDist([0.0, 0.0], [[1.0, 0.2], [0.0, 1.0]])
