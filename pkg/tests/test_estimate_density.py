"""Tests for estimate_density module."""

import numpy as np
import pytest
from functions.errors import EstimatorError
from functions.estimate_density import SampleSet, bw_silverman, kde_density, kde_score, kernel_regression


def test_silverman_bandwidth():
    """Standard normal samples give roughly 0.9 n^(-1/5)."""
    x = np.random.default_rng(0).standard_normal(10_000)
    assert bw_silverman(x)[0] == pytest.approx(0.9 * 10_000 ** -0.2, rel=0.05)
    with pytest.raises(EstimatorError):
        bw_silverman(np.ones(100))


def test_kde_density_standard_normal():
    """Density at the origin approaches 1/sqrt(2 pi)."""
    x = np.random.default_rng(1).standard_normal(5000)
    dens = kde_density(x, np.array([0.0, 1.0]))
    assert abs(dens[0] - 1.0 / np.sqrt(2.0 * np.pi)) < 0.02
    assert dens[0] > dens[1] > 0


def test_kde_density_2d_integrates():
    """A 2D estimate integrates to about one on a wide grid."""
    pts = np.random.default_rng(2).standard_normal((2000, 2))
    g = np.linspace(-5, 5, 81)
    X, Y = np.meshgrid(g, g)
    dens = kde_density(pts, np.column_stack([X.ravel(), Y.ravel()])).reshape(X.shape)
    cell = (g[1] - g[0]) ** 2
    assert dens.sum() * cell == pytest.approx(1.0, abs=0.01)


def test_kde_score_standard_normal():
    """Score of a standard normal smoothed with bandwidth h is -x / (1 + h^2)."""
    x = np.random.default_rng(3).standard_normal(50_000)
    h = 0.5
    points = np.array([-1.0, 0.5])
    score = kde_score(x, points, dim=0, bandwidth=h)
    # derivative estimates scatter like 1/sqrt(n h^3): about 0.01 here
    np.testing.assert_allclose(score, -points / (1.0 + h ** 2), atol=0.05)


def test_kde_score_default_bandwidth_sign():
    """With Silverman bandwidths the score still points back to the mode."""
    x = np.random.default_rng(3).standard_normal(50_000)
    score = kde_score(x, np.array([-1.5, -1.0, 1.0, 1.5]), dim=0)
    assert np.all(score[:2] > 0.5) and np.all(score[2:] < -0.5)


def test_kernel_regression_linear():
    """Nadaraya-Watson recovers a linear conditional mean inside the bulk."""
    rng = np.random.default_rng(4)
    x = rng.standard_normal(5000)
    r = 2.0 * x + 0.3 * rng.standard_normal(5000)
    values, extrapolated = kernel_regression(x, r, np.array([0.0, 1.0, 12.0]))
    assert abs(values[0]) < 0.05
    assert abs(values[1] - 2.0) < 0.1
    assert not extrapolated[0] and not extrapolated[1]
    assert extrapolated[2]


def test_small_samples_rejected():
    """Too few samples for a stable estimate raise ValueError."""
    with pytest.raises(ValueError):
        kde_density(np.arange(10.0), [0.0])
    with pytest.raises(ValueError):
        kernel_regression(np.arange(50.0), np.arange(50.0), [0.0])


def test_sample_set_weights():
    """Weights are validated and normalized."""
    s = SampleSet(np.arange(4.0), weights=[1.0, 1.0, 2.0, 0.0])
    assert s.dim == 1 and s.n == 4
    np.testing.assert_allclose(s.normalized_weights(), [0.25, 0.25, 0.5, 0.0])
    with pytest.raises(ValueError):
        SampleSet(np.arange(4.0), weights=[1.0, -1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        SampleSet([0.0, np.nan])
