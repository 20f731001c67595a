"""Tests for calc_conditionals module."""

import numpy as np
import pytest
from functions.calc_conditionals import fisher_terms, linear_conditionals
from functions.errors import DegeneracyError
from functions.linear_model import ou_1d, ou_hierarchical, random_stable_model


def test_coupling_coefficient_hierarchical():
    """g is the (y, x) entry of exp(-A tau): alpha (e^{-a tau} - e^{-b tau}) / (b - a)."""
    tau = 3.0
    c = linear_conditionals(ou_hierarchical(), tau)
    expected = 0.5 * (np.exp(-0.1 * tau) - np.exp(-0.2 * tau)) / 0.1
    assert abs(c['g'] - expected) < 1e-10


def test_variance_ordering():
    """Conditioning on more information never increases the variance of y_tau."""
    rng = np.random.default_rng(5)
    for _ in range(10):
        model = random_stable_model(rng, 4)
        c = linear_conditionals(model, 1.5)
        assert 0 < c['var_full'] <= c['var_reduced'] <= c['var_y'] + 1e-12
        assert c['var_x'] > 0


def test_tau_zero_degenerate():
    """At tau = 0 y_tau equals y_0 and the conditional law collapses."""
    with pytest.raises(DegeneracyError):
        linear_conditionals(ou_hierarchical(), 0.0)


def test_negative_tau_rejected():
    """Negative lags have no conditional structure."""
    with pytest.raises(ValueError):
        linear_conditionals(ou_hierarchical(), -1.0)


def test_scalar_model_rejected():
    """A model without a response variable cannot be conditioned."""
    with pytest.raises(ValueError):
        linear_conditionals(ou_1d(), 1.0)


def test_fisher_terms():
    """Fisher terms are -g^2/var_full and -1/var_x."""
    model = ou_hierarchical()
    c = linear_conditionals(model, 2.0)
    num, den = fisher_terms(model, 2.0)
    assert num == pytest.approx(-c['g'] ** 2 / c['var_full'])
    assert den == pytest.approx(-1.0 / c['var_x'])
    assert num / den == pytest.approx(c['g'] ** 2 * c['var_x'] / c['var_full'])
