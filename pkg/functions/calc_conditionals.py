"""Conditional variances and regression coefficients of p(y_tau | x_0, y_0, z_0) for linear models."""

import numpy as np

from .calc_gaussian import condition
from .calc_lyapunov import lagged_joint, solve_lyapunov
from .errors import DegeneracyError


def linear_conditionals(model, tau, sigma=None):
    """Conditional Gaussian quantities behind every closed-form measure.

    Confounders z_0 are always conditioned on jointly with y_0.

    Parameters
    ----------
    model : LinearModel
    tau : float
        Lag (> 0).
    sigma : numpy.ndarray, optional
        Precomputed stationary covariance.

    Returns
    -------
    dict
        g               : d<y_tau | x_0, y_0, z_0> / d x_0
        var_full        : sigma^2 of y_tau given (x_0, y_0, z_0)
        var_reduced     : sigma^2 of y_tau given (y_0, z_0)
        var_x           : sigma^2 of x_0 given (y_0, z_0)
        var_y           : stationary variance of y
        full, reduced, x_given : ConditionalGaussianSpec objects
        sigma           : stationary covariance
    """
    model.require_pair()
    if tau < 0:
        raise ValueError(f"conditionals need tau > 0, got {tau}")
    if tau == 0:
        raise DegeneracyError("p(y_tau | x_0, y_0) is degenerate at tau = 0")

    if sigma is None:
        sigma = solve_lyapunov(model)
    lj = lagged_joint(model, tau, sigma=sigma)

    x0 = lj.index_at_zero(model.x_index)
    y0 = lj.index_at_zero(model.y_index)
    z0 = [lj.index_at_zero(i) for i in model.z_indices]
    yt = lj.index_at_tau(model.y_index)

    full = condition(lj.joint, [yt], [x0, y0, *z0])
    reduced = condition(lj.joint, [yt], [y0, *z0])
    x_given = condition(lj.joint, [x0], [y0, *z0])

    var_full = float(full.R[0, 0])
    var_x = float(x_given.R[0, 0])
    scale = float(sigma[model.y_index, model.y_index])
    if var_full <= 1e-14 * max(scale, np.finfo(float).tiny):
        raise DegeneracyError(f"y_tau is deterministic given (x_0, y_0, z_0) at tau={tau}")
    if var_x <= 1e-14 * max(float(sigma[model.x_index, model.x_index]), np.finfo(float).tiny):
        raise DegeneracyError("x_0 is deterministic given (y_0, z_0)")

    return {
        'tau': float(tau),
        'g': float(full.coefficient(x0)[0]),
        'var_full': var_full,
        'var_reduced': float(reduced.R[0, 0]),
        'var_x': var_x,
        'var_y': scale,
        'full': full,
        'reduced': reduced,
        'x_given': x_given,
        'sigma': sigma,
    }


def fisher_terms(model, tau):
    """Second derivatives of the two log-likelihoods entering the response ratio.

    Returns
    -------
    tuple of float
        (numerator, denominator) = (<d^2 ln p(y_tau|x_0,y_0)/dx_0^2>, <d^2 ln p(x_0|y_0)/dx_0^2>)
        = (-g^2 / var_full, -1 / var_x).
    """
    c = linear_conditionals(model, tau)
    return -c['g'] ** 2 / c['var_full'], -1.0 / c['var_x']
