"""Closed-form causation measures for linear OU models."""

import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .calc_conditionals import linear_conditionals
from .calc_lyapunov import solve_lyapunov

GAMMA = 'Gamma'
GAMMA_ENSEMBLE = 'GammaEnsemble'
GAMMA_GENERALIZED = 'GammaGeneralized'
TRANSFER_ENTROPY = 'TransferEntropy'
MUTUAL_INFO_YY = 'MutualInfo_yy'
MUTUAL_INFO_XY_Y = 'MutualInfo_xy_y'
PERTURBATION_DIVERGENCE = 'PerturbationDivergence'
RESPONSE_DIVERGENCE = 'ResponseDivergence'


@dataclass
class MeasureResult:
    """Scalar causation measure with its estimator metadata."""

    kind: str
    value: float
    tau: float
    method: str = 'analytic'
    stderr: float = 0.0
    metadata: dict = field(default_factory=dict)

    def to_record(self):
        return {
            'kind': self.kind,
            'value': float(self.value),
            'tau': float(self.tau),
            'method': self.method,
            'stderr': float(self.stderr),
            'metadata': self.metadata,
        }


def _echo(model):
    return {'model': model.name, **{k: float(v) for k, v in model.params.items()}}


def transfer_entropy_from_variances(var_reduced, var_full):
    """T = 1/2 ln(var_reduced / var_full)."""
    return 0.5 * np.log(var_reduced / var_full)


def transfer_entropy(model, tau):
    """Transfer entropy x -> y at lag tau; exactly 0 for tau < 0."""
    if tau < 0:
        return MeasureResult(TRANSFER_ENTROPY, 0.0, tau, metadata=_echo(model))
    c = linear_conditionals(model, tau)
    value = transfer_entropy_from_variances(c['var_reduced'], c['var_full'])
    return MeasureResult(TRANSFER_ENTROPY, max(float(value), 0.0), tau, metadata=_echo(model))


def information_response(model, tau):
    """Gamma = g^2 var_x / var_full; exactly 0 for tau < 0."""
    if tau < 0:
        return MeasureResult(GAMMA, 0.0, tau, metadata=_echo(model))
    c = linear_conditionals(model, tau)
    value = c['g'] ** 2 * c['var_x'] / c['var_full']
    return MeasureResult(GAMMA, float(value), tau, metadata=_echo(model))


def mutual_information_yy(model, tau):
    """I(y_tau; y_0, z_0) = 1/2 ln(var_y / var_reduced)."""
    c = linear_conditionals(model, tau)
    value = 0.5 * np.log(c['var_y'] / c['var_reduced'])
    return MeasureResult(MUTUAL_INFO_YY, max(float(value), 0.0), tau, metadata=_echo(model))


def mutual_information_xy_y(model, tau):
    """I(y_tau; x_0, y_0, z_0) = 1/2 ln(var_y / var_full)."""
    c = linear_conditionals(model, tau)
    value = 0.5 * np.log(c['var_y'] / c['var_full'])
    return MeasureResult(MUTUAL_INFO_XY_Y, max(float(value), 0.0), tau, metadata=_echo(model))


def variance_identity_residual(model, tau):
    """var_reduced - var_full - var_x g^2, zero up to round-off for linear models."""
    c = linear_conditionals(model, tau)
    return c['var_reduced'] - c['var_full'] - c['var_x'] * c['g'] ** 2


def ensemble_information_response(model, tau):
    """Gamma_ensemble = exp(-2 I_yy) (1 - exp(-2 T)), bounded to [0, 1]."""
    if tau <= 0:
        raise ValueError(f"ensemble information response needs tau > 0, got {tau}")
    c = linear_conditionals(model, tau)
    te = transfer_entropy_from_variances(c['var_reduced'], c['var_full'])
    i_yy = 0.5 * np.log(c['var_y'] / c['var_reduced'])
    value = np.exp(-2.0 * i_yy) * (1.0 - np.exp(-2.0 * te))
    return MeasureResult(GAMMA_ENSEMBLE, float(value), tau,
                         metadata={**_echo(model), 'T': float(te), 'I_yy': float(i_yy)})


def analytic_table(model, taus):
    """Gamma, T, Gamma_ensemble and both mutual informations over a tau list.

    Negative lags follow the time arrow (response measures 0, informations NaN);
    tau = 0 is singular and reported as NaN.

    Returns
    -------
    pandas.DataFrame
        Columns: tau, Gamma, T, GammaEnsemble, I_yy, I_xy_y.
    """
    model.require_pair()
    sigma = solve_lyapunov(model)
    rows = []
    for tau in taus:
        tau = float(tau)
        if tau < 0:
            rows.append({'tau': tau, 'Gamma': 0.0, 'T': 0.0, 'GammaEnsemble': 0.0,
                         'I_yy': np.nan, 'I_xy_y': np.nan})
            continue
        if tau == 0:
            warnings.warn("tau = 0 is a singular point of the conditional measures; row reported as NaN")
            rows.append({'tau': tau, 'Gamma': np.nan, 'T': np.nan, 'GammaEnsemble': np.nan,
                         'I_yy': np.nan, 'I_xy_y': np.nan})
            continue

        c = linear_conditionals(model, tau, sigma=sigma)
        te = transfer_entropy_from_variances(c['var_reduced'], c['var_full'])
        i_yy = 0.5 * np.log(c['var_y'] / c['var_reduced'])
        rows.append({
            'tau': tau,
            'Gamma': c['g'] ** 2 * c['var_x'] / c['var_full'],
            'T': te,
            'GammaEnsemble': np.exp(-2.0 * i_yy) * (1.0 - np.exp(-2.0 * te)),
            'I_yy': i_yy,
            'I_xy_y': 0.5 * np.log(c['var_y'] / c['var_full']),
        })
    return pd.DataFrame(rows, columns=['tau', 'Gamma', 'T', 'GammaEnsemble', 'I_yy', 'I_xy_y'])
