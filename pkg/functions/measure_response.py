"""Empirical information response from epsilon ladders of k-NN divergences."""

import warnings
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from .calc_gaussian import GaussianDist, condition
from .calc_linear_measures import (GAMMA, GAMMA_ENSEMBLE, GAMMA_GENERALIZED, MUTUAL_INFO_YY, TRANSFER_ENTROPY,
                                   MeasureResult)
from .calc_lyapunov import solve_lyapunov
from .errors import DegeneracyError, ProtocolError
from .estimate_density import kernel_regression
from .estimate_kl import jackknife_groups, jackknife_stderr, kl_knn
from .estimate_te import granger_te, knn_cmi
from .measure_divergences import ensemble_response_divergence, perturbation_divergence
from .simulate_sde import simulate_conditional, simulate_stationary

N_TE_SAMPLES = 50_000
N_Y0_STRATA = 50
CENTERING_Z = 4.0
LADDER_COLUMNS = ['epsilon', 'd_mean', 'd_stderr', 'c', 'c_stderr']


@dataclass(frozen=True)
class EpsilonProtocol:
    """Perturbation ladder and extrapolation settings.

    factors scale the conditional spread sigma_{x0|y0}; an explicit epsilons
    tuple overrides them.
    """

    factors: tuple = (0.1, 0.15, 0.25, 0.4)
    epsilons: tuple | None = None
    fit_order: int = 2
    max_chi2: float = 25.0

    def __post_init__(self):
        values = self.epsilons if self.epsilons is not None else self.factors
        values = tuple(float(v) for v in values)
        if len(values) < 3:
            raise ValueError(f"epsilon ladder needs >= 3 values, got {len(values)}")
        if any(not v > 0 for v in values):
            raise ValueError(f"epsilon ladder values must be positive, got {values}")
        if self.fit_order != 2:
            raise ValueError(f"only quadratic extrapolation is supported, got fit_order={self.fit_order}")
        if self.epsilons is not None:
            object.__setattr__(self, 'epsilons', values)
        else:
            object.__setattr__(self, 'factors', values)

    def ladder(self, scale):
        if self.epsilons is not None:
            return np.asarray(self.epsilons)
        return np.asarray(self.factors) * scale


@dataclass(frozen=True)
class MeasureSettings:
    """Sample sizes for the Monte-Carlo measures."""

    n_conditions: int = 64
    n_conditional: int = 10_000
    n_stationary: int = 200_000
    k: int = 5
    n_blocks: int = 20
    n_score_samples: int = 20_000

    def __post_init__(self):
        for name in ('n_conditions', 'n_conditional', 'n_stationary', 'k', 'n_score_samples'):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.n_conditions < 2:
            raise ValueError("n_conditions must be >= 2 for a standard error")


def conditional_std(states, model):
    """Residual std of x_0 regressed on the other coordinates (sigma_{x0|y0,z0})."""
    states = np.asarray(states, dtype=float)
    others = [i for i in range(states.shape[1]) if i != model.x_index]
    X = np.column_stack([np.ones(states.shape[0])] + [states[:, i] for i in others])
    x = states[:, model.x_index]
    beta, *_ = np.linalg.lstsq(X, x, rcond=None)
    return float(np.std(x - X @ beta, ddof=X.shape[1]))


def stratified_conditions(states, index, n_conditions):
    """Stationary states at the midpoint ranks of n_conditions quantile strata of one coordinate."""
    order = np.argsort(states[:, index], kind='stable')
    ranks = ((np.arange(n_conditions) + 0.5) / n_conditions * states.shape[0]).astype(int)
    return states[order[ranks]]


def fit_quadratic(eps, values, stderr=None, max_chi2=25.0):
    """Fit values = a eps^2 through the origin, with a diagnostic eps + eps^2 fit.

    Weighted by 1/stderr^2 when all stderr are positive. The error on a is
    inflated by sqrt(reduced chi2) when that exceeds 1.

    Raises
    ------
    ProtocolError
        Reduced chi2 above max_chi2: the ladder has left the quadratic regime.
    """
    e = np.asarray(eps, dtype=float)
    v = np.asarray(values, dtype=float)
    weighted = stderr is not None and np.all(np.asarray(stderr) > 0)
    w = 1.0 / np.asarray(stderr, dtype=float) ** 2 if weighted else np.ones_like(e)

    s4 = np.sum(w * e ** 4)
    a = np.sum(w * e ** 2 * v) / s4
    dof = max(len(e) - 1, 1)
    resid = v - a * e ** 2
    chi2_red = float(np.sum(w * resid ** 2) / dof)
    if weighted:
        if chi2_red > max_chi2:
            raise ProtocolError(f"epsilon ladder is not quadratic (reduced chi2 {chi2_red:.1f}); "
                                "use smaller epsilon values")
        a_se = np.sqrt(1.0 / s4) * np.sqrt(max(chi2_red, 1.0))
    else:
        a_se = np.sqrt(chi2_red / s4)

    sw = np.sqrt(w)
    X = np.column_stack([e, e ** 2])
    coef, *_ = np.linalg.lstsq(X * sw[:, None], v * sw, rcond=None)
    cov = np.linalg.pinv((X * w[:, None]).T @ X)
    if not weighted:
        r = v - X @ coef
        cov = cov * np.sum(r ** 2) / max(len(e) - 2, 1)
    return {
        'a': float(a),
        'a_stderr': float(a_se),
        'chi2_red': chi2_red,
        'linear_coef': float(coef[0]),
        'linear_coef_stderr': float(np.sqrt(max(cov[0, 0], 0.0))),
        'quadratic_coef': float(coef[1]),
    }


def _ratio(fit_d, fit_c):
    a_d, a_c = fit_d['a'], fit_c['a']
    if a_c <= 0:
        raise DegeneracyError(f"perturbation divergence curvature {a_c:.3g} is not positive")
    value = a_d / a_c
    stderr = np.sqrt((fit_d['a_stderr'] / a_c) ** 2 + (a_d * fit_c['a_stderr'] / a_c ** 2) ** 2)
    return float(value), float(stderr)


def _stationary(model, tau, cfg, settings, stationary):
    if stationary is not None:
        return stationary
    return simulate_stationary(model, replace(cfg, n_trajectories=settings.n_stationary, tau_record=(tau,)))


def _check_tau(tau, label):
    if tau == 0:
        raise DegeneracyError(f"{label} is undefined at tau = 0")


def _perturbation_ladder(model, eps, states, settings, seed):
    return [perturbation_divergence(model, e, states=states, k=settings.k,
                                    n_blocks=settings.n_blocks, seed=seed) for e in eps]


def information_response_empirical(model, tau, protocol, cfg, settings, stationary=None):
    """Gamma(tau) = lim <D[p(y_tau|x0+eps,y0) || p(y_tau|x0,y0)]> / c_x(eps).

    Conditions are stationary states stratified by x_0 quantiles. Each one gets a
    natural ensemble and one perturbed ensemble per epsilon; the averaged
    divergence ladder and the perturbation divergence ladder are each fitted with
    a eps^2 and their curvatures divided.

    Returns
    -------
    MeasureResult
        metadata['ladder'] holds epsilon, d_mean, d_stderr, c, c_stderr.
    """
    if tau < 0:
        return MeasureResult(GAMMA, 0.0, tau, 'empirical', metadata={'time_arrow': True})
    _check_tau(tau, "information response")
    y = model.y_index
    stationary = _stationary(model, tau, cfg, settings, stationary)
    states = stationary.state(0)
    eps = protocol.ladder(conditional_std(states, model))
    conditions = stratified_conditions(states, model.x_index, settings.n_conditions)

    cond_cfg = replace(cfg, n_trajectories=settings.n_conditional, tau_record=(tau,))
    d = np.empty((len(conditions), len(eps)))
    for c, start in enumerate(conditions):
        natural = simulate_conditional(model, cond_cfg, start, stream=(1, c, 0)).component(y, tau)
        for j, e in enumerate(eps):
            shifted = start.copy()
            shifted[model.x_index] += e
            perturbed = simulate_conditional(model, cond_cfg, shifted, stream=(1, c, j + 1)).component(y, tau)
            d[c, j] = kl_knn(perturbed, natural, k=settings.k, n_blocks=0, seed=cfg.seed).value

    d_mean = d.mean(axis=0)
    d_se = d.std(axis=0, ddof=1) / np.sqrt(len(conditions))
    c_est = _perturbation_ladder(model, eps, states, settings, cfg.seed)
    c_val = np.array([r.value for r in c_est])
    c_se = np.array([r.stderr for r in c_est])

    fit_d = fit_quadratic(eps, d_mean, d_se, protocol.max_chi2)
    fit_c = fit_quadratic(eps, c_val, c_se, protocol.max_chi2)
    value, stderr = _ratio(fit_d, fit_c)
    ladder = pd.DataFrame({'epsilon': eps, 'd_mean': d_mean, 'd_stderr': d_se, 'c': c_val, 'c_stderr': c_se},
                          columns=LADDER_COLUMNS)
    return MeasureResult(GAMMA, value, tau, 'empirical', stderr, metadata={
        'ladder': ladder.to_dict(orient='list'),
        'fit_d': fit_d,
        'fit_c': fit_c,
        'n_conditions': len(conditions),
        'estimator': 'knn_k',
        'k': settings.k,
    })


def ensemble_information_response_empirical(model, tau, protocol, cfg, settings, stationary=None):
    """Gamma_ensemble(tau) from ensemble response divergences D[p(y_tau|x0 => x0+eps) || p(y_tau)]."""
    if tau < 0:
        return MeasureResult(GAMMA_ENSEMBLE, 0.0, tau, 'empirical', metadata={'time_arrow': True})
    _check_tau(tau, "ensemble information response")
    stationary = _stationary(model, tau, cfg, settings, stationary)
    states = stationary.state(0)
    eps = protocol.ladder(conditional_std(states, model))

    d_est = [ensemble_response_divergence(model, e, tau, cfg, stationary=stationary, k=settings.k,
                                          n_blocks=settings.n_blocks, stream=(3, j))
             for j, e in enumerate(eps)]
    c_est = _perturbation_ladder(model, eps, states, settings, cfg.seed)
    d_val = np.array([r.value for r in d_est])
    d_se = np.array([r.stderr for r in d_est])
    c_val = np.array([r.value for r in c_est])
    c_se = np.array([r.stderr for r in c_est])

    fit_d = fit_quadratic(eps, d_val, d_se, protocol.max_chi2)
    fit_c = fit_quadratic(eps, c_val, c_se, protocol.max_chi2)
    value, stderr = _ratio(fit_d, fit_c)
    ladder = pd.DataFrame({'epsilon': eps, 'd_mean': d_val, 'd_stderr': d_se, 'c': c_val, 'c_stderr': c_se},
                          columns=LADDER_COLUMNS)
    return MeasureResult(GAMMA_ENSEMBLE, value, tau, 'empirical', stderr, metadata={
        'ladder': ladder.to_dict(orient='list'),
        'fit_d': fit_d,
        'fit_c': fit_c,
        'estimator': 'knn_k',
        'k': settings.k,
    })


def linear_shift_profile(model):
    """h(state) = (x - <x | y, z>) / var_{x|y,z}, the profile a plain x-shift induces."""
    lin = model.require_linear() if hasattr(model, 'require_linear') else model
    lin.require_pair()
    sigma = solve_lyapunov(lin)
    x = lin.x_index
    given = [i for i in range(lin.n) if i != x]
    spec = condition(GaussianDist(np.zeros(lin.n), sigma), [x], given)
    var = float(spec.R[0, 0])

    def h(states):
        states = np.atleast_2d(np.asarray(states, dtype=float))
        return (states[:, x] - spec.mean(states[:, given])[:, 0]) / var

    return h


def _cross_fitted_power(yt, hv, n_grid):
    """<<h|y_tau>^2> from two independent regression halves, free of the noise floor."""
    lo, hi = np.percentile(yt, [0.1, 99.9])
    grid = np.linspace(lo, hi, n_grid)
    half = len(yt) // 2
    fits = []
    for part in (slice(0, half), slice(half, 2 * half)):
        values, extrapolated = kernel_regression(yt[part], hv[part], grid)
        ok = ~extrapolated & np.isfinite(values)
        if ok.sum() < 2:
            raise DegeneracyError("conditional mean of h could not be estimated on the y_tau grid")
        fits.append(np.interp(yt, grid[ok], values[ok]))
    return float(np.mean(fits[0] * fits[1]))


def _stratum_means(y0, hv, n_strata):
    """Per-record mean of h within its y_0 quantile stratum, and the largest stratum |z| score."""
    edges = np.quantile(y0, np.linspace(0.0, 1.0, n_strata + 1)[1:-1])
    labels = np.searchsorted(edges, y0, side='right')
    counts = np.bincount(labels, minlength=n_strata)
    sums = np.bincount(labels, weights=hv, minlength=n_strata)
    sq = np.bincount(labels, weights=hv ** 2, minlength=n_strata)
    means = sums / np.maximum(counts, 1)
    var = np.maximum(sq / np.maximum(counts, 1) - means ** 2, 0.0)
    filled = counts > 1
    se = np.sqrt(var[filled] / counts[filled])
    with np.errstate(divide='ignore', invalid='ignore'):
        z = np.nan_to_num(np.abs(means[filled]) / se, nan=0.0, posinf=np.inf)
    return means[labels], float(z.max(initial=0.0))


def generalized_response(model, h, tau, cfg, settings, stationary=None, n_grid=512):
    """Gamma_ensemble[h](tau) = <<h | y_tau>^2> / <h^2> for a perturbation profile h.

    Parameters
    ----------
    h : callable
        Maps (N, n) states to N profile values.

    Returns
    -------
    MeasureResult
        kind GammaGeneralized; metadata['recentered'] flags a profile whose mean
        given y0 was removed stratum by stratum.
    """
    if tau < 0:
        return MeasureResult(GAMMA_GENERALIZED, 0.0, tau, 'empirical', metadata={'time_arrow': True})
    _check_tau(tau, "generalized response")
    stationary = _stationary(model, tau, cfg, settings, stationary)
    states = stationary.state(0)
    yt = stationary.component(model.y_index, tau)
    hv = np.asarray(h(states), dtype=float).ravel()
    if hv.shape != yt.shape:
        raise ValueError(f"profile returned shape {hv.shape}, expected {yt.shape}")

    mean, sd = hv.mean(), hv.std(ddof=1)
    if not sd > 1e-12 * max(abs(mean), 1.0):
        raise DegeneracyError("perturbation profile h is constant over the stationary ensemble")
    # <h | y_0> = 0 at every condition, checked on y_0 quantile strata
    n_strata = max(2, min(N_Y0_STRATA, len(hv) // 200))
    local_mean, z_max = _stratum_means(states[:, model.y_index], hv, n_strata)
    recentered = z_max > CENTERING_Z
    if recentered:
        warnings.warn(f"profile mean given y0 departs from 0 by {z_max:.1f} stderr in some stratum; "
                      f"subtracting the mean of each of {n_strata} y0 strata")
        hv = hv - local_mean
        if not hv.std(ddof=1) > 1e-12 * sd:
            raise DegeneracyError("perturbation profile h depends on y0 alone")

    def estimate(mask):
        return _cross_fitted_power(yt[mask], hv[mask], n_grid) / np.mean(hv[mask] ** 2)

    value = estimate(np.ones(len(hv), dtype=bool))
    groups = jackknife_groups(len(hv), settings.n_blocks, cfg.seed)
    stderr = jackknife_stderr([estimate(groups != g) for g in range(settings.n_blocks)])
    return MeasureResult(GAMMA_GENERALIZED, value, tau, 'empirical', stderr,
                         metadata={'recentered': bool(recentered), 'h_mean': float(mean),
                                   'max_stratum_z': z_max, 'n_strata': n_strata})


def _te_inputs(model, tau, stationary, n_samples):
    states = stationary.state(0)[:n_samples]
    yt = stationary.component(model.y_index, tau)[:n_samples]
    others = [i for i in range(states.shape[1]) if i != model.x_index]
    return states, yt, others


def transfer_entropy_empirical(model, tau, stationary, settings, seed=0, estimator='ksg', n_samples=N_TE_SAMPLES):
    """T(tau) from stationary records: k-NN conditional MI ('ksg') or nested regressions ('granger').

    Conditions on y_0 and every confounder. Exactly 0 for tau < 0.
    """
    if tau < 0:
        return MeasureResult(TRANSFER_ENTROPY, 0.0, tau, 'empirical', metadata={'time_arrow': True})
    _check_tau(tau, "transfer entropy")
    states, yt, others = _te_inputs(model, tau, stationary, n_samples)
    x0 = states[:, model.x_index]
    if estimator == 'granger':
        z = [i for i in others if i != model.y_index]
        est = granger_te(x0, states[:, model.y_index], yt, z0=states[:, z] if z else None,
                         n_blocks=settings.n_blocks, seed=seed)
    elif estimator == 'ksg':
        est = knn_cmi(x0, yt, states[:, others], k=settings.k, n_blocks=settings.n_blocks, seed=seed)
    else:
        raise ValueError(f"unknown transfer entropy estimator '{estimator}'; use 'ksg' or 'granger'")
    return MeasureResult(TRANSFER_ENTROPY, est.value, tau, 'empirical', est.stderr,
                         metadata={'estimator': est.estimator, 'n_samples': est.n_p, **est.metadata})


def self_information_empirical(model, tau, stationary, settings, seed=0, n_samples=N_TE_SAMPLES):
    """I(y_tau; y_0, z_0) with the k-NN mutual information estimator."""
    if tau < 0:
        raise ValueError(f"self-information needs tau > 0, got {tau}")
    _check_tau(tau, "self-information")
    states, yt, others = _te_inputs(model, tau, stationary, n_samples)
    est = knn_cmi(yt, states[:, others], k=settings.k, n_blocks=settings.n_blocks, seed=seed)
    return MeasureResult(MUTUAL_INFO_YY, est.value, tau, 'empirical', est.stderr,
                         metadata={'estimator': est.estimator, 'n_samples': est.n_p})
