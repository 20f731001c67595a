"""Mean response to an x-shift and the fluctuation-response check against the stationary correlation."""

from dataclasses import replace

import numpy as np

from .calc_gaussian import GaussianDist, gaussian_score
from .calc_lyapunov import solve_lyapunov
from .estimate_density import kde_score
from .measure_divergences import ensemble_response_divergence
from .measure_response import conditional_std, fit_quadratic
from .simulate_sde import propagate_states, simulate_stationary


def mean_response(model, eps, tau, cfg, states, stream=(2, 0)):
    """<y_tau>_perturbed - <y_tau> from twin trajectories started at states and states + eps e_x.

    Returns
    -------
    dict
        eps, mean, stderr.
    """
    states = np.asarray(states, dtype=float)
    shifted = states.copy()
    shifted[:, model.x_index] += eps
    nat, pert = propagate_states(model, replace(cfg, tau_record=(tau,)), [states, shifted], stream=stream)
    diff = pert.component(model.y_index, tau) - nat.component(model.y_index, tau)
    return {'eps': float(eps), 'mean': float(diff.mean()),
            'stderr': float(diff.std(ddof=1) / np.sqrt(len(diff)))}


def _score_x(model, states, settings):
    if model.is_linear:
        sigma = solve_lyapunov(model.linear)
        score = gaussian_score(GaussianDist(np.zeros(model.n), sigma), states)
        return score[:, model.x_index], 'gaussian'
    sub = states[:settings.n_score_samples]
    return kde_score(sub, sub, model.x_index), 'kde'


def classical_frt_check(model, tau, protocol, cfg, settings, stationary=None):
    """Compare the small-eps mean response slope with -<y_tau d ln p / dx_0>.

    Also checks the bound D[p(y_tau|x0 => x0+eps) || p(y_tau)] >= Delta^2 / (2 var y)
    for every epsilon of the ladder, allowing three combined standard errors.

    Returns
    -------
    dict
        slope, correlation (each with stderr), relative_discrepancy,
        score_method, responses, bound rows and bound_holds.
    """
    if tau <= 0:
        raise ValueError(f"fluctuation-response check needs tau > 0, got {tau}")
    y = model.y_index
    if stationary is None:
        stationary = simulate_stationary(model, replace(cfg, n_trajectories=settings.n_stationary,
                                                        tau_record=(tau,)))
    states = stationary.state(0)
    yt = stationary.component(y, tau)
    eps = protocol.ladder(conditional_std(states, model))
    half = states.shape[0] // 2

    responses = [mean_response(model, e, tau, cfg, states[:half], stream=(2, j)) for j, e in enumerate(eps)]
    fit = fit_quadratic(eps, [r['mean'] for r in responses], [r['stderr'] for r in responses],
                        max_chi2=np.inf)
    slope, slope_se = fit['linear_coef'], fit['linear_coef_stderr']

    score, method = _score_x(model, states, settings)
    prod = yt[:len(score)] * score
    correlation = -float(prod.mean())
    correlation_se = float(prod.std(ddof=1) / np.sqrt(len(prod)))
    discrepancy = abs(slope - correlation) / max(abs(correlation), np.finfo(float).tiny)

    var_y = float(yt.var(ddof=1))
    rows = []
    for j, (e, r) in enumerate(zip(eps, responses)):
        div = ensemble_response_divergence(model, e, tau, cfg, stationary=stationary, k=settings.k,
                                           n_blocks=settings.n_blocks, stream=(3, j))
        bound = r['mean'] ** 2 / (2.0 * var_y)
        slack = 3.0 * np.sqrt(div.stderr ** 2 + (abs(r['mean']) * r['stderr'] / var_y) ** 2)
        rows.append({
            'epsilon': float(e),
            'divergence': div.value,
            'divergence_stderr': div.stderr,
            'bound': float(bound),
            'response_limit': float(np.sqrt(2.0 * var_y * max(div.value, 0.0))),
            'holds': bool(div.value >= bound - slack),
        })

    return {
        'tau': float(tau),
        'slope': float(slope),
        'slope_stderr': float(slope_se),
        'correlation': correlation,
        'correlation_stderr': correlation_se,
        'relative_discrepancy': float(discrepancy),
        'score_method': method,
        'responses': responses,
        'bound': rows,
        'bound_holds': all(r['holds'] for r in rows),
    }
