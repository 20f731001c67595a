"""Monte-Carlo response and perturbation divergences estimated with k-NN KL."""

from dataclasses import replace

import numpy as np

from .errors import DegeneracyError
from .estimate_kl import KlEstimate, kl_knn
from .simulate_sde import propagate_states, simulate_conditional, simulate_stationary


def _zero(k):
    return KlEstimate(0.0, 0.0, 'knn_k', 0, 0, k, metadata={'time_arrow': True})


def _response_index(model):
    if model.y_index is None:
        raise ValueError(f"model '{model.name}' has no response variable")
    return model.y_index


def local_response_divergence(model, condition, eps, tau, cfg, k=5, n_blocks=20):
    """D[p(y_tau | x_0 + eps, y_0) || p(y_tau | x_0, y_0)] from two conditional ensembles.

    The two ensembles use independent noise streams. Exactly 0 for tau < 0.
    """
    if tau < 0:
        return _zero(k)
    if tau == 0:
        raise DegeneracyError("local response divergence is undefined at tau = 0")
    y = _response_index(model)
    run_cfg = replace(cfg, tau_record=(tau,))
    natural = np.asarray(condition, dtype=float)
    perturbed = natural.copy()
    perturbed[model.x_index] += eps

    nat = simulate_conditional(model, run_cfg, natural, stream=(1, 0))
    pert = simulate_conditional(model, run_cfg, perturbed, stream=(1, 1))
    return kl_knn(pert.component(y, tau), nat.component(y, tau), k=k, n_blocks=n_blocks, seed=cfg.seed)


def _halves(n):
    half = n // 2
    if half < 2:
        raise ValueError(f"need at least 4 stationary samples, got {n}")
    return slice(0, half), slice(half, 2 * half)


def perturbation_divergence(model, eps, cfg=None, states=None, k=5, n_blocks=20, seed=0):
    """c_x(eps) = D[p(x_0 - eps, y_0) || p(x_0, y_0)].

    The stationary sample is split in halves: the first half shifted by +eps in x
    against the untouched second half.

    Parameters
    ----------
    model : SdeModel
    eps : float
    cfg : SimConfig, optional
        Used to simulate stationary states when none are given.
    states : numpy.ndarray, optional
        Stationary states, shape (N, n).
    """
    if states is None:
        if cfg is None:
            raise ValueError("perturbation_divergence needs either cfg or states")
        states = simulate_stationary(model, replace(cfg, tau_record=())).state(0)
        seed = cfg.seed
    states = np.asarray(states, dtype=float)
    first, second = _halves(states.shape[0])
    shifted = states[first].copy()
    shifted[:, model.x_index] += eps
    return kl_knn(shifted, states[second], k=k, n_blocks=n_blocks, seed=seed)


def ensemble_response_divergence(model, eps, tau, cfg, stationary=None, k=5, n_blocks=20, stream=(3, 0)):
    """D[p(y_tau | x_0 => x_0 + eps) || p(y_tau)] with independent halves of a stationary ensemble.

    The first half is restarted from its t = 0 states shifted by eps; the second
    half supplies the natural y_tau. Exactly 0 for tau < 0.
    """
    if tau < 0:
        return _zero(k)
    if tau == 0:
        raise DegeneracyError("ensemble response divergence is undefined at tau = 0")
    y = _response_index(model)
    run_cfg = replace(cfg, tau_record=(tau,))
    if stationary is None:
        stationary = simulate_stationary(model, run_cfg)

    states = stationary.state(0)
    first, second = _halves(states.shape[0])
    start = states[first].copy()
    start[:, model.x_index] += eps
    pert = propagate_states(model, run_cfg, [start], stream=stream)[0]
    natural = stationary.component(y, tau)[second]
    return kl_knn(pert.component(y, tau), natural, k=k, n_blocks=n_blocks, seed=cfg.seed)
