"""Euler-Maruyama / exact-OU integration with block-seeded noise streams."""

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
import pandas as pd

from .calc_lyapunov import matexp, solve_lyapunov
from .errors import SimulationDivergenceError

CHECK_EVERY = 100
METHODS = ('euler', 'exact')
PERTURBATION_KINDS = ('shift_x', 'general_h')

# Stream keys keep stationary, conditional, twin and propagated draws independent
STREAM_STATIONARY = (0,)
STREAM_CONDITIONAL = (1,)
STREAM_TWIN = (2,)
STREAM_PROPAGATE = (3,)


@dataclass(frozen=True)
class SimConfig:
    """Integration settings.

    Parameters
    ----------
    dt : float
        Time step.
    burn_in : float or None
        Burn-in time before t = 0 for stationary runs; None means 10x the slowest timescale.
    seed : int
    n_trajectories : int
    tau_record : tuple of float
        Lags recorded after t = 0.
    method : str
        'euler' or 'exact' (exact OU propagators, linear models only).
    block_size : int
        Trajectories per noise stream block.
    n_workers : int
        Threads used across blocks.
    """

    dt: float = 0.01
    burn_in: float | None = None
    seed: int = 0
    n_trajectories: int = 10_000
    tau_record: tuple = (3.0,)
    method: str = 'euler'
    block_size: int = 4096
    n_workers: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.burn_in is not None and self.burn_in < 0:
            raise ValueError(f"burn_in must be >= 0, got {self.burn_in}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed}")
        if self.n_trajectories < 1:
            raise ValueError(f"n_trajectories must be >= 1, got {self.n_trajectories}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got '{self.method}'")
        if self.block_size < 1 or self.n_workers < 1:
            raise ValueError("block_size and n_workers must be >= 1")
        lags = tuple(sorted({float(t) for t in np.atleast_1d(self.tau_record)}))
        if any(not np.isfinite(t) or t < 0 for t in lags):
            raise ValueError(f"record lags must be finite and >= 0, got {lags}")
        object.__setattr__(self, 'seed', int(self.seed))
        object.__setattr__(self, 'n_trajectories', int(self.n_trajectories))
        object.__setattr__(self, 'tau_record', lags)


@dataclass(frozen=True)
class PerturbationSpec:
    """Perturbation applied at t = 0: a shift of one coordinate or a reweighting profile h."""

    kind: str = 'shift_x'
    eps: float = 0.0
    target: int = 0
    profile: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in PERTURBATION_KINDS:
            raise ValueError(f"perturbation kind must be one of {PERTURBATION_KINDS}, got '{self.kind}'")
        if not np.isfinite(self.eps):
            raise ValueError(f"eps must be finite, got {self.eps}")
        if self.kind == 'general_h' and self.profile is None:
            raise ValueError("general_h perturbation needs a profile")

    def to_dict(self):
        return {'kind': self.kind, 'eps': float(self.eps), 'target': int(self.target)}


@dataclass(eq=False)
class Ensemble:
    """Simulated records: samples[i, l] is the state of trajectory i at lags[l]."""

    samples: np.ndarray
    lags: np.ndarray
    provenance: dict

    def __post_init__(self):
        if self.samples.shape[1] != len(self.lags):
            raise ValueError("samples and lags disagree")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("ensemble has non-finite entries")

    @property
    def n_trajectories(self):
        return self.samples.shape[0]

    def state(self, tau=0.0):
        """States at lag tau, shape (N, n)."""
        hits = np.flatnonzero(np.abs(self.lags - tau) < 1e-9)
        if hits.size == 0:
            raise ValueError(f"lag {tau} not recorded; available {self.lags.tolist()}")
        return self.samples[:, hits[0]]

    def component(self, index, tau=0.0):
        return self.state(tau)[:, index]

    def to_frame(self):
        """One row per trajectory: initial coordinates, then y (or x) at each recorded lag."""
        x_index = self.provenance.get('x_index', 0)
        y_index = self.provenance.get('y_index')
        n = self.samples.shape[2]
        names = {x_index: 'x'}
        if y_index is not None:
            names[y_index] = 'y'
        cols = {}
        for i in range(n):
            cols[f"{names.get(i, f'z{i}')}0"] = self.samples[:, 0, i]
        out = y_index if y_index is not None else x_index
        for l, lag in enumerate(self.lags):
            if lag > 0:
                cols[f"{names[out]}_tau={lag:g}"] = self.samples[:, l, out]
        return pd.DataFrame(cols)


def check_step(model, cfg):
    """Warn when dt exceeds 5% of the fastest relaxation time."""
    if model.timescales and cfg.method == 'euler':
        fastest = min(model.timescales)
        if cfg.dt > 0.05 * fastest:
            warnings.warn(f"dt={cfg.dt} exceeds 0.05 x fastest timescale ({fastest:.4g})")


def resolve_burn_in(model, cfg):
    if cfg.burn_in is not None:
        return cfg.burn_in
    return 10.0 * max(model.timescales) if model.timescales else 0.0


def _factor(C, n):
    """Column factor L with L L^T = C restricted to the nonzero spectrum."""
    w, V = np.linalg.eigh(0.5 * (C + C.T))
    keep = w > 1e-14 * max(w.max(), 0.0) if w.max() > 0 else np.zeros(n, dtype=bool)
    return V[:, keep] * np.sqrt(w[keep])


def _lag_steps(lags, dt):
    steps = np.rint(np.asarray(lags) / dt).astype(int)
    bad = np.abs(steps * dt - np.asarray(lags)) > 1e-6 * dt
    if np.any(bad):
        raise ValueError(f"lags {np.asarray(lags)[bad].tolist()} are not multiples of dt={dt}")
    return steps


def _check_finite(state, offset, step):
    bad = ~np.all(np.isfinite(state), axis=-1)
    if np.any(bad):
        _, i = np.argwhere(bad)[0]
        raise SimulationDivergenceError(offset + int(i), step)


def _euler_block(model, starts, lags, cfg, burn_steps, rng, offset):
    state = starts.copy()
    V, N, n = state.shape
    L = _factor(model.noise_cov, n)
    targets = burn_steps + np.concatenate([[0], _lag_steps(lags, cfg.dt)]).astype(int)
    total = int(targets[-1])
    records = np.empty((V, N, len(targets), n))
    sqrt_dt = np.sqrt(cfg.dt)

    r = 0
    with np.errstate(over='ignore', invalid='ignore'):
        for step in range(total + 1):
            while r < len(targets) and targets[r] == step:
                records[:, :, r] = state
                r += 1
            if step == total:
                break
            noise = rng.standard_normal((N, L.shape[1])) @ L.T * sqrt_dt if L.shape[1] else 0.0
            for v in range(V):
                state[v] += model.drift(state[v]) * cfg.dt + noise
            if (step + 1) % CHECK_EVERY == 0:
                _check_finite(state, offset, step + 1)
    _check_finite(state, offset, total)
    return records


def _exact_block(model, starts, lags, rng, stationary, sigma):
    lin = model.require_linear()
    V, N, n = starts.shape
    state = starts.copy()
    if stationary:
        L0 = _factor(sigma, n)
        draw = rng.standard_normal((N, L0.shape[1])) @ L0.T if L0.shape[1] else np.zeros((N, n))
        state[:] = draw
    times = np.concatenate([[0.0], lags])
    records = np.empty((V, N, len(times), n))
    records[:, :, 0] = state
    for l in range(1, len(times)):
        delta = times[l] - times[l - 1]
        if delta > 0:
            E = matexp(-lin.A * delta)
            Ls = _factor(sigma - E @ sigma @ E.T, n)
            noise = rng.standard_normal((N, Ls.shape[1])) @ Ls.T if Ls.shape[1] else 0.0
            for v in range(V):
                state[v] = state[v] @ E.T + noise
        records[:, :, l] = state
    return records


def _integrate(model, cfg, starts, stream, stationary):
    """Run all blocks; starts has shape (V, N, n) and variants share noise per trajectory."""
    check_step(model, cfg)
    V, N, n = starts.shape
    lags = np.asarray(cfg.tau_record, dtype=float)
    burn_steps = 0
    if stationary and cfg.method == 'euler':
        burn_steps = int(np.ceil(resolve_burn_in(model, cfg) / cfg.dt))
    sigma = solve_lyapunov(model.linear) if cfg.method == 'exact' else None

    bounds = [(b, lo, min(lo + cfg.block_size, N)) for b, lo in enumerate(range(0, N, cfg.block_size))]

    def work(block):
        b, lo, hi = block
        rng = np.random.default_rng([cfg.seed, *stream, b])
        if cfg.method == 'exact':
            return _exact_block(model, starts[:, lo:hi], lags, rng, stationary, sigma)
        return _euler_block(model, starts[:, lo:hi], lags, cfg, burn_steps, rng, lo)

    if cfg.n_workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_workers) as pool:
            results = list(pool.map(work, bounds))
    else:
        results = [work(b) for b in bounds]
    return np.concatenate(results, axis=1), np.concatenate([[0.0], lags])


def _provenance(model, cfg, stream, perturbation=None):
    return {
        'model': model.name,
        'params': dict(model.params),
        'x_index': model.x_index,
        'y_index': model.y_index,
        'config': asdict(cfg),
        'stream': list(stream),
        'perturbation': perturbation.to_dict() if perturbation is not None else None,
    }


def _as_starts(model, condition, n_trajectories):
    condition = np.asarray(condition, dtype=float)
    if condition.ndim == 1:
        if condition.shape[0] != model.n:
            raise ValueError(f"condition has {condition.shape[0]} entries, model has n={model.n}")
        return np.tile(condition, (n_trajectories, 1))
    if condition.shape[1] != model.n:
        raise ValueError(f"condition rows have {condition.shape[1]} entries, model has n={model.n}")
    return condition.copy()


def simulate_stationary(model, cfg, stream=STREAM_STATIONARY):
    """Stationary ensemble: burn-in from the origin (or exact stationary draws), then record lags.

    Parameters
    ----------
    model : SdeModel
    cfg : SimConfig
    stream : tuple of int
        Noise stream key.

    Returns
    -------
    Ensemble
    """
    starts = np.zeros((1, cfg.n_trajectories, model.n))
    samples, lags = _integrate(model, cfg, starts, stream, stationary=True)
    return Ensemble(samples[0], lags, _provenance(model, cfg, stream))


def propagate_states(model, cfg, variants, stream=STREAM_PROPAGATE, perturbations=None):
    """Integrate one or more sets of initial states with shared noise per trajectory index.

    Parameters
    ----------
    variants : list of (N, n) arrays
    perturbations : list of PerturbationSpec or None, optional

    Returns
    -------
    list of Ensemble
    """
    starts = np.stack([np.asarray(v, dtype=float) for v in variants])
    samples, lags = _integrate(model, cfg, starts, stream, stationary=False)
    perturbations = perturbations or [None] * len(variants)
    return [Ensemble(samples[v], lags, _provenance(model, cfg, stream, perturbations[v]))
            for v in range(len(variants))]


def simulate_conditional(model, cfg, condition, stream=STREAM_CONDITIONAL):
    """All trajectories start at the given state (or per-trajectory states, shape (N, n))."""
    starts = _as_starts(model, condition, cfg.n_trajectories)
    return propagate_states(model, cfg, [starts], stream=stream)[0]


def simulate_twin(model, cfg, condition, eps, target=None, stream=STREAM_TWIN):
    """Natural and perturbed ensembles driven by identical noise (common random numbers).

    Returns
    -------
    tuple of Ensemble
        (natural, perturbed), paired by trajectory index.
    """
    target = model.x_index if target is None else target
    natural = _as_starts(model, condition, cfg.n_trajectories)
    perturbed = natural.copy()
    perturbed[:, target] += eps
    spec = PerturbationSpec('shift_x', eps, target)
    nat, pert = propagate_states(model, cfg, [natural, perturbed], stream=stream,
                                 perturbations=[None, spec])
    return nat, pert
