"""Registry of stochastic models with additive noise: drift(state) and constant noise covariance."""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .linear_model import LinearModel, ou_1d, ou_hierarchical


@dataclass(frozen=True, eq=False)
class SdeModel:
    """d(state) = drift(state) dt + noise with covariance noise_cov * dt.

    drift maps an (N, n) array of states to an (N, n) array.
    """

    name: str
    n: int
    drift: Callable
    noise_cov: np.ndarray
    linear: LinearModel | None = None
    x_index: int = 0
    y_index: int | None = 1
    timescales: tuple = ()
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.noise_cov, dtype=float))
        object.__setattr__(self, 'noise_cov', Q)
        if Q.shape != (self.n, self.n):
            raise ValueError(f"noise covariance shape {Q.shape} does not match n={self.n}")
        if not np.allclose(Q, Q.T):
            raise ValueError("noise covariance must be symmetric")
        if np.linalg.eigvalsh(Q).min() < -1e-12 * max(np.trace(Q), 1e-300):
            raise ValueError("noise covariance must be positive semidefinite")

    @property
    def is_linear(self):
        return self.linear is not None

    def require_linear(self):
        if self.linear is None:
            raise ValueError(f"analytic path requires linear model, '{self.name}' is nonlinear")
        return self.linear


def linear_sde(model):
    """Wrap a LinearModel: drift = -A state."""
    A = model.A
    return SdeModel(name=model.name, n=model.n, drift=lambda s: -s @ A.T, noise_cov=model.Q,
                    linear=model, x_index=model.x_index, y_index=model.y_index,
                    timescales=model.timescales, params=dict(model.params))


def quadratic_coupling_model(t_rel=10.0, q=0.1, alpha=0.5, beta=0.2):
    """Nonlinear pair dx/dt = -x/t_rel + eta, dy/dt = alpha x^2 - beta y (x -> -x symmetric)."""
    if t_rel <= 0 or beta <= 0 or q <= 0:
        raise ValueError(f"t_rel, beta and q must be positive, got {t_rel}, {beta}, {q}")

    def drift(s):
        out = np.empty_like(s)
        out[:, 0] = -s[:, 0] / t_rel
        out[:, 1] = alpha * s[:, 0] ** 2 - beta * s[:, 1]
        return out

    return SdeModel(name='quad', n=2, drift=drift, noise_cov=[[q, 0.0], [0.0, 0.0]],
                    x_index=0, y_index=1, timescales=tuple(sorted((t_rel, 1.0 / beta), reverse=True)),
                    params={'t_rel': t_rel, 'q': q, 'alpha': alpha, 'beta': beta})


def brownian_velocity_model(m=1.0, lam=1.0, temp=1.0):
    """Velocity of an underdamped Brownian particle: m dv/dt = -lam v + xi, <xi xi'> = 2 lam T."""
    if m <= 0 or lam <= 0 or temp <= 0:
        raise ValueError(f"m, lam and temp must be positive, got {m}, {lam}, {temp}")
    lin = ou_1d(a=lam / m, q=2.0 * lam * temp / m ** 2)
    lin = LinearModel(A=lin.A, Q=lin.Q, x_index=0, y_index=None, name='brownian',
                      params={'m': m, 'lam': lam, 'temp': temp})
    return linear_sde(lin)


def inline_model(A, Q, x_index=0, y_index=1):
    """Linear model from explicit matrices."""
    return linear_sde(LinearModel(A=A, Q=Q, x_index=x_index, y_index=y_index, name='inline'))


MODEL_BUILDERS = {
    'ou1': lambda **p: linear_sde(ou_1d(**p)),
    'ou2': lambda **p: linear_sde(ou_hierarchical(**p)),
    'quad': quadratic_coupling_model,
    'brownian': brownian_velocity_model,
    'inline': inline_model,
}


def build_model(name, **params):
    """Build a registered model by name.

    Parameters
    ----------
    name : str
        One of MODEL_BUILDERS ('ou1', 'ou2', 'quad', 'brownian', 'inline').
    **params
        Builder keyword arguments; D is accepted as an alias of q.

    Returns
    -------
    SdeModel
    """
    if name not in MODEL_BUILDERS:
        raise ValueError(f"unknown model '{name}'. Supported: {list(MODEL_BUILDERS.keys())}")
    if 'D' in params:
        params['q'] = params.pop('D')
    try:
        return MODEL_BUILDERS[name](**params)
    except TypeError as e:
        raise ValueError(f"bad parameters for model '{name}': {e}") from e
