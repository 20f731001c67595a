"""Linear Ornstein-Uhlenbeck model definitions: d(xi)/dt = -A xi + eta, <eta eta'> = Q delta."""

from dataclasses import dataclass, field

import numpy as np

from .errors import StabilityError


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Interaction matrix A and noise covariance Q of a linear OU process.

    Parameters
    ----------
    A : array-like
        n x n interaction matrix (1/time). All eigenvalues need positive real part.
    Q : array-like
        n x n noise covariance (variance/time), symmetric PSD.
    x_index : int
        Index of the perturbed (driver) variable.
    y_index : int or None
        Index of the response variable. None only for one-dimensional models.
    name : str
    """

    A: np.ndarray
    Q: np.ndarray
    x_index: int = 0
    y_index: int | None = 1
    name: str = 'linear'
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'Q', Q)

        n = A.shape[0]
        if A.shape != (n, n) or Q.shape != (n, n):
            raise ValueError(f"A and Q must be square and of equal size, got {A.shape} and {Q.shape}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(Q))):
            raise ValueError("A and Q must have finite entries")
        if not np.allclose(Q, Q.T, rtol=1e-12, atol=1e-14):
            raise ValueError("noise covariance Q must be symmetric")
        q_eig = np.linalg.eigvalsh(Q)
        if q_eig.min() < -1e-12 * max(np.trace(Q), 1e-300):
            raise ValueError(f"noise covariance Q must be positive semidefinite (min eigenvalue {q_eig.min():.3g})")

        real_parts = np.linalg.eigvals(A).real
        if np.any(real_parts <= 0):
            raise StabilityError(
                f"interaction matrix is not stable: eigenvalue real parts {np.round(real_parts, 6).tolist()}")

        if not 0 <= self.x_index < n:
            raise ValueError(f"x_index {self.x_index} out of range for n={n}")
        if self.y_index is not None:
            if not 0 <= self.y_index < n:
                raise ValueError(f"y_index {self.y_index} out of range for n={n}")
            if self.y_index == self.x_index:
                raise ValueError("x_index and y_index must differ")

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def z_indices(self):
        """Confounder indices: everything except x and y."""
        used = {self.x_index, self.y_index}
        return [i for i in range(self.n) if i not in used]

    @property
    def timescales(self):
        """Relaxation times 1/Re(lambda) of the interaction matrix, slowest first."""
        return tuple(sorted(1.0 / np.linalg.eigvals(self.A).real, reverse=True))

    def require_pair(self):
        """Raise if the model has no response variable."""
        if self.y_index is None:
            raise ValueError(f"model '{self.name}' has no response variable (y_index is None)")


def ou_1d(a=0.1, q=0.1):
    """One-dimensional OU process dx/dt = -a x + eta."""
    return LinearModel(A=[[a]], Q=[[q]], x_index=0, y_index=None, name='ou1',
                       params={'a': a, 'q': q})


def ou_hierarchical(t_R=10.0, q=0.1, alpha=0.5, beta=0.2, q_y=0.0):
    """Hierarchical 2D OU: dx/dt = -x/t_R + eta, dy/dt = alpha x - beta y.

    q_y adds independent noise on y; with alpha = 0 it must be positive,
    otherwise y relaxes to a deterministic zero.
    """
    A = [[1.0 / t_R, 0.0], [-alpha, beta]]
    Q = [[q, 0.0], [0.0, q_y]]
    return LinearModel(A=A, Q=Q, x_index=0, y_index=1, name='ou2',
                       params={'t_R': t_R, 'q': q, 'alpha': alpha, 'beta': beta, 'q_y': q_y})


def random_stable_model(rng, n):
    """Random stable model with positive definite noise, used for identity sweeps.

    Parameters
    ----------
    rng : numpy.random.Generator
    n : int
        Dimension (>= 2). Variables 2..n-1 act as confounders.

    Returns
    -------
    LinearModel
    """
    if n < 2:
        raise ValueError(f"random models need n >= 2, got {n}")
    M = rng.normal(size=(n, n)) / np.sqrt(n)
    shift = max(0.0, -np.linalg.eigvals(M).real.min()) + rng.uniform(0.2, 1.0)
    A = M + shift * np.eye(n)
    L = rng.normal(size=(n, n)) / np.sqrt(n)
    Q = L @ L.T + 0.1 * np.eye(n)
    Q = 0.5 * (Q + Q.T)
    return LinearModel(A=A, Q=Q, x_index=0, y_index=1, name=f'random{n}')
