"""Stationary covariance, matrix exponential and lagged joint law of a linear OU model."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, solve_continuous_lyapunov

from .calc_gaussian import GaussianDist
from .errors import NumericalError

KRONECKER_MAX_N = 20


def solve_lyapunov(model):
    """Solve A Sigma + Sigma A^T = Q for the stationary covariance.

    Uses the vectorized Kronecker system for n <= 20 and scipy's
    Bartels-Stewart solver above that.

    Parameters
    ----------
    model : LinearModel

    Returns
    -------
    numpy.ndarray
        Symmetric PSD n x n matrix.
    """
    A, Q = model.A, model.Q
    n = model.n

    if n <= KRONECKER_MAX_N:
        eye = np.eye(n)
        K = np.kron(eye, A) + np.kron(A, eye)
        try:
            vec = np.linalg.solve(K, Q.flatten(order='F'))
        except np.linalg.LinAlgError as e:
            raise NumericalError(
                f"Lyapunov system is singular (condition number {np.linalg.cond(K):.3g}): {e}") from e
        sigma = vec.reshape((n, n), order='F')
    else:
        sigma = solve_continuous_lyapunov(A, Q)

    sigma = 0.5 * (sigma + sigma.T)

    residual = np.linalg.norm(A @ sigma + sigma @ A.T - Q)
    scale = max(np.linalg.norm(Q), np.finfo(float).tiny)
    if residual > 1e-10 * scale:
        cond = np.linalg.cond(np.kron(np.eye(n), A) + np.kron(A, np.eye(n))) if n <= KRONECKER_MAX_N else np.nan
        raise NumericalError(
            f"Lyapunov residual {residual / scale:.3g} exceeds 1e-10 (condition number {cond:.3g})")

    min_eig = np.linalg.eigvalsh(sigma).min()
    if min_eig < -1e-10 * max(np.trace(sigma), np.finfo(float).tiny):
        raise NumericalError(f"stationary covariance is not PSD (min eigenvalue {min_eig:.3g})")

    return sigma


def matexp(M):
    """Matrix exponential (scipy Pade scaling-and-squaring)."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"matexp needs a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matexp needs finite entries")
    return expm(M)


@dataclass(frozen=True, eq=False)
class LaggedJoint:
    """Joint Gaussian of the stacked vector (xi_0, xi_tau)."""

    tau: float
    joint: GaussianDist
    n: int

    def index_at_zero(self, i):
        return i

    def index_at_tau(self, i):
        return self.n + i

    @property
    def stationary(self):
        return self.joint.cov[:self.n, :self.n]

    @property
    def cross(self):
        """Cov(xi_tau, xi_0)."""
        return self.joint.cov[self.n:, :self.n]


def lagged_joint(model, tau, sigma=None):
    """Build the joint law of (xi_0, xi_tau) under stationarity.

    Parameters
    ----------
    model : LinearModel
    tau : float
        Lag (>= 0).
    sigma : numpy.ndarray, optional
        Precomputed stationary covariance.

    Returns
    -------
    LaggedJoint
    """
    if tau < 0:
        raise ValueError(f"lagged_joint needs tau >= 0, got {tau}")
    if sigma is None:
        sigma = solve_lyapunov(model)
    n = model.n

    cross = matexp(-model.A * tau) @ sigma
    cov = np.block([[sigma, cross.T], [cross, sigma]])
    cov = 0.5 * (cov + cov.T)
    return LaggedJoint(tau=float(tau), joint=GaussianDist(np.zeros(2 * n), cov), n=n)
