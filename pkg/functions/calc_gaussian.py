"""Gaussian distributions: conditioning, closed-form KL divergence and score."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from .errors import DegeneracyError

SINGULAR_COND = 1e12


@dataclass(frozen=True, eq=False)
class GaussianDist:
    """Multivariate normal with mean vector and symmetric PSD covariance."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        object.__setattr__(self, 'mean', mean)
        object.__setattr__(self, 'cov', cov)

        d = mean.shape[0]
        if mean.ndim != 1 or cov.shape != (d, d):
            raise ValueError(f"mean {mean.shape} and covariance {cov.shape} do not match")
        scale = max(np.abs(cov).max(), np.finfo(float).tiny)
        if np.abs(cov - cov.T).max() > 1e-12 * scale:
            raise ValueError("covariance must be symmetric")
        min_eig = np.linalg.eigvalsh(cov).min()
        if min_eig < -1e-12 * max(np.trace(cov), np.finfo(float).tiny):
            raise ValueError(f"covariance must be PSD (min eigenvalue {min_eig:.3g})")

    @property
    def dim(self):
        return self.mean.shape[0]

    def marginal(self, indices):
        idx = list(indices)
        return GaussianDist(self.mean[idx], self.cov[np.ix_(idx, idx)])


@dataclass(frozen=True, eq=False)
class ConditionalGaussianSpec:
    """p(target | given): target = mean_target + B (given - mean_given) + residual(R)."""

    target: tuple
    given: tuple
    B: np.ndarray
    R: np.ndarray
    mean_target: np.ndarray
    mean_given: np.ndarray

    def mean(self, given_values):
        """Conditional mean at given_values, shape (..., len(given))."""
        given_values = np.asarray(given_values, dtype=float)
        return self.mean_target + (given_values - self.mean_given) @ self.B.T

    def coefficient(self, index):
        """Regression coefficients of every target on the given variable `index`."""
        return self.B[:, self.given.index(index)]


def condition(joint, target, given):
    """Condition a joint Gaussian on a subset of its coordinates.

    Parameters
    ----------
    joint : GaussianDist
    target, given : sequence of int
        Disjoint index sets.

    Returns
    -------
    ConditionalGaussianSpec
        B = S_tg S_gg^-1, R = S_tt - S_tg S_gg^-1 S_gt.
    """
    target = tuple(int(i) for i in target)
    given = tuple(int(i) for i in given)
    if set(target) & set(given):
        raise ValueError(f"target {target} and given {given} overlap")
    for i in target + given:
        if not 0 <= i < joint.dim:
            raise ValueError(f"index {i} out of range for dimension {joint.dim}")

    S = joint.cov
    S_tt = S[np.ix_(target, target)]
    mu_t = joint.mean[list(target)]
    if not given:
        return ConditionalGaussianSpec(target, given, np.zeros((len(target), 0)), S_tt.copy(),
                                       mu_t, np.zeros(0))

    S_gg = S[np.ix_(given, given)]
    S_gt = S[np.ix_(given, target)]
    cond = np.linalg.cond(S_gg)
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise DegeneracyError(f"conditioning block over indices {list(given)} is singular (cond={cond:.3g})")

    B = np.linalg.solve(S_gg, S_gt).T
    R = S_tt - B @ S_gt
    R = 0.5 * (R + R.T)
    min_eig = np.linalg.eigvalsh(R).min()
    if min_eig < -1e-10 * max(np.trace(S_tt), np.finfo(float).tiny):
        raise DegeneracyError(f"residual covariance for {list(target)} is not PSD (min eigenvalue {min_eig:.3g})")

    return ConditionalGaussianSpec(target, given, B, R, mu_t, joint.mean[list(given)])


def _cholesky(cov, label):
    try:
        return cho_factor(cov, lower=True)
    except LinAlgError as e:
        raise DegeneracyError(f"{label} covariance is singular") from e


def gaussian_kl(p, q):
    """KL divergence D[p || q] in nats between two Gaussians.

    Parameters
    ----------
    p, q : GaussianDist
        Strictly positive definite covariances of equal dimension.

    Returns
    -------
    float
    """
    if p.dim != q.dim:
        raise ValueError(f"dimension mismatch: {p.dim} vs {q.dim}")
    cp = _cholesky(p.cov, 'p')
    cq = _cholesky(q.cov, 'q')

    logdet_p = 2.0 * np.sum(np.log(np.diag(cp[0])))
    logdet_q = 2.0 * np.sum(np.log(np.diag(cq[0])))
    diff = q.mean - p.mean
    trace_term = np.trace(cho_solve(cq, p.cov))
    maha = diff @ cho_solve(cq, diff)

    kl = 0.5 * (trace_term + maha - p.dim + logdet_q - logdet_p)
    return max(float(kl), 0.0)


def gaussian_score(dist, points):
    """Gradient of ln p at each point: -Sigma^-1 (w - mu), shape (N, d)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    c = _cholesky(dist.cov, 'score')
    return -cho_solve(c, (points - dist.mean).T).T
