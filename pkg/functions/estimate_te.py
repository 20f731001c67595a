"""Transfer entropy estimators: Granger log-variance ratio and k-NN conditional mutual information."""

import warnings

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma

from .errors import EstimatorError
from .estimate_kl import KlEstimate, jackknife_groups, jackknife_stderr

MIN_GRANGER_SAMPLES = 1000


def _columns(*arrays):
    cols = []
    for a in arrays:
        if a is None:
            continue
        a = np.asarray(a, dtype=float)
        cols.append(a[:, None] if a.ndim == 1 else a)
    return np.hstack(cols) if cols else None


def _rss(X, y):
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    return float(resid @ resid)


def granger_te(x0, y0, y_tau, z0=None, n_blocks=20, seed=0):
    """Transfer entropy from nested least-squares regressions of y_tau.

    T = 1/2 ln(RSS_reduced / RSS_full), where the full design holds
    (1, x_0, y_0, z_0) and the reduced one drops x_0. Exact for
    linear-Gaussian data only.

    Returns
    -------
    KlEstimate
        estimator 'granger', metadata['linear_only'] = True.
    """
    yt = np.asarray(y_tau, dtype=float)
    n = yt.shape[0]
    if n < MIN_GRANGER_SAMPLES:
        raise ValueError(f"granger_te needs >= {MIN_GRANGER_SAMPLES} samples, got {n}")
    ones = np.ones(n)
    full = _columns(ones, x0, y0, z0)
    reduced = _columns(ones, y0, z0)
    if full.shape[0] != n:
        raise ValueError("x0, y0, z0 and y_tau must have equal length")
    if np.linalg.matrix_rank(full) < full.shape[1]:
        raise EstimatorError("rank-deficient design matrix")

    def te(mask):
        return 0.5 * np.log(_rss(reduced[mask], yt[mask]) / _rss(full[mask], yt[mask]))

    value = te(np.ones(n, dtype=bool))
    groups = jackknife_groups(n, n_blocks, seed)
    stderr = jackknife_stderr([te(groups != g) for g in range(n_blocks)])
    return KlEstimate(float(value), stderr, 'granger', n, n, None, metadata={'linear_only': True})


def _standardize(a):
    a = np.asarray(a, dtype=float)
    a = a[:, None] if a.ndim == 1 else a
    std = a.std(axis=0)
    if np.any(std <= 0):
        raise EstimatorError("zero spread in a conditional mutual information argument")
    return (a - a.mean(axis=0)) / std


def _neighbour_counts(arr, radius):
    """Points strictly within radius (max-norm), excluding the point itself."""
    return cKDTree(arr).query_ball_point(arr, radius, p=np.inf, return_length=True) - 1


def knn_cmi(x, y, z=None, k=5, n_blocks=20, seed=0):
    """KSG-type estimate of I(x; y | z) (or I(x; y) when z is None), in nats.

    Uses the max-norm k-th neighbour distance in the joint space and neighbour
    counts in the marginal subspaces. The standard error comes from group means
    of the per-point terms.

    Returns
    -------
    KlEstimate
        estimator 'ksg'.
    """
    X = _standardize(x)
    Y = _standardize(y)
    Z = _standardize(z) if z is not None else None
    n = X.shape[0]
    if Y.shape[0] != n or (Z is not None and Z.shape[0] != n):
        raise ValueError("x, y and z must have equal length")
    if n < k + 2:
        raise ValueError(f"need more than k+1 samples, got {n}")

    joint = np.hstack([X, Y] + ([Z] if Z is not None else []))
    eps = cKDTree(joint).query(joint, k=[k + 1], p=np.inf)[0][:, 0]
    if np.any(eps == 0):
        frac = np.mean(eps == 0)
        if frac > 0.01:
            raise EstimatorError(f"{100 * frac:.2f}% of points have zero neighbour distance")
        warnings.warn("duplicate points in conditional mutual information input; adding jitter")
        rng = np.random.default_rng([seed, 13])
        joint = joint + 1e-12 * rng.standard_normal(joint.shape)
        eps = cKDTree(joint).query(joint, k=[k + 1], p=np.inf)[0][:, 0]
        dx, dy = X.shape[1], Y.shape[1]
        X, Y = joint[:, :dx], joint[:, dx:dx + dy]
        Z = joint[:, dx + dy:] if Z is not None else None
    radius = np.nextafter(eps, 0)

    if Z is None:
        n_x = _neighbour_counts(X, radius)
        n_y = _neighbour_counts(Y, radius)
        terms = digamma(k) + digamma(n) - digamma(n_x + 1) - digamma(n_y + 1)
    else:
        n_xz = _neighbour_counts(np.hstack([X, Z]), radius)
        n_yz = _neighbour_counts(np.hstack([Y, Z]), radius)
        n_z = _neighbour_counts(Z, radius)
        terms = digamma(k) + digamma(n_z + 1) - digamma(n_xz + 1) - digamma(n_yz + 1)

    groups = jackknife_groups(n, n_blocks, seed)
    block_means = np.array([terms[groups == g].mean() for g in range(n_blocks)])
    stderr = float(block_means.std(ddof=1) / np.sqrt(n_blocks))
    return KlEstimate(float(terms.mean()), stderr, 'ksg', n, n, k,
                      metadata={'conditional': Z is not None})
