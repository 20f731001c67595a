"""k-nearest-neighbour KL divergence estimator with delete-group jackknife errors."""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import EstimatorError
from .estimate_density import as_sample_set

MAX_DUPLICATE_FRAC = 0.01
JITTER = 1e-12


@dataclass
class KlEstimate:
    """Divergence estimate in nats; raw value, not clamped at zero."""

    value: float
    stderr: float
    estimator: str
    n_p: int
    n_q: int
    k: int | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.stderr < 0 or not np.isfinite(self.stderr):
            raise ValueError(f"stderr must be finite and >= 0, got {self.stderr}")

    def to_record(self):
        return {
            'value': float(self.value),
            'stderr': float(self.stderr),
            'estimator': self.estimator,
            'n_p': int(self.n_p),
            'n_q': int(self.n_q),
            'k': self.k,
            'metadata': self.metadata,
        }


def jackknife_groups(n, n_blocks, seed):
    """Seeded assignment of n records to n_blocks groups."""
    rng = np.random.default_rng([seed, 9])
    return rng.permutation(n) % n_blocks


def jackknife_stderr(estimates):
    """Delete-group jackknife standard error from leave-one-group-out estimates."""
    estimates = np.asarray(estimates, dtype=float)
    G = len(estimates)
    return float(np.sqrt((G - 1) / G * np.sum((estimates - estimates.mean()) ** 2)))


def _knn_terms(P, Q, k):
    rho = cKDTree(P).query(P, k=[k + 1])[0][:, 0]
    nu = cKDTree(Q).query(P, k=[k])[0][:, 0]
    return rho, nu


def _kl_value(P, Q, k):
    rho, nu = _knn_terms(P, Q, k)
    n, d = P.shape
    m = Q.shape[0]
    terms = d * np.log(nu / rho)
    return terms.mean() + np.log(m / (n - 1)), terms


def whiten(P, Q):
    """Map both sets through the pooled mean and the inverse Cholesky factor of the pooled covariance."""
    pooled = np.vstack([P, Q])
    std = pooled.std(axis=0)
    if np.any(std <= 0):
        raise EstimatorError(f"degenerate samples: zero spread in dimension(s) {np.flatnonzero(std <= 0).tolist()}")
    center = pooled.mean(axis=0)
    # correlation matrix keeps the factorization well scaled
    corr = np.atleast_2d(np.cov(pooled / std, rowvar=False, bias=True))
    try:
        L = np.linalg.cholesky(corr)
    except np.linalg.LinAlgError as e:
        raise EstimatorError("degenerate samples: pooled covariance is singular") from e
    W = np.linalg.inv(L).T / std[:, None]
    return (P - center) @ W, (Q - center) @ W


def kl_knn(p_samples, q_samples, k=5, n_blocks=20, seed=0, standardize=True):
    """Estimate D[p || q] from samples of p and q with k-NN distance ratios.

    D = d <ln(nu_k / rho_k)> + ln(m / (n - 1)), with rho_k the k-th neighbour
    distance within the p samples and nu_k the k-th neighbour distance to the q samples.

    The divergence is invariant under invertible affine maps; with standardize
    the estimate is too, up to rounding. When p is much wider than q the
    tail points of p see q only through distant neighbours and the estimate
    is biased low: about 0.045 nats below 1 - ln 2 for doubled variance in
    two dimensions at n = m = 20 000, k = 5. The bias shrinks with n and with
    smaller k, and is negligible for the small shifts of response ladders.

    Parameters
    ----------
    p_samples, q_samples : SampleSet or array-like
        Same dimension, at least k + 1 points each.
    k : int
    n_blocks : int
        Jackknife groups; 0 uses the per-term standard error instead.
    seed : int
        Seeds jackknife grouping and duplicate jitter.
    standardize : bool
        Whiten both sets with the pooled mean and covariance.

    Returns
    -------
    KlEstimate
    """
    P = as_sample_set(p_samples).points
    Q = as_sample_set(q_samples).points
    if P.shape[1] != Q.shape[1]:
        raise ValueError(f"dimension mismatch: {P.shape[1]} vs {Q.shape[1]}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if P.shape[0] < k + 1 or Q.shape[0] < k + 1:
        raise ValueError(f"need at least k+1={k + 1} points per set, got {P.shape[0]} and {Q.shape[0]}")

    if standardize:
        P, Q = whiten(P, Q)

    rho, nu = _knn_terms(P, Q, k)
    zero = (rho == 0) | (nu == 0)
    jittered = False
    if np.any(zero):
        frac = zero.mean()
        if frac > MAX_DUPLICATE_FRAC:
            raise EstimatorError(f"{100 * frac:.2f}% of points have zero neighbour distance")
        warnings.warn(f"{int(zero.sum())} duplicate points; adding {JITTER:g}-scale jitter")
        rng = np.random.default_rng([seed, 11])
        P = P + JITTER * rng.standard_normal(P.shape)
        Q = Q + JITTER * rng.standard_normal(Q.shape)
        jittered = True

    value, terms = _kl_value(P, Q, k)

    if n_blocks and n_blocks > 1:
        gp = jackknife_groups(P.shape[0], n_blocks, seed)
        gq = jackknife_groups(Q.shape[0], n_blocks, seed + 1)
        loo = [_kl_value(P[gp != g], Q[gq != g], k)[0] for g in range(n_blocks)]
        stderr = jackknife_stderr(loo)
    else:
        stderr = float(terms.std(ddof=1) / np.sqrt(len(terms)))

    return KlEstimate(float(value), stderr, 'knn_k', P.shape[0], Q.shape[0], k,
                      metadata={'jittered': jittered, 'standardized': bool(standardize)})
