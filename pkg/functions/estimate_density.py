"""Gaussian product-kernel density, score and Nadaraya-Watson regression with Silverman bandwidths."""

from dataclasses import dataclass

import numpy as np

from .errors import EstimatorError

MAX_BLOCK = 4_000_000   # eval points x samples per chunk


@dataclass(eq=False)
class SampleSet:
    """d-dimensional sample records with optional nonnegative weights."""

    points: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ValueError(f"sample points must be 1D or 2D, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("sample points must be finite")
        self.points = pts
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (pts.shape[0],) or np.any(w < 0) or not np.all(np.isfinite(w)):
                raise ValueError("weights must be finite, nonnegative and one per point")
            self.weights = w

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def normalized_weights(self):
        if self.weights is None:
            return np.full(self.n, 1.0 / self.n)
        total = self.weights.sum()
        if total <= 0:
            raise ValueError("weights sum to zero")
        return self.weights / total


def as_sample_set(samples):
    return samples if isinstance(samples, SampleSet) else SampleSet(samples)


def _as_eval(points, dim):
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, None] if dim == 1 else P[None, :]
    if P.shape[1] != dim:
        raise ValueError(f"eval points have dimension {P.shape[1]}, samples have {dim}")
    return P


def bw_silverman(x):
    """Per-dimension Silverman bandwidth 0.9 min(std, IQR/1.34) n^(-1/5)."""
    X = as_sample_set(x).points
    std = X.std(axis=0, ddof=1)
    q75, q25 = np.percentile(X, [75, 25], axis=0)
    spread = np.minimum(std, (q75 - q25) / 1.34)
    spread = np.where(spread > 0, spread, std)
    if np.any(std <= 0):
        raise EstimatorError(f"zero variance in dimension(s) {np.flatnonzero(std <= 0).tolist()}")
    return 0.9 * spread * X.shape[0] ** (-0.2)


def _kernel_sums(s, P, bw, values=None, grad_dim=None):
    """Chunked sums of Gaussian kernel weights (and optional weighted responses / gradients)."""
    X = s.points
    w = s.normalized_weights()
    step = max(1, MAX_BLOCK // X.shape[0])
    dens = np.empty(P.shape[0])
    num = np.empty(P.shape[0]) if (values is not None or grad_dim is not None) else None
    for lo in range(0, P.shape[0], step):
        hi = min(lo + step, P.shape[0])
        u = (P[lo:hi, None, :] - X[None, :, :]) / bw
        K = np.exp(-0.5 * np.sum(u ** 2, axis=-1)) * w
        dens[lo:hi] = K.sum(axis=1)
        if values is not None:
            num[lo:hi] = K @ values
        elif grad_dim is not None:
            num[lo:hi] = -(K * u[:, :, grad_dim]).sum(axis=1) / bw[grad_dim]
    return dens, num


def kde_density(samples, points, bandwidth=None):
    """Gaussian product-kernel density estimate at the eval points.

    Parameters
    ----------
    samples : SampleSet or array-like
        At least 30 points.
    points : array-like
        Eval points, shape (M, d) (or (M,) for d = 1).
    bandwidth : float or array-like, optional
        Per-dimension bandwidth; Silverman's rule if omitted.

    Returns
    -------
    numpy.ndarray
        Density values (>= 0).
    """
    s = as_sample_set(samples)
    if s.n < 30:
        raise ValueError(f"kde_density needs >= 30 samples, got {s.n}")
    bw = bw_silverman(s) if bandwidth is None else np.broadcast_to(np.asarray(bandwidth, float), (s.dim,))
    P = _as_eval(points, s.dim)
    dens, _ = _kernel_sums(s, P, bw)
    return dens / (np.prod(bw) * (2.0 * np.pi) ** (s.dim / 2.0))


def kde_score(samples, points, dim, bandwidth=None):
    """d/d(w_dim) ln p_hat at the eval points."""
    s = as_sample_set(samples)
    if s.n < 30:
        raise ValueError(f"kde_score needs >= 30 samples, got {s.n}")
    bw = bw_silverman(s) if bandwidth is None else np.broadcast_to(np.asarray(bandwidth, float), (s.dim,))
    P = _as_eval(points, s.dim)
    dens, grad = _kernel_sums(s, P, bw, grad_dim=dim)
    if np.any(dens <= 0):
        raise EstimatorError(f"score undefined at {int(np.sum(dens <= 0))} eval points beyond the sample support")
    return grad / dens


def kernel_regression(x, response, points, bandwidth=None):
    """Nadaraya-Watson estimate of <response | x> at the eval points.

    Returns
    -------
    tuple of numpy.ndarray
        (values, extrapolated) where extrapolated flags eval points with fewer
        than one effective sample within a bandwidth; their values are NaN when
        no sample contributes at all.
    """
    s = as_sample_set(x)
    if s.n < 100:
        raise ValueError(f"kernel_regression needs >= 100 samples, got {s.n}")
    r = np.asarray(response, dtype=float)
    if r.shape != (s.n,):
        raise ValueError(f"response has shape {r.shape}, expected ({s.n},)")
    bw = bw_silverman(s) if bandwidth is None else np.broadcast_to(np.asarray(bandwidth, float), (s.dim,))
    P = _as_eval(points, s.dim)
    dens, num = _kernel_sums(s, P, bw, values=r)

    effective = dens / s.normalized_weights().max()
    extrapolated = effective < 1.0
    with np.errstate(invalid='ignore', divide='ignore'):
        values = np.where(dens > 0, num / dens, np.nan)
    return values, extrapolated
