"""Local transfer entropy and local information response tabulated on an (x_0, y_0) grid."""

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import ndimage
from scipy.integrate import trapezoid
from scipy.stats import multivariate_normal

from .calc_conditionals import linear_conditionals
from .calc_linear_measures import transfer_entropy_from_variances
from .calc_lyapunov import solve_lyapunov

QUANTITIES = ('local_gamma', 'local_te', 'density', 'weighted_local_te', 'weighted_local_gamma',
              'local_response', 'weighted_local_response')


@dataclass(eq=False)
class LocalGrid:
    """Values of a local quantity on an (x_0, y_0) grid; values[j, i] sits at (x0[i], y0[j])."""

    x0: np.ndarray
    y0: np.ndarray
    values: np.ndarray
    quantity: str

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float)
        self.y0 = np.asarray(self.y0, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.quantity not in QUANTITIES:
            raise ValueError(f"unknown grid quantity '{self.quantity}'")
        if self.values.shape != (len(self.y0), len(self.x0)):
            raise ValueError(f"values shape {self.values.shape} does not match grid "
                             f"({len(self.y0)}, {len(self.x0)})")
        for name, axis in (('x0', self.x0), ('y0', self.y0)):
            if len(axis) > 1 and np.any(np.diff(axis) <= 0):
                raise ValueError(f"{name} grid must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"{self.quantity} grid has non-finite values")
        if self.quantity == 'density' and np.any(self.values < 0):
            raise ValueError("density grid has negative values")

    def to_frame(self):
        """Long format with columns x0, y0, value."""
        X, Y = np.meshgrid(self.x0, self.y0, indexing='xy')
        return pd.DataFrame({'x0': X.ravel(), 'y0': Y.ravel(), 'value': self.values.ravel()})

    def row(self, y_value):
        """Slice along x_0 at the grid row closest to y_value."""
        j = int(np.argmin(np.abs(self.y0 - y_value)))
        return self.y0[j], self.values[j]


def _require_plane(model):
    model.require_pair()
    if model.n != 2:
        raise ValueError(f"local grids are defined for two-variable models, got n={model.n}")


def default_grid(model, n_points=201, width=4.0, sigma=None):
    """Grid spanning +/- width marginal standard deviations of x and y."""
    _require_plane(model)
    if sigma is None:
        sigma = solve_lyapunov(model)
    sx = np.sqrt(sigma[model.x_index, model.x_index])
    sy = np.sqrt(sigma[model.y_index, model.y_index])
    return np.linspace(-width * sx, width * sx, n_points), np.linspace(-width * sy, width * sy, n_points)


def stationary_density_grid(model, x_grid, y_grid, sigma=None):
    """Stationary density p(x_0, y_0) on the grid."""
    _require_plane(model)
    if sigma is None:
        sigma = solve_lyapunov(model)
    idx = [model.x_index, model.y_index]
    X, Y = np.meshgrid(x_grid, y_grid, indexing='xy')
    pdf = multivariate_normal(mean=np.zeros(2), cov=sigma[np.ix_(idx, idx)]).pdf(np.dstack([X, Y]))
    return LocalGrid(x_grid, y_grid, np.reshape(pdf, X.shape), 'density')


def local_te_values(model, tau, x0, y0):
    """Local transfer entropy t(x_0, y_0) = D[p(y_tau|x_0,y_0) || p(y_tau|y_0)].

    t = T + g^2 / (2 var_reduced) * ((x_0 - <x_0|y_0>)^2 - var_x)
    """
    _require_plane(model)
    c = linear_conditionals(model, tau)
    te = transfer_entropy_from_variances(c['var_reduced'], c['var_full'])
    x_mean = c['x_given'].mean(np.asarray(y0, dtype=float)[..., None])[..., 0]
    dev = (np.asarray(x0, dtype=float) - x_mean) ** 2 - c['var_x']
    return te + c['g'] ** 2 / (2.0 * c['var_reduced']) * dev


def local_te_minimum(te):
    """Minimum over x_0 of the local transfer entropy: (exp(-2T) + 2T - 1) / 2."""
    return 0.5 * (np.exp(-2.0 * te) + 2.0 * te - 1.0)


def local_te_grid(model, tau, x_grid=None, y_grid=None, weighted=False):
    """Local transfer entropy on a grid, optionally multiplied by p(x_0, y_0)."""
    if x_grid is None or y_grid is None:
        x_grid, y_grid = default_grid(model)
    X, Y = np.meshgrid(x_grid, y_grid, indexing='xy')
    values = local_te_values(model, tau, X, Y)
    if weighted:
        values = values * stationary_density_grid(model, x_grid, y_grid).values
        return LocalGrid(x_grid, y_grid, values, 'weighted_local_te')
    return LocalGrid(x_grid, y_grid, values, 'local_te')


def local_gamma_grid(model, tau, x_grid=None, y_grid=None, weighted=False):
    """Local information response on a grid; constant and equal to Gamma for linear models."""
    if x_grid is None or y_grid is None:
        x_grid, y_grid = default_grid(model)
    c = linear_conditionals(model, tau)
    gamma = c['g'] ** 2 * c['var_x'] / c['var_full']
    values = np.full((len(y_grid), len(x_grid)), gamma)
    if weighted:
        values = values * stationary_density_grid(model, x_grid, y_grid).values
        return LocalGrid(x_grid, y_grid, values, 'weighted_local_gamma')
    return LocalGrid(x_grid, y_grid, values, 'local_gamma')


def integrate_grid(grid):
    """Trapezoid integral of the grid values over x_0 then y_0."""
    return float(trapezoid(trapezoid(grid.values, grid.x0, axis=1), grid.y0))


def count_local_maxima(values, smooth=1.0, rel_floor=1e-3):
    """Count local maxima of a 1D or 2D array after Gaussian smoothing.

    Maxima below rel_floor * max are ignored; plateaus count once.

    Parameters
    ----------
    values : array-like
    smooth : float
        Gaussian filter width in grid cells (0 disables smoothing).
    rel_floor : float

    Returns
    -------
    int
    """
    values = np.asarray(values, dtype=float)
    if smooth > 0:
        values = ndimage.gaussian_filter(values, sigma=smooth, mode='nearest')
    peak = values.max()
    if peak <= 0:
        return 0
    is_max = (values == ndimage.maximum_filter(values, size=3, mode='nearest')) & (values > rel_floor * peak)
    _, n_peaks = ndimage.label(is_max)
    return int(n_peaks)
