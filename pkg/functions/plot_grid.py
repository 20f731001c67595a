"""Heatmap of a local quantity on the (x_0, y_0) grid with optional density contours."""

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt

from . import plot_style as S

TITLES = {
    'local_gamma': 'Local information response',
    'weighted_local_gamma': 'Weighted local information response',
    'local_te': 'Local transfer entropy',
    'weighted_local_te': 'Weighted local transfer entropy',
    'local_response': 'Local response divergence / eps^2',
    'weighted_local_response': 'Weighted local response divergence / eps^2',
    'density': 'Stationary density',
}


def plot_grid(grid, density=None, title=None):
    """Render a LocalGrid as a heatmap; returns the figure (saved by save_plot)."""
    fig = plt.figure(figsize=(S.FIG_WIDTH, S.FIG_TALL_GRID))
    ax = fig.add_subplot(111)

    mesh = ax.pcolormesh(grid.x0, grid.y0, grid.values, cmap=S.GRID_CMAP, shading='nearest')
    cbar = fig.colorbar(mesh, ax=ax)
    cbar.ax.tick_params(labelsize=S.FONT_SIZE_TICKS)

    if density is not None:
        ax.contour(density.x0, density.y0, density.values, levels=S.DENSITY_CONTOUR_LEVELS,
                   colors=S.DENSITY_CONTOUR_COLOR, linewidths=S.DENSITY_CONTOUR_LW)

    ax.set_xlabel('x0', fontsize=S.FONT_SIZE_AXES)
    ax.set_ylabel('y0', fontsize=S.FONT_SIZE_AXES)
    ax.set_title(title or TITLES.get(grid.quantity, grid.quantity),
                 fontsize=S.FONT_SIZE_TITLE, fontweight=S.FONT_WEIGHT_TITLE)
    S.style_axes(ax)
    fig.tight_layout()
    return fig
