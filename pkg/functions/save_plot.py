"""Save figure as SVG (and optionally PNG) with sequential numbering."""

import os
import matplotlib.pyplot as plt


def save_plot(fig, name, plot_number, output_dir, formats=('svg',)):
    """Save figure as <plot_number>_<name>.<fmt> for each format.

    Parameters
    ----------
    fig : matplotlib.figure.Figure
    name : str
        Plot identifier (e.g. 'weighted_local_te').
    plot_number : int
    output_dir : str
    formats : tuple of str
        Any of 'svg', 'png'.

    Returns
    -------
    int
        Next plot number (plot_number + 1).
    """
    os.makedirs(output_dir, exist_ok=True)
    filename = f"{plot_number}_{name}"
    for fmt in formats:
        path = os.path.join(output_dir, f"{filename}.{fmt}")
        if fmt == 'svg':
            fig.savefig(path, format='svg', facecolor='white', metadata={'Date': None})
        else:
            fig.savefig(path, format=fmt, facecolor='white')
        print(path)
    plt.close(fig)
    return plot_number + 1
