"""Measures against the lag tau, with error bars for empirical points."""

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt

from . import plot_style as S


def plot_curves(df, columns, title, errors=None, ylabel='nats / dimensionless', x='tau'):
    """Plot df[columns] against df[x].

    Parameters
    ----------
    df : pandas.DataFrame
        Must contain x and every entry of columns.
    columns : list of str
    title : str
    errors : dict, optional
        column -> column of standard errors, drawn as error bars.
    """
    errors = errors or {}
    fig = plt.figure(figsize=(S.FIG_WIDTH, S.FIG_TALL_CURVE))
    ax = fig.add_subplot(111)

    for col in columns:
        color = S.CURVE_COLORS.get(col, S.CURVE_FALLBACK_COLOR)
        if col in errors:
            ax.errorbar(df[x], df[col], yerr=df[errors[col]], color=color, marker='o',
                        markersize=3, linestyle='none', capsize=S.ERRORBAR_CAPSIZE, label=col)
        else:
            ax.plot(df[x], df[col], color=color, linewidth=S.CURVE_LW, label=col)

    ax.set_xlabel(x, fontsize=S.FONT_SIZE_AXES)
    ax.set_ylabel(ylabel, fontsize=S.FONT_SIZE_AXES)
    ax.set_title(title, fontsize=S.FONT_SIZE_TITLE, fontweight=S.FONT_WEIGHT_TITLE)
    ax.legend(fontsize=S.FONT_SIZE_LEGEND, frameon=False)
    S.style_axes(ax)
    fig.tight_layout()
    return fig
