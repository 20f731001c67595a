"""Plot formatting configuration for the causation figures.

This is the single source of truth for plot appearance.
Edit values here to change how every rendered figure looks.

ORGANIZATION
  FONT             - family, sizes
  FIGURE SIZE      - width, heights per plot type, DPI
  TICK STYLE       - direction, length, width
  GRID MAPS        - colormap, density contours
  CURVES           - colors and line styles per measure
"""

import matplotlib
import matplotlib.font_manager as fm
import warnings


# ──────────────────────────────────────────────────────────────────────────────
# FONT
# ──────────────────────────────────────────────────────────────────────────────

FONT_FAMILY = 'Arial'          # Preferred font. Falls back to Liberation Sans → DejaVu Sans.

FONT_SIZE_TITLE  = 11
FONT_SIZE_AXES   = 11
FONT_SIZE_TICKS  = 10
FONT_SIZE_LEGEND = 8

FONT_WEIGHT_TITLE = 'bold'


# ──────────────────────────────────────────────────────────────────────────────
# FIGURE SIZE
# ──────────────────────────────────────────────────────────────────────────────

FIG_DPI        = 150
FIG_WIDTH      = 6.5
FIG_TALL_GRID  = 4.0           # Heatmaps of local quantities
FIG_TALL_CURVE = 3.0           # Measures against tau


# ──────────────────────────────────────────────────────────────────────────────
# TICK STYLE
# ──────────────────────────────────────────────────────────────────────────────

TICK_DIRECTION    = 'in'
TICK_TOP          = True
TICK_RIGHT        = True
TICK_MAJOR_LENGTH = 4
TICK_MAJOR_WIDTH  = 0.5


# ──────────────────────────────────────────────────────────────────────────────
# GRID MAPS
# ──────────────────────────────────────────────────────────────────────────────

GRID_CMAP            = 'viridis'
DENSITY_CONTOUR_COLOR = 'white'
DENSITY_CONTOUR_LW    = 0.6
DENSITY_CONTOUR_LEVELS = 5     # Stationary density contours drawn over weighted maps


# ──────────────────────────────────────────────────────────────────────────────
# CURVES
# ──────────────────────────────────────────────────────────────────────────────

CURVE_LW = 1.2
CURVE_COLORS = {
    'Gamma':         'black',
    'GammaEnsemble': 'tab:blue',
    'T':             'tab:red',
    'I_yy':          'tab:green',
    'I_xy_y':        'tab:purple',
    'x_natural':     'tab:gray',
    'x_perturbed':   'tab:orange',
    'y_natural':     'black',
    'y_perturbed':   'tab:red',
    'D_local':       'tab:blue',
    'c_x':           'tab:purple',
}
CURVE_FALLBACK_COLOR = 'gray'
ERRORBAR_CAPSIZE = 2


# ──────────────────────────────────────────────────────────────────────────────
# FONT DETECTION (runtime, do not edit)
# ──────────────────────────────────────────────────────────────────────────────

def get_best_font(preferred=None):
    """Return the best available font matching preferred (or FONT_FAMILY)."""
    preferred = preferred or FONT_FAMILY
    available = {f.name for f in fm.fontManager.ttflist}
    candidates = [preferred, 'Liberation Sans', 'FreeSans', 'Helvetica',
                  'Nimbus Sans', 'DejaVu Sans', 'sans-serif']
    for font in candidates:
        if font in available:
            return font
    return 'sans-serif'


def setup_plot_style(font_name=None):
    """Configure matplotlib rcParams. Call once before rendering figures.

    Returns
    -------
    str
        The font name actually selected.
    """
    warnings.filterwarnings('ignore', message='.*findfont.*')
    warnings.filterwarnings('ignore', category=UserWarning,
                            module='matplotlib.font_manager')

    best_font = get_best_font(font_name)

    matplotlib.rcParams.update({
        'font.family':      'sans-serif',
        'font.sans-serif':  [best_font, 'Liberation Sans', 'FreeSans',
                             'DejaVu Sans', 'sans-serif'],
        'axes.unicode_minus': False,
        'figure.dpi':       100,
        'savefig.dpi':      FIG_DPI,
        'svg.fonttype':     'none',
        'svg.hashsalt':     'infresp',  # stable SVG ids between runs
    })

    return best_font


def style_axes(ax):
    """Ticks on all four sides, pointing in."""
    ax.tick_params(axis='both', which='both', direction=TICK_DIRECTION,
                   top=TICK_TOP, right=TICK_RIGHT,
                   length=TICK_MAJOR_LENGTH, width=TICK_MAJOR_WIDTH,
                   labelsize=FONT_SIZE_TICKS)
