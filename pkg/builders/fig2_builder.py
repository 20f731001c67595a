"""Weighted local information response and local transfer entropy grids of a linear model.

Called by run_causation.py for `figure fig2`.
"""

import os

import numpy as np

from functions.calc_linear_measures import transfer_entropy
from functions.calc_local_grids import (count_local_maxima, default_grid, integrate_grid, local_gamma_grid,
                                        local_te_grid, local_te_minimum, local_te_values,
                                        stationary_density_grid)
from functions.calc_conditionals import linear_conditionals
from functions.config import model_from_config
from functions.save_results import run_header, save_csv, save_workbook
from functions.validation_report import ValidationReport


def run(config, output_dir):
    """Write the grid CSVs and report.json; returns the ValidationReport."""
    model = model_from_config(config).require_linear()
    tau = float(config['experiment']['tau'])
    tol = config['tolerances']
    print(f'Local grids: model={model.name}, tau={tau:g}')

    x_grid, y_grid = default_grid(model)
    density = stationary_density_grid(model, x_grid, y_grid)
    gamma = local_gamma_grid(model, tau, x_grid, y_grid)
    weighted_gamma = local_gamma_grid(model, tau, x_grid, y_grid, weighted=True)
    te = local_te_grid(model, tau, x_grid, y_grid)
    weighted_te = local_te_grid(model, tau, x_grid, y_grid, weighted=True)
    grids = {g.quantity: g for g in (density, gamma, weighted_gamma, te, weighted_te)}

    header = run_header(config, model, tau=tau)
    for name, grid in grids.items():
        save_csv(grid.to_frame(), name, output_dir, header={**header, 'quantity': name})

    report = ValidationReport('fig2')
    report.section('Local grids')
    spread = float(gamma.values.max() - gamma.values.min())
    report.check('local response constant in space', spread < 1e-12, expected=0.0, observed=spread,
                 tolerance=1e-12, detail=f'max-min={spread:.3g}')

    n_gamma = count_local_maxima(weighted_gamma.values)
    report.check('weighted local response unimodal', n_gamma == 1, expected=1, observed=n_gamma,
                 detail=f'{n_gamma} maxima')
    n_te = count_local_maxima(weighted_te.values)
    report.check('weighted local TE bimodal', n_te == 2, expected=2, observed=n_te, detail=f'{n_te} maxima')
    y_mode, row = weighted_te.row(0.0)
    n_row = count_local_maxima(row)
    report.check('weighted local TE bimodal along x0 through the mode', n_row == 2, expected=2, observed=n_row,
                 detail=f'y0={y_mode:.3g}: {n_row} maxima')

    T = transfer_entropy(model, tau).value
    te_mean = integrate_grid(weighted_te) / integrate_grid(density)
    report.check_close('local TE average equals T', te_mean, T, rel=tol['local_te_mean'])

    c = linear_conditionals(model, tau)
    y_rows = np.linspace(y_grid[0], y_grid[-1], 7)
    x_star = c['x_given'].mean(y_rows[:, None])[:, 0]
    at_min = local_te_values(model, tau, x_star, y_rows)
    worst = float(np.max(np.abs(at_min - local_te_minimum(T))))
    report.check('local TE minimum over x0', worst < tol['local_te_minimum'], expected=local_te_minimum(T),
                 observed=float(at_min.min()), tolerance=tol['local_te_minimum'], detail=f'max dev={worst:.3g}')
    grid_floor = float(te.values.min())
    report.check('local TE grid above its minimum', grid_floor >= local_te_minimum(T) - tol['local_te_minimum'],
                 expected=local_te_minimum(T), observed=grid_floor, detail=f'grid min={grid_floor:.6g}')

    if config['experiment']['xlsx']:
        save_workbook({name: g.to_frame() for name, g in grids.items()}, 'fig2', output_dir, header=header)
    if config['experiment']['svg']:
        from functions.plot_grid import plot_grid
        from functions.save_plot import save_plot
        n = 1
        for name in ('weighted_local_gamma', 'weighted_local_te'):
            n = save_plot(plot_grid(grids[name], density=density), name, n, output_dir)

    report.write_json(output_dir)
    return report
