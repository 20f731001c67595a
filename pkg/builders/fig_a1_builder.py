"""Information response and ensemble information response against the lag (analytic curves).

Called by run_causation.py for `figure fig_a1`.
"""

import numpy as np

from functions.calc_linear_measures import analytic_table
from functions.calc_local_grids import count_local_maxima
from functions.config import model_from_config, parse_taus
from functions.save_results import run_header, save_csv, save_workbook
from functions.validation_report import ValidationReport

LONG_LAG = 50.0


def run(config, output_dir):
    """Write fig_a1.csv (tau, Gamma, GammaEnsemble, T, I_yy, I_xy_y) and report.json."""
    model = model_from_config(config).require_linear()
    taus = [t for t in parse_taus(config['experiment']['taus']) if t > 0]
    tol = config['tolerances']
    print(f'Measures against tau: model={model.name}, {len(taus)} lags in [{min(taus):g}, {max(taus):g}]')

    table = analytic_table(model, taus)
    save_csv(table, 'fig_a1', output_dir, header=run_header(config, model))

    report = ValidationReport('fig_a1')
    report.section('Measures against tau')
    gamma = table['Gamma'].to_numpy()
    ens = table['GammaEnsemble'].to_numpy()

    report.check('Gamma non-negative', np.all(gamma >= 0), observed=float(gamma.min()))
    report.check('GammaEnsemble within [0, Gamma]', np.all((ens >= 0) & (ens <= gamma + 1e-12)),
                 observed=float(np.max(ens - gamma)), detail=f'max(GammaEnsemble - Gamma)={np.max(ens - gamma):.3g}')
    dev = float(np.max(np.abs(gamma - np.expm1(2.0 * table['T'].to_numpy()))))
    report.check('Gamma = exp(2T) - 1', dev < tol['gamma_te'], expected=0.0, observed=dev,
                 tolerance=tol['gamma_te'], detail=f'max dev={dev:.3g}')
    n_peaks = count_local_maxima(ens, smooth=0)
    report.check('GammaEnsemble unimodal', n_peaks == 1, expected=1, observed=n_peaks, detail=f'{n_peaks} maxima')

    edges = analytic_table(model, [1e-3, 10.0 * LONG_LAG, LONG_LAG])
    report.check('GammaEnsemble vanishes at short lags', edges['GammaEnsemble'][0] < 1e-3 * ens.max(),
                 observed=float(edges['GammaEnsemble'][0]))
    report.check('Gamma vanishes at long lags', edges['Gamma'][1] < 1e-6 * gamma.max(),
                 observed=float(edges['Gamma'][1]))
    report.check('GammaEnsemble vanishes at long lags', edges['GammaEnsemble'][1] < 1e-6 * ens.max(),
                 observed=float(edges['GammaEnsemble'][1]))
    ratio = float(edges['GammaEnsemble'][2] / edges['Gamma'][2])
    report.check_close(f'GammaEnsemble / Gamma at tau={LONG_LAG:g}', ratio, 1.0, abs_tol=tol['long_lag_ratio'])

    if config['experiment']['xlsx']:
        save_workbook({'fig_a1': table}, 'fig_a1', output_dir, header=run_header(config, model))
    if config['experiment']['svg']:
        from functions.plot_curves import plot_curves
        from functions.save_plot import save_plot
        save_plot(plot_curves(table, ['Gamma', 'GammaEnsemble'], 'Information response vs lag'),
                  'fig_a1', 1, output_dir)

    report.write_json(output_dir)
    return report
