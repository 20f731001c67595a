"""Nonlinear coupling: empirical responses against the linear-Gaussian predictions from transfer entropy.

Called by run_causation.py for `figure nonlinear`.
"""

from dataclasses import replace

import numpy as np
import pandas as pd

from functions.calc_empirical_grids import empirical_local_grids
from functions.calc_local_grids import count_local_maxima
from functions.config import epsilon_protocol, measure_settings, model_from_config, parse_taus, sim_config
from functions.measure_response import (ensemble_information_response_empirical, information_response_empirical,
                                        self_information_empirical, transfer_entropy_empirical)
from functions.save_results import run_header, save_csv, save_json, save_workbook
from functions.simulate_sde import simulate_stationary
from functions.validation_report import ValidationReport


def te_predictions(stationary, model, tau, settings, seed):
    """k-NN transfer entropy and self-information with the linear-Gaussian response predictions."""
    te = transfer_entropy_empirical(model, tau, stationary, settings, seed=seed)
    i_yy = self_information_empirical(model, tau, stationary, settings, seed=seed)
    gamma_pred = np.expm1(2.0 * te.value)
    gamma_pred_se = 2.0 * np.exp(2.0 * te.value) * te.stderr
    ens_pred = np.exp(-2.0 * i_yy.value) * -np.expm1(-2.0 * te.value)
    return te, i_yy, gamma_pred, gamma_pred_se, ens_pred


def run(config, output_dir):
    """Write nonlinear_curves.csv, the ladder and grid CSVs, and report.json."""
    model = model_from_config(config)
    tau = float(config['experiment']['tau'])
    taus = sorted({t for t in parse_taus(config['experiment']['taus']) if t > 0} | {tau})
    eps = float(config['experiment']['eps'])
    settings = measure_settings(config)
    protocol = epsilon_protocol(config)
    ens_protocol = epsilon_protocol(config, ensemble=True)
    seed = int(config['experiment']['seed'])
    tol = config['tolerances']
    header = run_header(config, model, tau=tau, eps=eps)
    print(f'Nonlinear comparison: model={model.name}, lags={taus}')

    cfg = sim_config(config)
    stationary = simulate_stationary(model, replace(cfg, n_trajectories=settings.n_stationary, tau_record=tuple(taus)))

    rows = []
    at_tau = None
    for t in taus:
        gamma = information_response_empirical(model, t, protocol, cfg, settings, stationary=stationary)
        ens = ensemble_information_response_empirical(model, t, ens_protocol, cfg, settings, stationary=stationary)
        te, i_yy, gamma_pred, gamma_pred_se, ens_pred = te_predictions(stationary, model, t, settings, seed)
        print(f'  tau={t:g}: Gamma={gamma.value:.4f} +/- {gamma.stderr:.4f}, '
              f'exp(2T)-1={gamma_pred:.4f} +/- {gamma_pred_se:.4f}')
        rows.append({
            'tau': t,
            'Gamma': gamma.value, 'Gamma_stderr': gamma.stderr,
            'GammaEnsemble': ens.value, 'GammaEnsemble_stderr': ens.stderr,
            'T': te.value, 'T_stderr': te.stderr,
            'I_yy': i_yy.value, 'I_yy_stderr': i_yy.stderr,
            'Gamma_from_T': gamma_pred, 'Gamma_from_T_stderr': gamma_pred_se,
            'GammaEnsemble_from_T': ens_pred,
        })
        save_csv(pd.DataFrame(gamma.metadata['ladder']), f'ladder_tau{t:g}', output_dir, header={**header, 'tau': t})
        if t == tau:
            at_tau = (gamma, te, gamma_pred, gamma_pred_se)
    curves = pd.DataFrame(rows)
    save_csv(curves, 'nonlinear_curves', output_dir, header=header)

    report = ValidationReport('nonlinear')
    report.section('Transfer entropy vs information response')
    gamma, te, gamma_pred, gamma_pred_se = at_tau
    gap = abs(gamma.value - gamma_pred)
    combined = float(np.hypot(gamma.stderr, gamma_pred_se))
    report.check(f'Gamma differs from exp(2T)-1 at tau={tau:g}', gap > tol['n_sigma'] * combined,
                 expected=gamma_pred, observed=gamma.value, tolerance=tol['n_sigma'] * combined,
                 detail=f'Gamma={gamma.value:.4f}+/-{gamma.stderr:.4f}, '
                        f'exp(2T)-1={gamma_pred:.4f}+/-{gamma_pred_se:.4f}')
    lin = gamma.metadata['fit_d']
    report.check('response ladder quadratic in eps',
                 abs(lin['linear_coef']) <= tol['n_sigma'] * lin['linear_coef_stderr'],
                 expected=0.0, observed=lin['linear_coef'], tolerance=tol['n_sigma'] * lin['linear_coef_stderr'],
                 detail=f"linear coefficient {lin['linear_coef']:.3g} +/- {lin['linear_coef_stderr']:.3g}")

    report.section('Local grids')
    grids = empirical_local_grids(model, tau, eps, cfg, stationary=stationary,
                                  n_cell=int(config['experiment']['n_cell']), n_x=int(config['experiment']['grid_x']),
                                  n_y=int(config['experiment']['grid_y']))
    for name, grid in grids.items():
        save_csv(grid.to_frame(), name, output_dir, header={**header, 'quantity': name})

    y_states = stationary.state(0)[:, model.y_index]
    y_high, te_row = grids['weighted_local_te'].row(np.percentile(y_states, 90))
    n_te = count_local_maxima(te_row)
    report.check('weighted local TE has >= 3 maxima at large y0', n_te >= 3, expected='>=3', observed=n_te,
                 detail=f'y0={y_high:.3g}: {n_te} maxima')
    y_mid, resp_row = grids['weighted_local_response'].row(np.median(y_states))
    n_resp = count_local_maxima(resp_row)
    report.check('weighted local response bimodal in x0', n_resp == 2, expected=2, observed=n_resp,
                 detail=f'y0={y_mid:.3g}: {n_resp} maxima')

    save_json({'tau': tau, 'Gamma': gamma.to_record(), 'T': te.to_record()}, 'measures', output_dir)
    if config['experiment']['xlsx']:
        save_workbook({'curves': curves, **{n: g.to_frame() for n, g in grids.items()}}, 'nonlinear',
                      output_dir, header=header)
    if config['experiment']['svg']:
        from functions.plot_curves import plot_curves
        from functions.plot_grid import plot_grid
        from functions.save_plot import save_plot
        n = save_plot(plot_curves(curves, ['Gamma', 'Gamma_from_T'], 'Nonlinear: Gamma vs exp(2T)-1',
                                  errors={'Gamma': 'Gamma_stderr'}), 'curves', 1, output_dir)
        for name in ('weighted_local_response', 'weighted_local_te'):
            n = save_plot(plot_grid(grids[name], density=grids['density']), name, n, output_dir)

    report.write_json(output_dir)
    return report
