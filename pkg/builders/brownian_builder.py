"""Work done by a force pulse on a Brownian particle against the information-theoretic perturbation cost.

Called by run_causation.py for `brownian`.
"""

from dataclasses import replace

import numpy as np
import pandas as pd

from functions.config import model_from_config, sim_config
from functions.measure_divergences import perturbation_divergence
from functions.save_results import run_header, save_csv
from functions.simulate_brownian import simulate_brownian_particle
from functions.simulate_sde import simulate_stationary
from functions.validation_report import ValidationReport


def run(config, output_dir):
    """Checks <W> = f^2/2m, var W = 2 <W> T and c_v(f/m) = <W>/T; writes brownian.csv and report.json."""
    model = model_from_config(config)
    m, lam, temp = (float(model.params[k]) for k in ('m', 'lam', 'temp'))
    f = float(config['experiment']['f'])
    dt_pulse = float(config['experiment']['dt_pulse'])
    tol = config['tolerances']
    cfg = sim_config(config)
    print(f'Brownian particle: m={m:g}, lambda={lam:g}, T={temp:g}, f={f:g}, pulse={dt_pulse:g}, '
          f'N={cfg.n_trajectories}')

    out = simulate_brownian_particle(m, lam, temp, f, dt_pulse, cfg)
    W = out['W']
    work_mean = float(W.mean())
    work_var = float(W.var(ddof=1))

    velocities = simulate_stationary(model, replace(cfg, method='exact', tau_record=())).state(0)
    cost = perturbation_divergence(model, f / m, states=velocities, k=int(config['estimator']['k']),
                                   n_blocks=int(config['estimator']['n_blocks']), seed=cfg.seed)

    expected_work = f ** 2 / (2.0 * m)
    summary = pd.DataFrame({
        'quantity': ['mean_work', 'work_variance', 'perturbation_cost'],
        'expected': [expected_work, 2.0 * expected_work * temp, expected_work / temp],
        'observed': [work_mean, work_var, cost.value],
        'stderr': [float(W.std(ddof=1) / np.sqrt(len(W))), float(work_var * np.sqrt(2.0 / (len(W) - 1))),
                   cost.stderr],
    })
    save_csv(summary, 'brownian', output_dir,
             header=run_header(config, model, f=f, dt_pulse=dt_pulse, n_trajectories=cfg.n_trajectories))

    report = ValidationReport('brownian')
    report.section('Work and perturbation cost')
    n_sigma = tol['n_sigma']
    report.check_close('mean work = f^2/2m', work_mean, expected_work, rel=tol['brownian_work'], abs_tol=1e-12)
    report.check_close('work variance = 2 <W> T', work_var, 2.0 * work_mean * temp,
                       rel=tol['brownian_variance'], abs_tol=1e-12)
    # with f = 0 both sides vanish and only the estimator noise is left
    report.check_close('perturbation cost = <W>/T', cost.value, work_mean / temp,
                       rel=tol['brownian_cost'], stderr=cost.stderr if f == 0 else 0.0, n_sigma=n_sigma)

    report.write_json(output_dir)
    return report
