"""Twin trajectories, local response divergence against tau and perturbation cost against y0.

Called by run_causation.py for `figure fig1`.
"""

from dataclasses import replace

import numpy as np
import pandas as pd

from functions.config import measure_settings, model_from_config, parse_taus, sim_config
from functions.measure_divergences import local_response_divergence, perturbation_divergence
from functions.save_results import run_header, save_csv, save_workbook
from functions.simulate_sde import simulate_stationary, simulate_twin
from functions.validation_report import ValidationReport

N_TWIN_POINTS = 60


def record_lags(tau, dt):
    """About N_TWIN_POINTS multiples of dt in (0, tau], always ending at tau."""
    n_steps = int(round(tau / dt))
    if n_steps < 1 or abs(n_steps * dt - tau) > 1e-6 * dt:
        raise ValueError(f"tau={tau} is not a multiple of dt={dt}")
    every = max(1, n_steps // N_TWIN_POINTS)
    steps = np.unique(np.append(np.arange(every, n_steps + 1, every), n_steps))
    return tuple(float(v) for v in np.round(steps * dt, 12))


def default_condition(model, states):
    """Stationary mean with x moved up by one stationary standard deviation."""
    condition = states.mean(axis=0)
    condition[model.x_index] += states[:, model.x_index].std()
    return condition


def twin_table(nat, pert, x, y):
    """Long table: one row per (trajectory, t) with both members of the twin."""
    frames = []
    for i in range(nat.n_trajectories):
        frames.append(pd.DataFrame({
            't': nat.lags,
            'trajectory': i,
            'x_natural': nat.samples[i, :, x],
            'y_natural': nat.samples[i, :, y],
            'x_perturbed': pert.samples[i, :, x],
            'y_perturbed': pert.samples[i, :, y],
        }))
    return pd.concat(frames, ignore_index=True)


def perturbation_by_y0(model, states, eps, n_strata, k, n_blocks, seed):
    """c_x(eps) within equal-count y0 strata; the strata share one stationary sample."""
    y0 = states[:, model.y_index]
    edges = np.quantile(y0, np.linspace(0.0, 1.0, n_strata + 1))
    labels = np.clip(np.searchsorted(edges[1:-1], y0, side='right'), 0, n_strata - 1)
    rows = []
    for s in range(n_strata):
        members = states[labels == s]
        est = perturbation_divergence(model, eps, states=members, k=k, n_blocks=n_blocks, seed=seed + s)
        rows.append({'y0': float(np.median(members[:, model.y_index])), 'y0_low': edges[s], 'y0_high': edges[s + 1],
                     'n': len(members), 'c_x': est.value, 'c_x_stderr': est.stderr})
    return pd.DataFrame(rows)


def run(config, output_dir):
    """Write twins.csv, local_divergence.csv, perturbation_vs_y0.csv and report.json."""
    model = model_from_config(config)
    if model.y_index is None:
        raise ValueError(f"model '{model.name}' has no response variable")
    exp = config['experiment']
    tau = float(exp['tau'])
    eps = float(exp['eps'])
    settings = measure_settings(config)
    tol = config['tolerances']
    seed = int(exp['seed'])
    x, y = model.x_index, model.y_index
    cfg = sim_config(config)
    print(f'Twin experiment: model={model.name}, eps={eps:g}, tau={tau:g}')

    stationary = simulate_stationary(model, replace(cfg, n_trajectories=settings.n_stationary, tau_record=()))
    states = stationary.state(0)
    if exp['condition'] is None:
        condition = default_condition(model, states)
    else:
        condition = np.asarray(exp['condition'], dtype=float)
        if condition.shape != (model.n,):
            raise ValueError(f"experiment.condition needs {model.n} entries, got {condition.tolist()}")
    header = run_header(config, model, tau=tau, eps=eps,
                        condition=[round(float(v), 10) for v in condition])
    report = ValidationReport('fig1')

    report.section('Twin trajectories')
    twin_cfg = replace(cfg, n_trajectories=int(exp['n_twins']), tau_record=record_lags(tau, cfg.dt))
    nat, pert = simulate_twin(model, twin_cfg, condition, eps)
    twins = twin_table(nat, pert, x, y)
    save_csv(twins, 'twins', output_dir, header=header)
    start_gap = pert.state(0) - nat.state(0)
    others = [i for i in range(model.n) if i != x]
    report.check('twins start from the same y0', np.all(start_gap[:, others] == 0.0), expected=0.0,
                 observed=float(np.abs(start_gap[:, others]).max()) if others else 0.0)
    report.check_close('twin kick equals eps', float(start_gap[:, x].mean()), eps, abs_tol=1e-12)
    still_nat, still_pert = simulate_twin(model, twin_cfg, condition, 0.0)
    report.check('zero kick reproduces the natural run',
                 still_nat.samples.tobytes() == still_pert.samples.tobytes())

    report.section('Local response divergence')
    taus = [t for t in parse_taus(exp['taus']) if 0 < t <= tau]
    taus = sorted(set(taus) | {tau})
    run_cfg = replace(cfg, n_trajectories=settings.n_conditional)
    rows = []
    for t in taus:
        est = local_response_divergence(model, condition, eps, t, run_cfg, k=settings.k, n_blocks=settings.n_blocks)
        print(f'  tau={t:g}: D={est.value:.4f} +/- {est.stderr:.4f}')
        rows.append({'tau': t, 'D_local': est.value, 'D_local_stderr': est.stderr})
    local = pd.DataFrame(rows)
    save_csv(local, 'local_divergence', output_dir, header=header)
    before = local_response_divergence(model, condition, eps, -taus[0], run_cfg, k=settings.k)
    report.check('local divergence zero before the kick', before.value == 0.0, expected=0.0, observed=before.value)
    final = rows[-1]
    floor = tol['n_sigma'] * final['D_local_stderr']
    report.check(f'local divergence resolved at tau={tau:g}', final['D_local'] > floor, expected=f'>{floor:.3g}',
                 observed=final['D_local'], tolerance=floor,
                 detail=f"D={final['D_local']:.4f} +/- {final['D_local_stderr']:.4f}")

    report.section('Perturbation cost against y0')
    strata = perturbation_by_y0(model, states, eps, int(exp['n_strata']), settings.k, settings.n_blocks, seed)
    save_csv(strata, 'perturbation_vs_y0', output_dir, header=header)
    # y0 marginals of both halves agree, so the joint divergence averages the conditional ones
    whole = perturbation_divergence(model, eps, states=states, k=settings.k, n_blocks=settings.n_blocks, seed=seed)
    mean_c = float(strata['c_x'].mean())
    mean_se = float(np.sqrt((strata['c_x_stderr'] ** 2).sum())) / len(strata)
    report.check_close('stratum costs average to the whole-sample cost', mean_c, whole.value,
                       rel=tol['perturbation_strata'], stderr=float(np.hypot(mean_se, whole.stderr)),
                       n_sigma=tol['n_sigma'])

    if exp['xlsx']:
        save_workbook({'twins': twins, 'local_divergence': local, 'perturbation_vs_y0': strata}, 'fig1',
                      output_dir, header=header)
    if exp['svg']:
        from functions.plot_curves import plot_curves
        from functions.save_plot import save_plot
        first = twins[twins['trajectory'] == 0]
        n = save_plot(plot_curves(first, ['x_natural', 'x_perturbed', 'y_natural', 'y_perturbed'],
                                  f'Twin trajectories, eps={eps:g}', ylabel='state', x='t'), 'twins', 1, output_dir)
        n = save_plot(plot_curves(local, ['D_local'], 'Local response divergence',
                                  errors={'D_local': 'D_local_stderr'}), 'local_divergence', n, output_dir)
        save_plot(plot_curves(strata, ['c_x'], 'Perturbation cost against y0', errors={'c_x': 'c_x_stderr'},
                              x='y0'), 'perturbation_vs_y0', n, output_dir)

    report.write_json(output_dir)
    return report
