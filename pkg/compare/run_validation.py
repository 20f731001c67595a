#!/usr/bin/env python3
"""Acceptance suite: closed-form identities, Monte-Carlo oracles, shape checks and determinism.

Every acceptance criterion is recorded once (criteria with two parts as a/b
checks). Heavy experiments are delegated to the builders, whose own reports are
written next to the suite report.
"""

import copy
import os
import sys
from dataclasses import replace

import numpy as np

if __name__ == '__main__':
    sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from builders import load_builder
from functions.calc_conditionals import linear_conditionals
from functions.calc_linear_measures import (ensemble_information_response, information_response,
                                            transfer_entropy, variance_identity_residual)
from functions.calc_lyapunov import solve_lyapunov
from functions.config import (epsilon_protocol, load_config, measure_settings, model_from_config, sim_config,
                              validate_config)
from functions.estimate_kl import kl_knn
from functions.linear_model import ou_1d, ou_hierarchical, random_stable_model
from functions.measure_divergences import perturbation_divergence
from functions.measure_frt import classical_frt_check
from functions.measure_response import generalized_response, information_response_empirical, linear_shift_profile
from functions.save_results import save_json
from functions.sde_models import linear_sde
from functions.simulate_sde import simulate_stationary
from functions.validation_report import ValidationReport

SWEEP_TAUS = (0.5, 1.0, 3.0, 10.0)
N_RANDOM_MODELS = 100


def _with_model(config, name, method, **params):
    cfg = copy.deepcopy(config)
    cfg['model'] = {'name': name, 'params': params, 'A': None, 'Q': None}
    cfg['simulation']['method'] = method
    return cfg


def _sweep_models(seed):
    rng = np.random.default_rng([seed, 21])
    models = [ou_hierarchical()]
    models += [random_stable_model(rng, int(rng.integers(2, 6))) for _ in range(N_RANDOM_MODELS)]
    return models


def _summarize(report, name, sub, check_names):
    """Fold named checks of a builder report into one suite check."""
    found = {c['name']: c for c in sub.checks}
    missing = [n for n in check_names if n not in found]
    picked = [found[n] for n in check_names if n in found]
    passed = not missing and all(c['passed'] for c in picked)
    detail = '; '.join(f"{c['name']}: {c['detail']}" for c in picked)
    if missing:
        detail += f'; missing {missing}'
    return report.check(name, passed, detail=detail)


def check_lyapunov(report, config, tol):
    report.section('1. Stationary covariance')
    lin = ou_1d(a=0.1, q=0.1)
    var = float(solve_lyapunov(lin)[0, 0])
    report.check_close('1a. 1D OU variance (analytic)', var, 0.5, abs_tol=tol['lyapunov_exact'])
    cfg = sim_config(config, n_trajectories=100_000, method='euler', tau_record=())
    states = simulate_stationary(linear_sde(lin), cfg).state(0)[:, 0]
    report.check_close('1b. 1D OU variance (Monte Carlo)', float(states.var(ddof=1)), 0.5, rel=tol['lyapunov_mc'])


def check_identities(report, config, tol):
    report.section('2-3, 6. Closed-form identities')
    worst_var, worst_gamma, worst_ens, out_of_range = 0.0, 0.0, 0.0, 0
    for model in _sweep_models(int(config['experiment']['seed'])):
        for tau in SWEEP_TAUS:
            c = linear_conditionals(model, tau)
            worst_var = max(worst_var, abs(variance_identity_residual(model, tau)) / c['var_reduced'])
            gamma = information_response(model, tau).value
            T = transfer_entropy(model, tau).value
            worst_gamma = max(worst_gamma, abs(gamma - np.expm1(2.0 * T)) / max(1.0, gamma))
            ens = ensemble_information_response(model, tau).value
            direct = c['g'] ** 2 * c['var_x'] / c['var_y']
            worst_ens = max(worst_ens, abs(ens - direct))
            out_of_range += int(not (0.0 <= ens <= 1.0))
    n = (N_RANDOM_MODELS + 1) * len(SWEEP_TAUS)
    report.check('2. variance identity', worst_var < tol['identity'], expected=0.0, observed=worst_var,
                 tolerance=tol['identity'], detail=f'{n} cases, max relative residual={worst_var:.3g}')
    report.check('3. Gamma = exp(2T) - 1 (analytic)', worst_gamma < tol['gamma_te'], expected=0.0,
                 observed=worst_gamma, tolerance=tol['gamma_te'], detail=f'max dev={worst_gamma:.3g}')
    report.check('6a. ensemble response identity and bounds',
                 worst_ens < tol['ensemble_identity'] and out_of_range == 0, expected=0.0, observed=worst_ens,
                 tolerance=tol['ensemble_identity'],
                 detail=f'max dev={worst_ens:.3g}, {out_of_range} values outside [0, 1]')


def check_empirical_gamma(report, config, tol):
    report.section('4. Empirical information response (linear)')
    cfg_lin = _with_model(config, 'ou2', 'exact')
    model = model_from_config(cfg_lin)
    tau = float(config['experiment']['tau'])
    result = information_response_empirical(model, tau, epsilon_protocol(cfg_lin), sim_config(cfg_lin),
                                            measure_settings(cfg_lin))
    analytic = information_response(model.linear, tau).value
    bias = (result.value - analytic) / analytic
    z = (result.value - analytic) / result.stderr if result.stderr > 0 else float('inf')
    print(f'  Gamma (empirical) = {result.value:.4f} +/- {result.stderr:.4f}, analytic = {analytic:.4f}, '
          f'bias = {100 * bias:+.1f}% ({z:+.1f} stderr)')
    report.check(f'4. Gamma empirical vs analytic at tau={tau:g}', abs(bias) <= tol['gamma_empirical'],
                 expected=analytic, observed=result.value, tolerance=tol['gamma_empirical'] * analytic,
                 detail=f'observed={result.value:.6g} +/- {result.stderr:.3g}, expected={analytic:.6g}, '
                        f'relative bias={100 * bias:+.2f}%, {z:+.2f} stderr')
    return {'value': result.value, 'stderr': result.stderr, 'analytic': analytic, 'relative_bias': bias,
            'bias_in_stderr': z, 'ladder': result.metadata['ladder']}


def check_generalized_response(report, config, tol):
    cfg_lin = _with_model(config, 'ou2', 'exact')
    model = model_from_config(cfg_lin)
    tau = float(config['experiment']['tau'])
    result = generalized_response(model, linear_shift_profile(model), tau, sim_config(cfg_lin),
                                  replace(measure_settings(cfg_lin), n_stationary=50_000))
    analytic = ensemble_information_response(model.linear, tau).value
    report.check_close(f'6c. generalized response of the x-shift profile at tau={tau:g}', result.value, analytic,
                       rel=tol['generalized_response'], stderr=result.stderr, n_sigma=tol['n_sigma'])
    return result


def check_frt(report, config, tol):
    report.section('9-10. Fluctuation-response relations')
    tau = float(config['experiment']['tau'])
    checks = {}
    for name, method in (('ou2', 'exact'), ('quad', 'euler')):
        cfg_m = _with_model(config, name, method)
        checks[name] = classical_frt_check(model_from_config(cfg_m), tau, epsilon_protocol(cfg_m),
                                           sim_config(cfg_m), measure_settings(cfg_m))
    lin = checks['ou2']
    report.check('9. response slope = stationary correlation', lin['relative_discrepancy'] < tol['frt'],
                 expected=lin['correlation'], observed=lin['slope'], tolerance=tol['frt'],
                 detail=f"slope={lin['slope']:.4f}, correlation={lin['correlation']:.4f} "
                        f"+/- {lin['correlation_stderr']:.4f}")
    held = {name: r['bound_holds'] for name, r in checks.items()}
    report.check('10. response bounded by ensemble divergence', all(held.values()), observed=held,
                 detail=', '.join(f'{k}: {"holds" if v else "violated"}' for k, v in held.items()))
    return checks


def check_estimator(report, config, tol):
    report.section('11. k-NN divergence calibration')
    seed = int(config['experiment']['seed'])
    k = int(config['estimator']['k'])
    rng = np.random.default_rng([seed, 31])
    n = 100_000
    pairs = [
        ('same Gaussian', rng.normal(0.0, 1.0, 10_000), rng.normal(0.0, 1.0, 10_000), 0.0),
        ('shifted mean', rng.normal(0.25, np.sqrt(0.5), n), rng.normal(0.0, np.sqrt(0.5), n), 0.0625),
        ('doubled variance', rng.normal(0.0, np.sqrt(2.0), n), rng.normal(0.0, 1.0, n),
         0.5 * (1.0 - np.log(2.0))),
    ]
    parts = []
    passed = True
    for name, p, q, truth in pairs:
        est = kl_knn(p, q, k=k, seed=seed)
        ok = abs(est.value - truth) <= tol['n_sigma'] * est.stderr
        if truth > 0:
            ok = ok and est.stderr < tol['kl_stderr_fraction'] * truth
        passed = passed and ok
        parts.append(f'{name}: {est.value:.5f} +/- {est.stderr:.5f} (true {truth:.5f})')
    report.check('11. kl_knn on Gaussian oracle pairs', passed, detail='; '.join(parts))


def _brownian_config(config, n_trajectories=100_000, **simulation):
    cfg_b = _with_model(config, 'brownian', 'exact', m=1.0, lam=1.0, temp=1.0)
    cfg_b['simulation'].update(n_trajectories=n_trajectories, **simulation)
    cfg_b['experiment']['f'] = 0.5
    cfg_b['experiment']['dt_pulse'] = 1e-3
    return cfg_b


def _builder_outputs(name, config, output_dir):
    """report.json and every CSV a builder writes, as bytes keyed by file name."""
    load_builder(name).run(config, output_dir)
    outputs = {}
    for fname in sorted(os.listdir(output_dir)):
        if fname.endswith(('.json', '.csv')):
            with open(os.path.join(output_dir, fname), 'rb') as f:
                outputs[fname] = f.read()
    return outputs


def _quad_payload(config):
    cfg_q = _with_model(config, 'quad', 'euler')
    model = model_from_config(cfg_q)
    cfg = sim_config(cfg_q, n_trajectories=2000, burn_in=20.0, tau_record=(1.0,))
    ens = simulate_stationary(model, cfg)
    kl = perturbation_divergence(model, 0.25, states=ens.state(0), seed=cfg.seed)
    return ens.samples.tobytes() + repr(kl.to_record()).encode()


def check_determinism(report, config, output_dir):
    report.section('12. Determinism')
    root = os.path.join(output_dir, 'determinism')
    cfg_b = _brownian_config(config, n_trajectories=20_000)
    first = _builder_outputs('brownian', cfg_b, os.path.join(root, 'run1'))
    second = _builder_outputs('brownian', cfg_b, os.path.join(root, 'run2'))
    report.check('12a. repeated run byte-identical', first == second,
                 detail=f'{sorted(first)} compared, {sum(map(len, first.values()))} bytes')

    # block size fixes the stream layout; only the worker count differs
    serial = _builder_outputs('brownian', _brownian_config(config, 20_000, block_size=256, n_workers=1),
                              os.path.join(root, 'serial'))
    threaded = _builder_outputs('brownian', _brownian_config(config, 20_000, block_size=256, n_workers=4),
                                os.path.join(root, 'threaded'))
    blocks = {**config['simulation'], 'block_size': 256}
    same_quad = (_quad_payload({**config, 'simulation': {**blocks, 'n_workers': 1}})
                 == _quad_payload({**config, 'simulation': {**blocks, 'n_workers': 4}}))
    report.check('12b. threaded run matches serial',
                 serial['report.json'] == threaded['report.json'] and same_quad,
                 detail='brownian report and Euler ensemble compared')


def run_validation_suite(config, output_dir):
    """Run every acceptance check; individual failures are recorded, not raised.

    Returns
    -------
    ValidationReport
    """
    validate_config(config)
    tol = config['tolerances']
    report = ValidationReport('validate')

    check_lyapunov(report, config, tol)
    check_identities(report, config, tol)
    gamma = check_empirical_gamma(report, config, tol)
    save_json(gamma, 'empirical_gamma', output_dir)

    report.section('5, 13. Local grids')
    fig2 = load_builder('fig2').run(_with_model(config, 'ou2', 'exact'), os.path.join(output_dir, 'fig2'))
    _summarize(report, '5. local TE minimum and average', fig2,
               ['local TE minimum over x0', 'local TE average equals T'])

    report.section('6. Measures against tau')
    cfg_a1 = _with_model(config, 'ou2', 'exact')
    cfg_a1['experiment']['taus'] = '0.5:10:0.5'
    fig_a1 = load_builder('fig_a1').run(cfg_a1, os.path.join(output_dir, 'fig_a1'))
    _summarize(report, '6b. ensemble response long-lag limit and shape', fig_a1,
               ['GammaEnsemble within [0, Gamma]', 'GammaEnsemble / Gamma at tau=50', 'GammaEnsemble unimodal'])
    check_generalized_response(report, config, tol)

    report.section('7, 13. Nonlinear model')
    cfg_nl = _with_model(config, 'quad', 'euler')
    cfg_nl['experiment']['taus'] = str(config['experiment']['tau'])
    nonlinear = load_builder('nonlinear').run(cfg_nl, os.path.join(output_dir, 'nonlinear'))
    tau = float(config['experiment']['tau'])
    _summarize(report, '7. nonlinear model violates Gamma = exp(2T) - 1', nonlinear,
               [f'Gamma differs from exp(2T)-1 at tau={tau:g}'])

    report.section('8. Brownian particle')
    cfg_b = _brownian_config(config)
    brownian = load_builder('brownian').run(cfg_b, os.path.join(output_dir, 'brownian'))
    _summarize(report, '8. work and perturbation cost', brownian,
               ['mean work = f^2/2m', 'work variance = 2 <W> T', 'perturbation cost = <W>/T'])

    frt = check_frt(report, config, tol)
    check_estimator(report, config, tol)
    check_determinism(report, config, output_dir)

    report.section('13. Shape checks')
    _summarize(report, '13a. weighted local grids bimodal / unimodal', fig2,
               ['weighted local TE bimodal', 'weighted local response unimodal'])
    _summarize(report, '13b. nonlinear weighted local TE peaks at large y0', nonlinear,
               ['weighted local TE has >= 3 maxima at large y0'])

    save_json(frt, 'frt', output_dir)
    report.summary()
    report.write_json(output_dir)
    return report


def main():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    config = load_config(os.path.join(root, 'configs', 'validate.yaml'))
    report = run_validation_suite(config, os.path.join(config['experiment']['output_dir'], 'validate'))
    sys.exit(0 if report.all_passed else 1)


if __name__ == '__main__':
    main()
