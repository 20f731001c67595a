#!/usr/bin/env python3
"""CLI: information response, transfer entropy and validation experiments.

Usage:
    python run_causation.py analytic --model ou2 --tau 0.5:10:0.5
    python run_causation.py measure --model quad --tau 3 --seed 7 --json
    python run_causation.py grid --model ou2 --tau 3
    python run_causation.py figure fig1 --svg
    python run_causation.py figure fig2 --svg
    python run_causation.py brownian --m 1 --lambda 1 --temp 1 --f 0.5
    python run_causation.py validate

Exit codes: 0 success, 1 check failure, 2 usage/config error, 3 numerical failure.
"""

import argparse
import contextlib
import json
import os
import sys
from dataclasses import replace

import pandas as pd

from builders import EXPERIMENTS, load_builder
from functions.calc_linear_measures import analytic_table
from functions.calc_local_grids import local_gamma_grid, local_te_grid, stationary_density_grid
from functions.calc_empirical_grids import empirical_local_grids
from functions.config import (apply_overrides, epsilon_protocol, load_config, measure_settings, model_from_config,
                              parse_params, parse_taus, sim_config, validate_config)
from functions.errors import ConfigError, NumericalError
from functions.measure_response import (ensemble_information_response_empirical, information_response_empirical,
                                        transfer_entropy_empirical)
from functions.plot_style import setup_plot_style
from functions.save_results import run_header, save_csv, save_json
from functions.simulate_sde import simulate_stationary
from functions.validation_report import plain_value

ROOT = os.path.dirname(os.path.abspath(__file__))
FIGURES = ('fig1', 'fig2', 'fig_a1', 'nonlinear')


def _common(parser):
    parser.add_argument('--config', help='YAML run configuration')
    parser.add_argument('--model', help='Model name: ou1 | ou2 | quad | brownian | inline')
    parser.add_argument('--param', action='append', metavar='KEY=VALUE', help='Model parameter (repeatable)')
    parser.add_argument('--tau', help="Lag, comma list or 'start:stop:step'")
    parser.add_argument('--seed', type=int)
    parser.add_argument('--epsilon', help='Comma list of absolute perturbation sizes')
    parser.add_argument('--threads', type=int, help='Worker threads for simulation blocks')
    parser.add_argument('--outdir', help='Output root directory')
    parser.add_argument('--json', action='store_true', help='Machine-readable JSON on stdout')
    parser.add_argument('--svg', action='store_true', help='Render SVG figures')
    parser.add_argument('--xlsx', action='store_true', help='Write an Excel workbook of the tables')


def build_parser():
    parser = argparse.ArgumentParser(description='Information response causation laboratory')
    sub = parser.add_subparsers(dest='command', required=True)

    for name, help_text in (('analytic', 'Closed-form measures over a lag grid (linear models)'),
                            ('measure', 'Monte-Carlo measures for any registered model'),
                            ('grid', 'Local transfer entropy and response grids'),
                            ('validate', 'Run the acceptance suite')):
        _common(sub.add_parser(name, help=help_text))

    fig = sub.add_parser('figure', help='Canned figure reproductions')
    fig.add_argument('name', choices=FIGURES)
    _common(fig)

    brown = sub.add_parser('brownian', help='Work of a force pulse on a Brownian particle')
    _common(brown)
    brown.add_argument('--m', type=float)
    brown.add_argument('--lambda', dest='lam', type=float)
    brown.add_argument('--temp', type=float)
    brown.add_argument('--f', type=float)
    brown.add_argument('--dt-pulse', dest='dt_pulse', type=float)
    return parser


def _epsilons(raw):
    if raw is None:
        return None
    try:
        values = [float(v) for v in raw.split(',') if v.strip()]
    except ValueError as e:
        raise ConfigError(f"--epsilon needs numbers, got '{raw}'") from e
    if not values or any(v <= 0 for v in values):
        raise ConfigError(f"--epsilon values must be positive (the ladder is fitted through the origin), got {values}")
    if len(values) < 3:
        raise ConfigError(f"--epsilon needs >= 3 values for the quadratic fit, got {values}")
    return values


def resolve(args):
    """Defaults < config file (or the canned one for the experiment) < environment < flags."""
    experiment = args.name if args.command == 'figure' else args.command
    path = args.config
    canned = os.path.join(ROOT, 'configs', f'{experiment}.yaml')
    if path is None and args.command in ('figure', 'brownian', 'validate') and os.path.isfile(canned):
        path = canned
    config = load_config(path)

    overrides = {
        'model.name': args.model,
        'model.params': parse_params(args.param) or None,
        'experiment.seed': args.seed,
        'experiment.output_dir': args.outdir,
        'simulation.n_workers': args.threads,
        'protocol.epsilons': _epsilons(args.epsilon),
        'experiment.svg': True if args.svg else None,
        'experiment.xlsx': True if args.xlsx else None,
    }
    if args.tau is not None:
        taus = parse_taus(args.tau)
        overrides['experiment.taus'] = args.tau
        if len(taus) == 1:
            overrides['experiment.tau'] = taus[0]
    elif args.command == 'measure':
        # Monte-Carlo measures run at the single configured lag unless a grid is asked for
        overrides['experiment.taus'] = str(config['experiment']['tau'])
    if args.command == 'brownian':
        overrides['model.name'] = 'brownian'
        params = {k: v for k, v in (('m', args.m), ('lam', args.lam), ('temp', args.temp)) if v is not None}
        overrides['model.params'] = params or None
        overrides['experiment.f'] = args.f
        overrides['experiment.dt_pulse'] = args.dt_pulse
    apply_overrides(config, overrides)
    config['experiment']['name'] = experiment
    return validate_config(config)


def _output_dir(config):
    return os.path.join(config['experiment']['output_dir'], config['experiment']['name'])


def cmd_analytic(config):
    model = model_from_config(config).require_linear()
    table = analytic_table(model, parse_taus(config['experiment']['taus']))
    save_csv(table, 'analytic', _output_dir(config), header=run_header(config, model))
    return {'model': model.name, 'rows': table.to_dict(orient='records')}, table, 0


def cmd_measure(config):
    model = model_from_config(config)
    taus = parse_taus(config['experiment']['taus'])
    settings = measure_settings(config)
    cfg = sim_config(config)
    seed = int(config['experiment']['seed'])
    out = _output_dir(config)
    positive = tuple(t for t in taus if t > 0)
    stationary = simulate_stationary(model, replace(cfg, n_trajectories=settings.n_stationary, tau_record=positive))

    records, rows = [], []
    for tau in taus:
        gamma = information_response_empirical(model, tau, epsilon_protocol(config), cfg, settings,
                                               stationary=stationary)
        ens = ensemble_information_response_empirical(model, tau, epsilon_protocol(config, ensemble=True), cfg,
                                                      settings, stationary=stationary)
        te = transfer_entropy_empirical(model, tau, stationary, settings, seed=seed)
        print(f'tau={tau:g}: Gamma={gamma.value:.4f} +/- {gamma.stderr:.4f}, '
              f'GammaEnsemble={ens.value:.4f} +/- {ens.stderr:.4f}, T={te.value:.4f} +/- {te.stderr:.4f}')
        if 'ladder' in gamma.metadata:
            save_csv(pd.DataFrame(gamma.metadata['ladder']), f'ladder_tau{tau:g}', out,
                     header=run_header(config, model, tau=tau))
        records.append({'tau': tau, 'Gamma': gamma.to_record(), 'GammaEnsemble': ens.to_record(),
                        'T': te.to_record()})
        rows.append({'tau': tau, 'Gamma': gamma.value, 'Gamma_stderr': gamma.stderr,
                     'GammaEnsemble': ens.value, 'GammaEnsemble_stderr': ens.stderr,
                     'T': te.value, 'T_stderr': te.stderr})
    table = pd.DataFrame(rows)
    save_csv(table, 'measure', out, header=run_header(config, model))
    record = {'model': model.name, 'seed': seed, 'measures': records}
    save_json(record, 'measure', out)
    return record, table, 0


def cmd_grid(config):
    model = model_from_config(config)
    tau = float(config['experiment']['tau'])
    out = _output_dir(config)
    if model.is_linear:
        lin = model.linear
        grids = [local_gamma_grid(lin, tau, weighted=True), local_te_grid(lin, tau), local_te_grid(lin, tau, weighted=True)]
        grids.append(stationary_density_grid(lin, grids[0].x0, grids[0].y0))
    else:
        grids = list(empirical_local_grids(model, tau, float(config['experiment']['eps']), sim_config(config),
                                           n_stationary=int(config['experiment']['n_stationary']),
                                           n_cell=int(config['experiment']['n_cell']),
                                           n_x=int(config['experiment']['grid_x']),
                                           n_y=int(config['experiment']['grid_y'])).values())
    header = run_header(config, model, tau=tau)
    for g in grids:
        save_csv(g.to_frame(), g.quantity, out, header={**header, 'quantity': g.quantity})
    summary = pd.DataFrame([{'quantity': g.quantity, 'min': g.values.min(), 'max': g.values.max()} for g in grids])
    return {'model': model.name, 'tau': tau, 'grids': summary.to_dict(orient='records')}, summary, 0


def cmd_experiment(config):
    name = config['experiment']['name']
    if name == 'validate':
        from compare.run_validation import run_validation_suite
        report = run_validation_suite(config, _output_dir(config))
    else:
        report = load_builder(name).run(config, _output_dir(config))
    return report.to_dict(), None, 0 if report.all_passed else 1


def dispatch(config):
    command = config['experiment']['name']
    if command == 'analytic':
        return cmd_analytic(config)
    if command == 'measure':
        return cmd_measure(config)
    if command == 'grid':
        return cmd_grid(config)
    if command in EXPERIMENTS or command == 'validate':
        return cmd_experiment(config)
    raise ConfigError(f"unknown command '{command}'")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ('analytic', 'measure', 'grid') and args.model is None and args.config is None:
        parser.error(f'{args.command} needs --model (or a --config with a model section)')

    try:
        config = resolve(args)
        if config['experiment']['svg']:
            setup_plot_style()
        # keep stdout clean for the JSON payload
        channel = contextlib.redirect_stdout(sys.stderr) if args.json else contextlib.nullcontext()
        with channel:
            payload, table, code = dispatch(config)
    except (ConfigError, ValueError) as e:
        print(f'ERROR: {e}', file=sys.stderr)
        return 2
    except NumericalError as e:
        print(f'ERROR: numerical failure: {e}', file=sys.stderr)
        return 3
    except OSError as e:
        print(f'ERROR: cannot write output: {e}', file=sys.stderr)
        return 2

    if args.json:
        print(json.dumps(plain_value(payload), indent=2, sort_keys=True))
    elif table is not None:
        print(table.to_string(index=False))
    return code


if __name__ == '__main__':
    sys.exit(main())
