"""Run configuration: YAML sections merged over defaults, environment and command-line overrides."""

import copy
import os

import numpy as np
import yaml

from .errors import ConfigError
from .measure_response import EpsilonProtocol, MeasureSettings
from .sde_models import MODEL_BUILDERS, build_model
from .simulate_sde import METHODS, SimConfig

ENV_OUTDIR = 'INFRESP_OUTDIR'
ENV_SEED = 'INFRESP_SEED'

DEFAULTS = {
    'model': {
        'name': 'ou2',
        'params': {},
        'A': None,
        'Q': None,
    },
    'simulation': {
        'dt': 0.01,
        'burn_in': None,
        'method': 'euler',
        'n_trajectories': 10_000,
        'block_size': 4096,
        'n_workers': 1,
    },
    'estimator': {
        'k': 5,
        'n_blocks': 20,
    },
    'protocol': {
        'factors': [0.1, 0.15, 0.25, 0.4],
        'ensemble_factors': [0.1, 0.15, 0.25, 0.4],
        'epsilons': None,
    },
    'experiment': {
        'name': None,
        'taus': '0.5:10:0.5',
        'tau': 3.0,
        'eps': 0.25,
        'seed': 0,
        'output_dir': 'output',
        'n_conditions': 64,
        'n_conditional': 10_000,
        'n_stationary': 200_000,
        'n_cell': 2000,
        'grid_x': 61,
        'grid_y': 15,
        'condition': None,
        'n_twins': 5,
        'n_strata': 8,
        'f': 0.5,
        'dt_pulse': 1e-3,
        'svg': False,
        'xlsx': False,
    },
    'tolerances': {
        'lyapunov_exact': 1e-12,
        'lyapunov_mc': 0.02,
        'identity': 1e-10,
        'gamma_te': 1e-9,
        'gamma_empirical': 0.10,
        'local_te_minimum': 1e-10,
        'local_te_mean': 0.01,
        'ensemble_identity': 1e-10,
        'long_lag_ratio': 1e-3,
        'brownian_work': 0.02,
        'brownian_variance': 0.05,
        'brownian_cost': 0.05,
        'frt': 0.05,
        'n_sigma': 3.0,
        'kl_stderr_fraction': 0.10,
        'generalized_response': 0.15,
        'perturbation_strata': 0.10,
    },
}


def _merge(base, override, path=''):
    """Recursively merge override into base, rejecting keys base does not know."""
    for key, value in override.items():
        where = f"{path}.{key}" if path else str(key)
        if key not in base:
            raise ConfigError(f"unknown config key '{where}'")
        if key == 'params':
            if value is not None and not isinstance(value, dict):
                raise ConfigError(f"'{where}' must be a mapping")
            base[key] = dict(value or {})
        elif isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"'{where}' must be a section, got {type(value).__name__}")
            _merge(base[key], value, where)
        else:
            base[key] = value
    return base


def load_config(path=None, env=None):
    """Defaults, then the YAML file (if any), then environment overrides.

    Parameters
    ----------
    path : str or None
    env : mapping, optional
        Environment to read overrides from; os.environ by default.

    Returns
    -------
    dict
    """
    config = copy.deepcopy(DEFAULTS)
    if path is not None:
        if not os.path.isfile(path):
            raise ConfigError(f"config file not found: {path}")
        with open(path, 'r') as f:
            try:
                loaded = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise ConfigError(f"could not parse {path}: {e}") from e
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path} must hold a mapping of sections")
        _merge(config, loaded)

    env = os.environ if env is None else env
    if env.get(ENV_OUTDIR):
        config['experiment']['output_dir'] = env[ENV_OUTDIR]
    if env.get(ENV_SEED):
        try:
            config['experiment']['seed'] = int(env[ENV_SEED])
        except ValueError as e:
            raise ConfigError(f"{ENV_SEED} must be an integer, got '{env[ENV_SEED]}'") from e
    return config


def apply_overrides(config, overrides):
    """Apply {'section.key': value} overrides; None values are skipped."""
    for dotted, value in overrides.items():
        if value is None:
            continue
        section, _, key = dotted.partition('.')
        if section not in config or key not in config[section]:
            raise ConfigError(f"unknown config key '{dotted}'")
        if key == 'params':
            config[section][key].update(value)
        else:
            config[section][key] = value
    return config


def parse_taus(value):
    """Lag list from 'start:stop:step' (stop inclusive), a comma list, a number or a sequence."""
    if isinstance(value, str):
        text = value.strip()
        try:
            if ':' in text:
                start, stop, step = (float(v) for v in text.split(':'))
                if step <= 0:
                    raise ConfigError(f"tau step must be positive, got {step}")
                return [float(t) for t in np.round(np.arange(start, stop + 0.5 * step, step), 12)]
            return [float(v) for v in text.split(',') if v.strip()]
        except ValueError as e:
            raise ConfigError(f"could not parse tau grid '{value}'") from e
    values = np.atleast_1d(np.asarray(value, dtype=float))
    return [float(v) for v in values]


def parse_params(items):
    """['k=v', ...] command-line pairs to a dict of floats."""
    params = {}
    for item in items or []:
        key, sep, raw = item.partition('=')
        if not sep or not key:
            raise ConfigError(f"parameter must look like key=value, got '{item}'")
        try:
            params[key.strip()] = float(raw)
        except ValueError as e:
            raise ConfigError(f"parameter '{key}' needs a numeric value, got '{raw}'") from e
    return params


def _positive(section, key, value, integer=False):
    if value is None or isinstance(value, bool) or not np.isfinite(value) or value <= 0:
        raise ConfigError(f"{section}.{key} must be positive, got {value}")
    if integer and int(value) != value:
        raise ConfigError(f"{section}.{key} must be an integer, got {value}")


def validate_config(config):
    """Check numeric fields against module preconditions before dispatch."""
    model = config['model']
    if model['name'] not in MODEL_BUILDERS:
        raise ConfigError(f"unknown model '{model['name']}'. Supported: {list(MODEL_BUILDERS.keys())}")
    if model['name'] == 'inline' and (model['A'] is None or model['Q'] is None):
        raise ConfigError("inline model needs model.A and model.Q")

    sim = config['simulation']
    _positive('simulation', 'dt', sim['dt'])
    for key in ('n_trajectories', 'block_size', 'n_workers'):
        _positive('simulation', key, sim[key], integer=True)
    if sim['method'] not in METHODS:
        raise ConfigError(f"simulation.method must be one of {METHODS}, got '{sim['method']}'")
    if sim['burn_in'] is not None and sim['burn_in'] < 0:
        raise ConfigError(f"simulation.burn_in must be >= 0, got {sim['burn_in']}")

    est = config['estimator']
    _positive('estimator', 'k', est['k'], integer=True)
    if est['n_blocks'] is None or est['n_blocks'] < 0 or int(est['n_blocks']) != est['n_blocks']:
        raise ConfigError(f"estimator.n_blocks must be a non-negative integer, got {est['n_blocks']}")

    proto = config['protocol']
    for key in ('factors', 'ensemble_factors', 'epsilons'):
        values = proto[key]
        if values is None:
            continue
        values = list(np.atleast_1d(values))
        if len(values) < 3 or any(not v > 0 for v in values):
            raise ConfigError(f"protocol.{key} needs >= 3 positive values, got {values}")

    exp = config['experiment']
    seed = exp['seed']
    if isinstance(seed, bool) or int(seed) != seed or seed < 0:
        raise ConfigError(f"experiment.seed must be a non-negative integer, got {seed}")
    for key in ('n_conditions', 'n_conditional', 'n_stationary', 'n_cell', 'grid_x', 'grid_y', 'n_twins',
                'n_strata'):
        _positive('experiment', key, exp[key], integer=True)
    for key in ('tau', 'eps', 'dt_pulse'):
        _positive('experiment', key, exp[key])
    if exp['f'] < 0:
        raise ConfigError(f"experiment.f must be >= 0, got {exp['f']}")
    parse_taus(exp['taus'])
    condition = exp['condition']
    if condition is not None:
        values = np.atleast_1d(np.asarray(condition, dtype=object))
        if values.ndim != 1 or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
            raise ConfigError(f"experiment.condition must be a list of numbers, got {condition}")

    for key, value in config['tolerances'].items():
        if value is None or not np.isfinite(value) or value < 0:
            raise ConfigError(f"tolerances.{key} must be a non-negative number, got {value}")
    return config


def model_from_config(config):
    model = config['model']
    params = dict(model['params'])
    if model['name'] == 'inline':
        params.update({'A': model['A'], 'Q': model['Q']})
    try:
        return build_model(model['name'], **params)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def sim_config(config, **changes):
    sim = config['simulation']
    fields = {
        'dt': float(sim['dt']),
        'burn_in': sim['burn_in'],
        'seed': int(config['experiment']['seed']),
        'n_trajectories': int(sim['n_trajectories']),
        'method': sim['method'],
        'block_size': int(sim['block_size']),
        'n_workers': int(sim['n_workers']),
    }
    fields.update(changes)
    return SimConfig(**fields)


def measure_settings(config):
    exp = config['experiment']
    est = config['estimator']
    return MeasureSettings(n_conditions=int(exp['n_conditions']), n_conditional=int(exp['n_conditional']),
                           n_stationary=int(exp['n_stationary']), k=int(est['k']),
                           n_blocks=int(est['n_blocks']))


def epsilon_protocol(config, ensemble=False):
    """Ladder for conditional responses, or the separately configurable one for ensemble responses."""
    proto = config['protocol']
    if proto['epsilons'] is not None:
        return EpsilonProtocol(epsilons=tuple(proto['epsilons']))
    return EpsilonProtocol(factors=tuple(proto['ensemble_factors' if ensemble else 'factors']))
