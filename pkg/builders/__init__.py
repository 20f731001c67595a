"""Canned experiments. Each module exposes run(config, output_dir) -> ValidationReport."""

import importlib

# Maps experiment name to builder module path.
# Add new experiments here as the library grows.
EXPERIMENTS = {
    'fig1': 'builders.fig1_builder',
    'fig2': 'builders.fig2_builder',
    'fig_a1': 'builders.fig_a1_builder',
    'nonlinear': 'builders.nonlinear_builder',
    'brownian': 'builders.brownian_builder',
}


def load_builder(name):
    """Import and return the builder module for the given experiment."""
    module_name = EXPERIMENTS.get(name)
    if module_name is None:
        raise ValueError(f"unknown experiment '{name}'. Supported: {list(EXPERIMENTS.keys())}")
    return importlib.import_module(module_name)
