"""Tests for the acceptance suite's individual checks."""

import os

from compare.run_validation import check_determinism, check_generalized_response
from functions.config import load_config
from functions.validation_report import ValidationReport

CONFIGS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'configs')


def _validate_config():
    config = load_config(os.path.join(CONFIGS, 'validate.yaml'), env={})
    config['experiment']['name'] = 'validate'
    return config


def test_determinism_compares_builder_outputs(tmp_path):
    """Repeated and threaded Brownian runs leave byte-identical reports and tables."""
    report = ValidationReport('validate')
    check_determinism(report, _validate_config(), str(tmp_path))
    assert report.all_passed, [c for c in report.checks if not c['passed']]
    run1, run2 = tmp_path / 'determinism' / 'run1', tmp_path / 'determinism' / 'run2'
    for name in ('report.json', 'brownian.csv'):
        assert (run1 / name).read_bytes() == (run2 / name).read_bytes()
    assert (tmp_path / 'determinism' / 'threaded' / 'report.json').exists()


def test_generalized_response_check():
    """The x-shift profile reproduces the closed-form ensemble response."""
    report = ValidationReport('validate')
    result = check_generalized_response(report, _validate_config(), _validate_config()['tolerances'])
    assert report.all_passed, report.checks
    assert not result.metadata['recentered']
