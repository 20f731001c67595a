"""Tests for validation_report and save_results modules."""

import json

import numpy as np
import pandas as pd
import pytest
from openpyxl import load_workbook
from functions.config import load_config
from functions.save_results import run_header, save_csv, save_json, save_workbook
from functions.sde_models import build_model
from functions.validation_report import ValidationReport, plain_value


def test_checks_and_status(capsys):
    """Checks print PASS/FAIL lines and drive the overall status."""
    report = ValidationReport('demo')
    report.section('first')
    assert report.check('always', True, detail='fine')
    assert not report.check_close('close', 1.2, 1.0, rel=0.1)
    out = capsys.readouterr().out
    assert '--- first ---' in out
    assert '[PASS] always: fine' in out
    assert '[FAIL] close' in out
    data = report.to_dict()
    assert data['status'] == 'fail' and data['n_failed'] == 1 and data['n_checks'] == 2
    assert data['checks'][0]['section'] == 'first'


def test_check_close_with_stderr():
    """Allowed deviation adds rel, absolute and n_sigma * stderr parts."""
    report = ValidationReport('demo')
    assert report.check_close('sigma', 1.25, 1.0, stderr=0.1, n_sigma=3.0)
    assert not report.check_close('nan', float('nan'), 1.0, rel=1.0)


def test_duplicate_names_rejected():
    """Each check name is recorded once."""
    report = ValidationReport('demo')
    report.check('once', True)
    with pytest.raises(ValueError):
        report.check('once', True)
    other = ValidationReport('other')
    other.check('once', False)
    with pytest.raises(ValueError):
        report.extend(other)


def test_write_json(tmp_path):
    """report.json is sorted, valid JSON."""
    report = ValidationReport('demo')
    report.check('value', True, observed=np.float64(0.5))
    path = report.write_json(str(tmp_path))
    with open(path) as f:
        data = json.load(f)
    assert data['status'] == 'pass'
    assert data['checks'][0]['observed'] == 0.5


def test_plain_value():
    """numpy values become plain Python; non-finite floats become None."""
    out = plain_value({'a': np.arange(3), 'b': np.bool_(True), 'c': np.int64(2), 'd': np.nan, 'e': (1.5,)})
    assert out == {'a': [0, 1, 2], 'b': True, 'c': 2, 'd': None, 'e': [1.5]}


def test_save_csv_header(tmp_path):
    """CSV starts with sorted '# key=value' lines and reads back with comment='#'."""
    config = load_config(env={})
    config['experiment']['name'] = 'analytic'
    header = run_header(config, build_model('ou2'), tau=3.0)
    df = pd.DataFrame({'tau': [1.0, 2.0], 'Gamma': [0.1, 0.2]})
    path = save_csv(df, 'table', str(tmp_path), header=header)
    with open(path) as f:
        lines = f.read().splitlines()
    assert lines[0].startswith('# ')
    assert '# param.alpha=0.5' in lines
    assert '# tau=3.0' in lines
    back = pd.read_csv(path, comment='#')
    pd.testing.assert_frame_equal(back, df, check_dtype=False)


def test_save_json_and_workbook(tmp_path):
    """JSON records and workbook sheets land in the output directory."""
    path = save_json({'value': np.float32(0.25), 'rows': np.ones(2)}, 'record', str(tmp_path))
    with open(path) as f:
        assert json.load(f) == {'rows': [1.0, 1.0], 'value': 0.25}

    df = pd.DataFrame({'tau': [1.0], 'T': [0.2]})
    book = save_workbook({'curves': df}, 'tables', str(tmp_path), header={'seed': 0})
    ws = load_workbook(book)['curves']
    assert ws.cell(row=1, column=1).value == 'seed'
    assert ws.cell(row=3, column=1).value == 'tau'
    assert ws.cell(row=4, column=2).value == 0.2
