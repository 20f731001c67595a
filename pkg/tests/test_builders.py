"""Tests for the experiment builders and the command-line entry point."""

import json
import os

import pandas as pd
import pytest
from builders import EXPERIMENTS, load_builder
from functions.config import load_config
from run_causation import main


CONFIGS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'configs')

SMALL_QUAD = """
model:
  name: quad
simulation:
  method: euler
  dt: 0.05
experiment:
  tau: 3.0
  n_conditions: 8
  n_conditional: 1000
  n_stationary: 10000
  n_cell: 200
  grid_x: 21
  grid_y: 5
protocol:
  epsilons: [0.1, 0.2, 0.3]
"""


def _config(name, path=None):
    config = load_config(path, env={})
    config['experiment']['name'] = name
    return config


def _small_quad(tmp_path, name, **experiment):
    path = tmp_path / 'small.yaml'
    path.write_text(SMALL_QUAD)
    config = _config(name, str(path))
    config['experiment'].update(experiment)
    return config


def _check(report, name):
    (match,) = [c for c in report.checks if c['name'] == name]
    return match


def test_registry():
    """Every canned experiment is registered; unknown names are rejected."""
    assert set(EXPERIMENTS) == {'fig1', 'fig2', 'fig_a1', 'nonlinear', 'brownian'}
    with pytest.raises(ValueError):
        load_builder('fig9')


def test_fig2_builder(tmp_path):
    """Analytic grid checks pass and every grid CSV is written."""
    report = load_builder('fig2').run(_config('fig2'), str(tmp_path))
    assert report.all_passed, [c for c in report.checks if not c['passed']]
    for name in ('density', 'local_gamma', 'weighted_local_gamma', 'local_te', 'weighted_local_te'):
        assert (tmp_path / f'{name}.csv').exists()
    assert (tmp_path / 'report.json').exists()


def test_fig_a1_builder(tmp_path):
    """Curve checks pass and the table covers the lag grid."""
    report = load_builder('fig_a1').run(_config('fig_a1'), str(tmp_path))
    assert report.all_passed, [c for c in report.checks if not c['passed']]
    table = pd.read_csv(tmp_path / 'fig_a1.csv', comment='#')
    assert len(table) == 20
    assert list(table.columns) == ['tau', 'Gamma', 'T', 'GammaEnsemble', 'I_yy', 'I_xy_y']


def test_fig1_builder(tmp_path):
    """Twin, local divergence and per-stratum tables are written; the twin checks hold exactly."""
    config = _small_quad(tmp_path, 'fig1', taus='1,3', n_twins=3, n_strata=4)
    report = load_builder('fig1').run(config, str(tmp_path / 'fig1'))
    for name in ('twins start from the same y0', 'twin kick equals eps', 'zero kick reproduces the natural run',
                 'local divergence zero before the kick', 'local divergence resolved at tau=3'):
        assert _check(report, name)['passed'], name
    assert _check(report, 'stratum costs average to the whole-sample cost')
    twins = pd.read_csv(tmp_path / 'fig1' / 'twins.csv', comment='#')
    assert set(twins['trajectory']) == {0, 1, 2}
    assert twins['t'].max() == pytest.approx(3.0)
    local = pd.read_csv(tmp_path / 'fig1' / 'local_divergence.csv', comment='#')
    assert local['tau'].tolist() == [1.0, 3.0]
    strata = pd.read_csv(tmp_path / 'fig1' / 'perturbation_vs_y0.csv', comment='#')
    assert len(strata) == 4 and strata['n'].sum() == 10_000
    assert strata['y0'].is_monotonic_increasing


def test_nonlinear_builder_small(tmp_path):
    """A reduced nonlinear run writes every table and records its named checks."""
    config = _small_quad(tmp_path, 'nonlinear', taus='3')
    out = tmp_path / 'nonlinear'
    report = load_builder('nonlinear').run(config, str(out))
    names = [c['name'] for c in report.checks]
    assert names == ['Gamma differs from exp(2T)-1 at tau=3', 'response ladder quadratic in eps',
                     'weighted local TE has >= 3 maxima at large y0', 'weighted local response bimodal in x0']
    curves = pd.read_csv(out / 'nonlinear_curves.csv', comment='#')
    assert curves['tau'].tolist() == [3.0]
    for name in ('ladder_tau3', 'density', 'local_response', 'weighted_local_response', 'local_te',
                 'weighted_local_te'):
        assert (out / f'{name}.csv').exists(), name
    grid = pd.read_csv(out / 'weighted_local_te.csv', comment='#')
    assert len(grid) == 21 * 5
    assert json.loads((out / 'measures.json').read_text())['tau'] == 3.0


def test_brownian_builder(tmp_path):
    """Canned Brownian run: work moments pass and the cost lands near <W>/T."""
    config = _config('brownian', os.path.join(CONFIGS, 'brownian.yaml'))
    report = load_builder('brownian').run(config, str(tmp_path))
    assert _check(report, 'mean work = f^2/2m')['passed']
    assert _check(report, 'work variance = 2 <W> T')['passed']
    cost = _check(report, 'perturbation cost = <W>/T')
    assert cost['observed'] == pytest.approx(0.125, rel=0.10)
    table = pd.read_csv(tmp_path / 'brownian.csv', comment='#')
    assert table['quantity'].tolist() == ['mean_work', 'work_variance', 'perturbation_cost']


def test_cli_analytic(tmp_path):
    """analytic writes <outdir>/analytic/analytic.csv and exits 0."""
    code = main(['analytic', '--model', 'ou2', '--tau', '1,3', '--outdir', str(tmp_path)])
    assert code == 0
    table = pd.read_csv(tmp_path / 'analytic' / 'analytic.csv', comment='#')
    assert table['tau'].tolist() == [1.0, 3.0]


def test_cli_json(tmp_path, capsys):
    """--json leaves only the JSON payload on stdout."""
    code = main(['analytic', '--model', 'ou2', '--tau', '3', '--param', 'alpha=0.3', '--json',
                 '--outdir', str(tmp_path)])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload['model'] == 'ou2'
    assert payload['rows'][0]['tau'] == 3.0


def test_cli_requires_model():
    """analytic without --model or --config is a usage error."""
    with pytest.raises(SystemExit) as exc:
        main(['analytic'])
    assert exc.value.code == 2


def test_cli_error_exit_codes(tmp_path, capsys):
    """Nonlinear analytic runs and bad epsilon ladders exit with status 2."""
    assert main(['analytic', '--model', 'quad', '--outdir', str(tmp_path)]) == 2
    assert 'analytic path requires linear model' in capsys.readouterr().err
    assert main(['measure', '--model', 'ou2', '--epsilon=-0.1,0.2,0.3', '--outdir', str(tmp_path)]) == 2
    assert main(['analytic', '--model', 'ou2', '--param', 'q=-1', '--outdir', str(tmp_path)]) == 2
    assert not os.path.exists(tmp_path / 'measure')


def test_cli_figure(tmp_path):
    """figure fig_a1 runs its canned config and writes under <outdir>/fig_a1."""
    assert main(['figure', 'fig_a1', '--outdir', str(tmp_path)]) == 0
    assert (tmp_path / 'fig_a1' / 'fig_a1.csv').exists()
    assert (tmp_path / 'fig_a1' / 'report.json').exists()


def test_cli_measure_repeatable(tmp_path, capsys):
    """measure --model quad twice with one seed gives identical stdout and identical files."""
    path = tmp_path / 'small.yaml'
    path.write_text(SMALL_QUAD)
    argv = ['measure', '--model', 'quad', '--tau', '3', '--seed', '7', '--config', str(path),
            '--outdir', str(tmp_path / 'out'), '--json']
    runs = []
    for _ in range(2):
        assert main(argv) == 0
        out = tmp_path / 'out' / 'measure'
        files = {name: (out / name).read_bytes() for name in ('measure.csv', 'measure.json', 'ladder_tau3.csv')}
        runs.append((capsys.readouterr().out, files))
    assert runs[0] == runs[1]
    payload = json.loads(runs[0][0])
    assert payload['seed'] == 7 and payload['measures'][0]['tau'] == 3.0


def test_cli_grid(tmp_path):
    """grid on a linear model writes the analytic grids."""
    assert main(['grid', '--model', 'ou2', '--tau', '3', '--outdir', str(tmp_path)]) == 0
    for name in ('density', 'weighted_local_gamma', 'local_te', 'weighted_local_te'):
        assert (tmp_path / 'grid' / f'{name}.csv').exists(), name


def test_cli_validate_exit_status(tmp_path, monkeypatch):
    """validate exits 0 when every check passes and 1 when any fails."""
    import compare.run_validation
    from functions.validation_report import ValidationReport
    outcome = {'passed': True}

    def fake_suite(config, output_dir):
        report = ValidationReport('validate')
        report.check('stand-in', outcome['passed'])
        return report

    monkeypatch.setattr(compare.run_validation, 'run_validation_suite', fake_suite)
    assert main(['validate', '--outdir', str(tmp_path)]) == 0
    outcome['passed'] = False
    assert main(['validate', '--outdir', str(tmp_path)]) == 1
