"""Pass/fail check ledger printed as it runs and serialized to report.json."""

import json
import os

import numpy as np


def plain_value(value):
    """Convert numpy scalars/arrays (recursively) to JSON-ready Python values."""
    if isinstance(value, dict):
        return {str(k): plain_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain_value(v) for v in value]
    if isinstance(value, np.ndarray):
        return [plain_value(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if np.isfinite(value) else None
    return value


class ValidationReport:
    """Ordered list of named checks; each name may appear once."""

    def __init__(self, title):
        self.title = title
        self.checks = []
        self.sections = {}
        self._section = None

    def section(self, name):
        print(f'\n--- {name} ---')
        self._section = name

    def check(self, name, passed, expected=None, observed=None, tolerance=None, detail=''):
        if any(c['name'] == name for c in self.checks):
            raise ValueError(f"check '{name}' recorded twice")
        passed = bool(passed)
        status = 'PASS' if passed else 'FAIL'
        msg = f'  [{status}] {name}'
        if detail:
            msg += f': {detail}'
        print(msg)
        self.checks.append({
            'name': name,
            'section': self._section,
            'expected': plain_value(expected),
            'observed': plain_value(observed),
            'tolerance': plain_value(tolerance),
            'passed': passed,
            'detail': detail,
        })
        return passed

    def check_close(self, name, observed, expected, rel=0.0, abs_tol=0.0, stderr=0.0, n_sigma=0.0):
        """|observed - expected| <= rel |expected| + abs_tol + n_sigma stderr."""
        tolerance = rel * abs(expected) + abs_tol + n_sigma * stderr
        passed = bool(np.isfinite(observed) and abs(observed - expected) <= tolerance)
        detail = f'observed={observed:.6g}, expected={expected:.6g}, tol={tolerance:.3g}'
        return self.check(name, passed, expected=expected, observed=observed, tolerance=tolerance, detail=detail)

    def extend(self, other):
        for c in other.checks:
            if any(mine['name'] == c['name'] for mine in self.checks):
                raise ValueError(f"check '{c['name']}' recorded twice")
            self.checks.append(dict(c))

    @property
    def n_failed(self):
        return sum(not c['passed'] for c in self.checks)

    @property
    def all_passed(self):
        return self.n_failed == 0

    def to_dict(self):
        return {
            'title': self.title,
            'status': 'pass' if self.all_passed else 'fail',
            'n_checks': len(self.checks),
            'n_failed': self.n_failed,
            'checks': self.checks,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write_json(self, output_dir, filename='report.json'):
        os.makedirs(output_dir, exist_ok=True)
        path = os.path.join(output_dir, filename)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(self.to_json() + '\n')
        print(f'Report saved to {path}')
        return path

    def summary(self):
        n = len(self.checks)
        print(f'\n{self.title}: {n - self.n_failed}/{n} checks passed')
