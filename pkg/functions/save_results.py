"""Save result tables: CSV with a parameter header, JSON records and an optional Excel workbook."""

import json
import os

from openpyxl import Workbook

from .validation_report import plain_value


def run_header(config, model, **extra):
    """Full parameterization of a run for CSV headers and workbooks."""
    header = {
        'experiment': config['experiment']['name'],
        'model': model.name,
        'seed': config['experiment']['seed'],
        'dt': config['simulation']['dt'],
        'method': config['simulation']['method'],
        'k': config['estimator']['k'],
    }
    header.update({f'param.{k}': v for k, v in model.params.items()})
    header.update(extra)
    return header


def save_csv(df, name, output_dir, header=None):
    """Write df to <output_dir>/<name>.csv after '# key=value' lines echoing the run parameters.

    Returns
    -------
    str
        Path written.
    """
    os.makedirs(output_dir, exist_ok=True)
    path = os.path.join(output_dir, f'{name}.csv')
    with open(path, 'w', encoding='utf-8', newline='') as f:
        for key in sorted(header or {}):
            f.write(f'# {key}={plain_value(header[key])}\n')
        df.to_csv(f, index=False, lineterminator='\n', float_format='%.10g')
    print(f'Table saved to {path}')
    return path


def save_json(record, name, output_dir):
    os.makedirs(output_dir, exist_ok=True)
    path = os.path.join(output_dir, f'{name}.json')
    with open(path, 'w', encoding='utf-8') as f:
        f.write(json.dumps(plain_value(record), indent=2, sort_keys=True) + '\n')
    return path


def save_workbook(tables, name, output_dir, header=None):
    """One worksheet per table: parameter rows, a blank row, then the column header and values.

    Parameters
    ----------
    tables : dict of str -> pandas.DataFrame
        Sheet title -> table (titles are cut to Excel's 31 characters).
    """
    wb = Workbook()
    wb.remove(wb.active)
    for title, df in tables.items():
        ws = wb.create_sheet(title=title[:31])
        row = 1
        for key in sorted(header or {}):
            ws.cell(row=row, column=1, value=key)
            ws.cell(row=row, column=2, value=str(plain_value(header[key])))
            row += 1
        if header:
            row += 1
        for c, col in enumerate(df.columns):
            ws.cell(row=row, column=c + 1, value=str(col))
        for r, values in enumerate(df.itertuples(index=False)):
            for c, v in enumerate(values):
                ws.cell(row=row + 1 + r, column=c + 1, value=plain_value(v))

    os.makedirs(output_dir, exist_ok=True)
    path = os.path.join(output_dir, f'{name}.xlsx')
    wb.save(path)
    print(f'Workbook saved to {path}')
    return path
