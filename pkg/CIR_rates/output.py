"""
Result writers of the command line: CSV with shortest round-trip floats and
JSON following schema/output.schema.json
"""
import csv
import json
import math
from pathlib import Path

import numpy as np

SCHEMA_PATH = Path(__file__).parent / 'schema' / 'output.schema.json'


def csv_value(value):
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def json_value(value):
    """numbers as numbers, non-finite floats as null"""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [json_value(x) for x in value]
    return value


def write_csv(header, rows, handle):
    writer = csv.writer(handle, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([csv_value(row.get(k)) for k in header])


def make_document(command, seed, metadata, rows):
    return {
        'command': command,
        'seed': seed,
        'metadata': json_value(metadata),
        'rows': [json_value(x) for x in rows],
    }


def write_json(command, seed, metadata, rows, handle):
    json.dump(make_document(command, seed, metadata, rows), handle, indent=2)
    handle.write('\n')


def write_table(fmt, command, seed, metadata, header, rows, handle):
    """
    :param str fmt: csv or json
    :param list header: column names, also the key order of JSON rows
    :param list rows: dicts keyed by the header
    """
    if fmt == 'csv':
        write_csv(header, rows, handle)
    else:
        rows = [{k: row.get(k) for k in header} for row in rows]
        write_json(command, seed, metadata, rows, handle)


def load_schema():
    with open(SCHEMA_PATH, encoding='utf-8') as f:
        return json.load(f)
