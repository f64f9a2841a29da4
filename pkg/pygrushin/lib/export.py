# -*- coding: utf-8 -*-
"""CSV and JSON writers shared by the scenario runner and the modules

Floats are written with 17 significant digits so that identical runs
produce byte-identical files.
"""
import csv
import json

import numpy as np


def fmt(val):
    "Format a number for CSV output"
    if isinstance(val, (bool, np.bool_)):
        return 'true' if val else 'false'
    if isinstance(val, (int, np.integer)):
        return '%d' % val
    if isinstance(val, (float, np.floating)):
        return '%.17g' % val
    return str(val)


def write_csv(path, header, rows):
    """Write a comma-separated file with a header row

    :param path: output file path
    :param header: list of column names
    :param rows: iterable of row sequences
    """
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(val) for val in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(key): _jsonable(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(val) for val in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def write_json(path, objmap):
    """Dump a map to a JSON file with sorted keys

    :param path: output file path
    :param objmap: dictionary, possibly holding numpy values
    """
    with open(path, 'w') as f:
        json.dump(_jsonable(objmap), f, indent=2, sort_keys=True)
        f.write('\n')
