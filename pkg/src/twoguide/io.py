"""CSV and report writers.

Every CSV starts with ``# key=value`` metadata lines followed by one header
row.  Floats are written with ``repr`` so identical inputs give identical
bytes; masked or undefined cells are empty fields.
"""
import csv
import math
import os
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .errors import ConfigError


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "" if math.isnan(x) else repr(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def write_csv(path, header, columns, metadata=None):
    """Write equal-length ``columns`` under ``header``; NaN becomes an empty field."""
    cols = [np.asarray(c) for c in columns]
    if len(cols) != len(header):
        raise ValueError("header and columns differ in length")
    n = len(cols[0])
    if any(len(c) != n for c in cols):
        raise ValueError("columns differ in length")
    with open(path, "w", newline="") as fh:
        for k, v in (metadata or {}).items():
            fh.write(f"# {k}={_cell(v)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        cells = [[_cell(x) for x in c.tolist()] for c in cols]
        w.writerows(zip(*cells))
    return Path(path)


def write_matrix_csv(path, row_label, row_values, col_values, matrix, metadata=None):
    """Rows are ``row_values``, columns ``col_values`` (header carries the values)."""
    header = [row_label] + [_cell(float(c)) for c in col_values]
    columns = [row_values] + [matrix[:, j] for j in range(matrix.shape[1])]
    return write_csv(path, header, columns, metadata)


def read_csv(path):
    """(metadata dict, header list, rows of strings)."""
    meta = {}
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        k, _, v = lines[i][1:].strip().partition("=")
        meta[k] = v
        i += 1
    rows = list(csv.reader(lines[i:]))
    return meta, rows[0], rows[1:]


def read_columns(path):
    """(metadata, {column: float array}) with empty fields read as NaN."""
    meta, header, rows = read_csv(path)
    data = {h: np.array([float(r[j]) if r[j] != "" else np.nan for r in rows]) for j, h in enumerate(header)}
    return meta, data


def write_report(path, items):
    """Plain ``key=value`` report, one entry per line, in the given order."""
    with open(path, "w") as fh:
        for k, v in items.items():
            fh.write(f"{k}={_cell(v)}\n")
    return Path(path)


def read_report(path):
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line and not line.startswith("#"):
                k, _, v = line.partition("=")
                out[k] = v
    return out


@contextmanager
def locked_dir(directory):
    """Create ``directory`` and hold an exclusive ``.lock`` file in it."""
    d = Path(directory)
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {d}: {exc}") from None
    lock = d / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ConfigError(f"output directory {d} is locked by another run ({lock} exists)") from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield d
    finally:
        lock.unlink(missing_ok=True)
