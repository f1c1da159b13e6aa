"""CSV field files and JSON reports.

Field CSVs carry a header ``x[,y],value`` (or ``x[,y],re,im`` for complex
fields), nodes in row-major order and floats at 17 significant digits, so
writing and reading back is the identity.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .grid import PeriodicGrid


def fmt(v) -> str:
    return format(float(v), ".17g")


def write_field(path, grid: PeriodicGrid, values, columns=None):
    """Write a scalar (real or complex) field on ``grid`` to ``path``."""
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise ConfigError(f"field shape {values.shape} does not match grid {grid.shape}")
    axes = ["x", "y"][: grid.dim]
    cplx = np.iscomplexobj(values)
    if columns is None:
        columns = ["re", "im"] if cplx else ["value"]
    X = grid.coords().reshape(grid.dim, -1)
    flat = values.reshape(-1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(axes + list(columns))
        for j in range(flat.size):
            xs = [fmt(X[a, j]) for a in range(grid.dim)]
            if cplx:
                w.writerow(xs + [fmt(flat[j].real), fmt(flat[j].imag)])
            else:
                w.writerow(xs + [fmt(flat[j])])
    return Path(path)


def write_vector_field(path, grid: PeriodicGrid, u):
    """Write a vector field (e.g. a displacement) with one column per axis."""
    u = np.asarray(u).reshape((grid.dim,) + grid.shape)
    axes = ["x", "y"][: grid.dim]
    X = grid.coords().reshape(grid.dim, -1)
    U = u.reshape(grid.dim, -1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(axes + [f"d{a}" for a in axes])
        for j in range(U.shape[1]):
            w.writerow([fmt(X[a, j]) for a in range(grid.dim)]
                       + [fmt(U[a, j]) for a in range(grid.dim)])
    return Path(path)


def read_table(path):
    """Return ``(header, rows)`` with rows as a float array."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        try:
            header = next(r)
        except StopIteration:
            raise ConfigError(f"{path}: empty CSV file") from None
        rows = [[float(v) for v in row] for row in r if row]
    return [h.strip() for h in header], np.array(rows, dtype=float)


def read_field(path):
    """Read a field CSV; returns ``(grid, values)`` (complex if re,im columns)."""
    header, rows = read_table(path)
    dim = 2 if len(header) > 1 and header[1] == "y" else 1
    if header[0] != "x" or len(header) < dim + 1:
        raise ConfigError(f"{path}: header must start with x[,y], got {header}")
    npts = rows.shape[0]
    n = int(round(npts ** (1.0 / dim)))
    if n ** dim != npts:
        raise ConfigError(f"{path}: {npts} rows is not a square grid")
    length = n * (rows[1, dim - 1] - rows[0, dim - 1]) if n > 1 else 1.0
    # snap to the nominal length so spacing*n == length exactly
    length = float(np.round(length, 12))
    grid = PeriodicGrid(n, dim=dim, length=length)
    vals = rows[:, dim:]
    if vals.shape[1] == 2 and header[dim:] == ["re", "im"]:
        out = (vals[:, 0] + 1j * vals[:, 1]).reshape(grid.shape)
    elif vals.shape[1] == 1:
        out = vals[:, 0].reshape(grid.shape)
    else:
        out = vals.T.reshape((vals.shape[1],) + grid.shape)
    return grid, out


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj) -> str:
    """Deterministic JSON (sorted keys, repr-exact floats)."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj))
    return Path(path)


def write_series(path, columns: dict):
    """Write equal-length 1D series as CSV columns."""
    names = list(columns)
    data = [np.asarray(columns[k], dtype=float) for k in names]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*data):
            w.writerow([fmt(v) for v in row])
    return Path(path)
