"""Field snapshots: a JSON container (grid metadata + values) and CSV export."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .grid import Field, Grid

SNAPSHOT_VERSION = 1


def field_to_dict(field: Field, name: str = "field") -> dict:
    vals = field.values
    out = {"snapshot_version": SNAPSHOT_VERSION, "name": name,
           "grid": field.grid.to_dict(), "dtype": "complex" if field.is_complex else "real"}
    if field.is_complex:
        out["real"] = vals.real.ravel().tolist()
        out["imag"] = vals.imag.ravel().tolist()
    else:
        out["values"] = vals.ravel().tolist()
    return out


def field_from_dict(d: dict) -> Field:
    grid = Grid.from_dict(d["grid"])
    if d.get("dtype") == "complex":
        vals = np.asarray(d["real"]) + 1j * np.asarray(d["imag"])
    else:
        vals = np.asarray(d["values"], dtype=float)
    if vals.size != grid.size:
        raise ValueError(f"snapshot has {vals.size} values, grid needs {grid.size}")
    return Field(grid, vals.reshape(grid.shape))


def save_field(field: Field, path, name: str = "field") -> Path:
    path = Path(path)
    path.write_text(json.dumps(field_to_dict(field, name), sort_keys=True))
    return path


def load_field(path) -> Field:
    return field_from_dict(json.loads(Path(path).read_text()))


def export_csv(field: Field, path) -> Path:
    """One row per grid point: coordinates then value (real, imag if complex)."""
    path = Path(path)
    grid = field.grid
    mesh = np.meshgrid(*[a.nodes for a in grid.axes], indexing="ij")
    cols = [m.ravel() for m in mesh]
    header = list(grid.names)
    if field.is_complex:
        cols += [field.values.real.ravel(), field.values.imag.ravel()]
        header += ["real", "imag"]
    else:
        cols.append(field.values.ravel())
        header.append("value")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])
    return path
