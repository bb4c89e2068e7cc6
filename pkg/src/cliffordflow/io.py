"""Deterministic file output: field snapshots, tables and JSON summaries.

Every CSV gets a sidecar ``<stem>.meta.json``; JSON files embed a ``meta`` key.
Floats are written with ``repr`` so identical runs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from . import __version__
from .grids import Field, ReducedGrid

ARTIFACT = "cliffordflow"


def meta_block(command: str | None = None, config: dict | None = None, **extra) -> dict:
    m = {"artifact": ARTIFACT, "version": __version__}
    if command is not None:
        m["command"] = command
    if config is not None:
        m["config"] = config
    m.update(extra)
    return m


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, Path):
        return str(x)
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def sidecar_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".meta.json")


def write_json(path, obj: dict, meta: dict | None = None) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    body = dict(obj)
    if meta is not None:
        body["meta"] = meta
    p.write_text(dumps(body))
    return p


def write_csv(path, header, rows, meta: dict | None = None) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    if meta is not None:
        sidecar_path(p).write_text(dumps(meta))
    return p


def write_text(path, text: str, meta: dict | None = None) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)
    if meta is not None:
        sidecar_path(p).write_text(dumps(meta))
    return p


def field_columns(grid: ReducedGrid) -> list[str]:
    if grid.kind == "disk":
        return ["s", "theta", "u"]
    return ["alpha" if grid.kind == "latitude_alpha" else "s", "u"]


def write_field(path, field: Field, meta: dict | None = None) -> Path:
    """Snapshot CSV (coordinates then u) with a sidecar carrying n, epsilon and the grid."""
    g = field.grid
    coords = g.coordinates()
    rows = zip(*coords, field.values)
    side = {"n": g.n, "epsilon": field.eps, **g.describe()}
    if meta is not None:
        side["meta"] = meta
    return write_csv(path, field_columns(g), rows, side)


def read_field(path) -> Field:
    p = Path(path)
    side = json.loads(sidecar_path(p).read_text())
    grid = ReducedGrid(int(side["n"]), side["grid_kind"], int(side["N_s"]), int(side.get("N_theta", 1)))
    data = np.loadtxt(p, delimiter=",", skiprows=1, ndmin=2)
    return Field(grid, data[:, -1], float(side["epsilon"]))
