"""Readers for run.csv, sweep.csv, report.json and FTSNAP01 snapshot files."""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

RUN_COLUMNS = ("t", "mass", "energy_hs", "entropy", "dissipation", "support_radius", "min_u", "max_u")
SNAPSHOT_MAGIC = b"FTSNAP01"


class SchemaError(ValueError):
    """Input file does not match the documented layout."""


def _metadata(line: str) -> dict[str, str]:
    if not line.startswith("#"):
        raise SchemaError("missing metadata line")
    out = {}
    for item in line[1:].split():
        key, _, value = item.partition("=")
        out[key] = value
    return out


def _read_table(path, required):
    path = Path(path)
    with path.open(newline="") as fh:
        first = fh.readline()
        if not first:
            raise SchemaError(f"{path}: empty file")
        meta = _metadata(first.strip())
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: no header row")
    header, body = rows[0], rows[1:]
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
    return meta, header, body


def read_run_csv(path) -> dict:
    """Columns of run.csv as float arrays, plus 'config_hash' and 'seed'."""
    meta, header, body = _read_table(path, RUN_COLUMNS)
    data = np.array([[float(x) for x in row] for row in body], dtype=float).reshape(len(body), len(header))
    out = {name: data[:, header.index(name)] for name in RUN_COLUMNS}
    out["config_hash"] = meta.get("config_hash", "")
    out["seed"] = int(meta.get("seed", "0"))
    return out


def read_sweep_csv(path) -> list[dict]:
    """Rows of sweep.csv; numeric fields as floats, empty fields as None."""
    cols = ("row", "n", "s", "N", "epsilon", "delta", "gamma", "status", "fitted_exponent", "predicted_exponent")
    _, header, body = _read_table(path, cols)
    rows = []
    for raw in body:
        rec = {}
        for key, value in zip(header, raw):
            if key in ("status", "error"):
                rec[key] = value
            elif value == "":
                rec[key] = None
            else:
                rec[key] = float(value)
        rows.append(rec)
    return rows


def read_report(path) -> dict:
    with Path(path).open() as fh:
        return json.load(fh)


@dataclass
class Snapshot:
    sample: int
    t: float
    modes: tuple[int, ...]
    lengths: tuple[float, ...]
    coefficients: np.ndarray  # shape == modes


def read_snapshot(path) -> Snapshot:
    raw = Path(path).read_bytes()
    if raw[:8] != SNAPSHOT_MAGIC:
        raise SchemaError(f"{path}: bad magic")
    (dim,) = struct.unpack_from("<I", raw, 8)
    off = 12
    modes = struct.unpack_from(f"<{dim}I", raw, off)
    off += 4 * dim
    lengths = struct.unpack_from(f"<{dim}d", raw, off)
    off += 8 * dim
    sample, t = struct.unpack_from("<Qd", raw, off)
    off += 16
    count = int(np.prod(modes))
    if len(raw) != off + 8 * count:
        raise SchemaError(f"{path}: expected {count} coefficients")
    coeffs = np.frombuffer(raw, dtype="<f8", count=count, offset=off).reshape(modes)
    return Snapshot(int(sample), float(t), tuple(modes), tuple(lengths), coeffs.copy())


def _axis_matrix(length: float, modes: int, x: np.ndarray) -> np.ndarray:
    k = np.arange(modes)
    norm = np.where(k == 0, 1.0 / np.sqrt(length), np.sqrt(2.0 / length))
    return norm[None, :] * np.cos(np.pi * np.outer(x, k) / length)


def snapshot_to_grid(snap: Snapshot, points: int | tuple[int, ...] = 256):
    """Evaluate a snapshot on a midpoint grid; returns (axes, values)."""
    if isinstance(points, int):
        points = (points,) * len(snap.modes)
    axes = [(np.arange(p) + 0.5) * L / p for p, L in zip(points, snap.lengths)]
    values = snap.coefficients
    for a, (x, L, m) in enumerate(zip(axes, snap.lengths, snap.modes)):
        values = np.moveaxis(np.tensordot(_axis_matrix(L, m, x), values, axes=([1], [a])), 0, a)
    return axes, values
