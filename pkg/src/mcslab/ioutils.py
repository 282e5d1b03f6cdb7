"""Deterministic text output: delimited tables, sanitized JSON, operator
dumps, and checksums.

Every writer emits LF newlines and 17-significant-digit float text so
values round-trip exactly and repeated runs with the same seed produce
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgumentError


def fmt(value) -> str:
    """Float text at 17 significant digits, enough to round-trip float64."""
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return "%.17g" % v


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    """Comma-delimited table with a header row and LF line endings."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    return p


def _sanitize(obj):
    """Replace non-finite floats with strings so the JSON stays parseable."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, payload: dict) -> Path:
    """Sorted-key JSON with sanitized non-finite values, LF-terminated."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_sanitize(payload), indent=2, sort_keys=True)
    with open(p, "w", newline="\n") as fh:
        fh.write(text + "\n")
    return p


def sha256_of(path) -> str:
    """Hex digest of a file's bytes."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def dump_operator(path, matrix: np.ndarray, seed: int) -> Path:
    """Write a measurement matrix as text: header line "M N seed", then
    one comma-delimited row of entries per matrix row."""
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2:
        raise InvalidArgumentError(f"matrix must be 2-d, got ndim={mat.ndim}")
    m, n = mat.shape
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", newline="\n") as fh:
        fh.write(f"{m} {n} {int(seed)}\n")
        for i in range(m):
            fh.write(",".join(fmt(v) for v in mat[i]) + "\n")
    return p


def load_operator(path) -> tuple[np.ndarray, int]:
    """Inverse of dump_operator; returns (matrix, seed)."""
    with open(path, "r") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise InvalidArgumentError(
                f"operator file header must be 'M N seed', got {header!r}"
            )
        m, n, seed = int(header[0]), int(header[1]), int(header[2])
        rows = np.empty((m, n), dtype=float)
        for i in range(m):
            line = fh.readline()
            if not line:
                raise InvalidArgumentError(f"operator file ends after {i} of {m} rows")
            vals = line.rstrip("\n").split(",")
            if len(vals) != n:
                raise InvalidArgumentError(
                    f"row {i} has {len(vals)} entries, expected {n}"
                )
            rows[i] = [float(v) for v in vals]
    return rows, seed
