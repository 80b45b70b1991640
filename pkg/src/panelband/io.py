"""File formats: panel tensors, key-value configs and delimited reports.

Panel tensor layout (all integers and floats little-endian)::

    8 bytes   magic  b"PBPANEL1"
    3 x u64   n, r, G
    u64       L, length of a UTF-8 JSON label block
    L bytes   {"units": [...], "periods": [...]} (either key optional)
    G x f64   grid points
    n*r*G f64 data, row-major in (i, j, g)
"""

from __future__ import annotations

import configparser
import csv
import json
import struct
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .curves import Grid, PanelSeries
from .errors import DataError, InvalidArgumentError

__all__ = [
    "MAGIC",
    "write_panel",
    "read_panel",
    "read_kv_config",
    "write_kv_config",
    "write_json",
    "write_bands_csv",
    "write_matrix_csv",
    "write_column_csv",
    "write_rows_csv",
]

MAGIC = b"PBPANEL1"
_HEAD = struct.Struct("<8sQQQQ")


def write_panel(path, panel: PanelSeries, units: Sequence[str] | None = None, periods: Sequence | None = None) -> None:
    labels: dict[str, Any] = {}
    if units is not None:
        labels["units"] = [str(u) for u in units]
    if periods is not None:
        labels["periods"] = [int(p) if isinstance(p, (int, np.integer)) else str(p) for p in periods]
    blob = json.dumps(labels, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(MAGIC, panel.n, panel.r, panel.G, len(blob)))
        fh.write(blob)
        fh.write(panel.grid.points.astype("<f8").tobytes())
        fh.write(np.ascontiguousarray(panel.data, dtype="<f8").tobytes())


def read_panel(path) -> tuple[PanelSeries, dict]:
    """Return the panel and its label block."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such panel file: {path}")
    raw = path.read_bytes()
    if len(raw) < _HEAD.size:
        raise DataError(f"{path}: truncated header")
    magic, n, r, G, L = _HEAD.unpack_from(raw)
    if magic != MAGIC:
        raise DataError(f"{path}: not a panel tensor file")
    off = _HEAD.size
    expected = off + L + 8 * G + 8 * n * r * G
    if len(raw) != expected:
        raise DataError(f"{path}: expected {expected} bytes, found {len(raw)}")
    labels = json.loads(raw[off : off + L].decode("utf-8")) if L else {}
    off += L
    grid = np.frombuffer(raw, dtype="<f8", count=G, offset=off)
    off += 8 * G
    data = np.frombuffer(raw, dtype="<f8", count=n * r * G, offset=off).reshape(n, r, G)
    try:
        panel = PanelSeries(data.astype(np.float64), Grid(grid.astype(np.float64)))
    except InvalidArgumentError as exc:
        raise DataError(f"{path}: {exc}") from None
    return panel, labels


def read_kv_config(path) -> dict[str, str]:
    """Flat ``key = value`` file (``#`` comments); keys are case-sensitive."""
    path = Path(path)
    if not path.is_file():
        raise InvalidArgumentError(f"no such config file: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str  # keep K_trunc as written
    try:
        parser.read_string("[config]\n" + path.read_text(encoding="utf-8"))
    except configparser.Error as exc:
        raise InvalidArgumentError(f"{path}: {exc}") from None
    return dict(parser["config"])


def write_kv_config(path, values: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for k, v in values.items():
            fh.write(f"{k} = {v}\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    if isinstance(obj, float) and not np.isfinite(obj):
        return None if np.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return "NA" if np.isnan(x) else repr(float(x))
    return str(x)


def write_bands_csv(path, grid: Grid, lower, center, upper, labels: Sequence[str] | None = None) -> None:
    """Wide layout: ``u`` then ``lower_j, center_j, upper_j`` per panel."""
    lower, center, upper = (np.asarray(a) for a in (lower, center, upper))
    r = center.shape[0]
    labels = list(labels) if labels is not None else [str(j + 1) for j in range(r)]
    header = ["u"]
    for lab in labels:
        header += [f"lower_{lab}", f"center_{lab}", f"upper_{lab}"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for g, u in enumerate(grid.points):
            row = [_fmt(u)]
            for j in range(r):
                row += [_fmt(lower[j, g]), _fmt(center[j, g]), _fmt(upper[j, g])]
            w.writerow(row)


def write_matrix_csv(path, matrix, labels: Sequence[str]) -> None:
    """Square matrix with row and column labels; NaN cells are written as ``NA``."""
    matrix = np.asarray(matrix)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([""] + list(labels))
        for lab, row in zip(labels, matrix):
            w.writerow([lab] + [_fmt(v) for v in row])


def write_column_csv(path, name: str, values: Iterable[float]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([name])
        for v in values:
            w.writerow([_fmt(v)])


def write_rows_csv(path, rows: Sequence[dict]) -> None:
    if not rows:
        Path(path).write_text("")
        return
    fields: list[str] = []
    for row in rows:
        fields += [k for k in row if k not in fields]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(v) for k, v in row.items()})
