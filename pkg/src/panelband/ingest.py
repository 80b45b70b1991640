"""Long-format records to panels by local linear kernel smoothing.

Input rows are ``unit, period, position, value`` with ``position`` already
normalized to [0, 1] (e.g. day-of-year / 365).  Every ``(unit, period)`` cell
is smoothed independently onto a common grid; panels are indexed by sorted
periods (time) and sorted unit labels (panel dimension).
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._parallel import ordered_map
from .curves import Grid, PanelSeries, make_grid
from .errors import InvalidArgumentError, ParseError, SparseDataError, StructureError

__all__ = [
    "RawRecord",
    "SmoothConfig",
    "MISSING_TOKENS",
    "load_long_csv",
    "rule_of_thumb_bandwidth",
    "local_linear_smooth",
    "build_panel",
    "records_from_arrays",
]

MISSING_TOKENS = frozenset({"", "na", "nan", "null"})
COLUMNS = ("unit", "period", "position", "value")


@dataclass(frozen=True)
class RawRecord:
    unit: str
    period: int
    position: float
    value: float | None

    @property
    def missing(self) -> bool:
        return self.value is None


@dataclass(frozen=True)
class SmoothConfig:
    """Local linear smoother settings; ``bandwidth=None`` picks a rule of thumb per cell."""

    grid: Grid = field(default_factory=lambda: make_grid(101))
    bandwidth: float | None = None
    kernel: str = "epanechnikov"
    min_points: int = 3

    def __post_init__(self):
        if self.bandwidth is not None and not 0.0 < float(self.bandwidth) <= 1.0:
            raise InvalidArgumentError(f"bandwidth must lie in (0, 1], got {self.bandwidth!r}")
        if self.kernel.lower() != "epanechnikov":
            raise InvalidArgumentError(f"unsupported kernel {self.kernel!r}")
        if int(self.min_points) != self.min_points or self.min_points < 2:
            raise InvalidArgumentError("min_points must be an integer >= 2")


def load_long_csv(path) -> list[RawRecord]:
    """Parse a ``unit,period,position,value`` CSV; ``NA`` or blank values are missing."""
    path = Path(path)
    if not path.is_file():
        raise ParseError(f"no such file: {path}")
    records = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip().lower() for h in next(reader)]
        except StopIteration:
            raise ParseError("empty file, expected a header row", row=1) from None
        missing_cols = [c for c in COLUMNS if c not in header]
        if missing_cols:
            raise ParseError(f"header lacks columns {missing_cols}", row=1)
        idx = [header.index(c) for c in COLUMNS]
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", row=lineno)
            unit, period, position, value = (row[i].strip() for i in idx)
            try:
                period_v = int(period)
                pos_v = float(position)
                val_v = None if value.lower() in MISSING_TOKENS else float(value)
            except ValueError as exc:
                raise ParseError(str(exc), row=lineno) from None
            if not 0.0 <= pos_v <= 1.0:
                raise ParseError(f"position {pos_v} outside [0, 1]", row=lineno)
            if val_v is not None and not math.isfinite(val_v):
                val_v = None
            records.append(RawRecord(unit, period_v, pos_v, val_v))
    return records


def rule_of_thumb_bandwidth(positions) -> float:
    """``1.5 * sd(positions) * N^{-1/5}``, capped at 1."""
    x = np.asarray(positions, dtype=np.float64)
    if x.size < 2:
        return 1.0
    return float(min(1.0, 1.5 * x.std() * x.size ** -0.2))


def local_linear_smooth(points, cfg: SmoothConfig) -> np.ndarray:
    """Local linear fit with the Epanechnikov kernel at every grid point.

    ``points`` is an ``(N, 2)`` array-like of ``(position, value)``; rows with a
    missing (NaN/None) value are dropped.
    """
    pts = np.asarray(
        [(p, np.nan if v is None else v) for p, v in points] if not isinstance(points, np.ndarray) else points,
        dtype=np.float64,
    ).reshape(-1, 2)
    pts = pts[np.isfinite(pts[:, 1])]
    x, y = pts[:, 0], pts[:, 1]
    h = cfg.bandwidth if cfg.bandwidth is not None else rule_of_thumb_bandwidth(x)
    u = cfg.grid.points
    d = x[None, :] - u[:, None]  # (G, N)
    t = d / h
    w = np.where(np.abs(t) <= 1.0, 0.75 * (1.0 - t * t), 0.0)
    support = (w > 0).sum(axis=1)
    s0 = w.sum(axis=1)
    s1 = (w * d).sum(axis=1)
    s2 = (w * d * d).sum(axis=1)
    denom = s0 * s2 - s1 * s1
    bad = (support < cfg.min_points) | ~(denom > 1e-12 * np.maximum(s0 * s2, np.finfo(float).tiny))
    if np.any(bad):
        g = int(np.argmax(bad))
        raise SparseDataError(
            f"only {int(support[g])} usable points within bandwidth {h:.4g} of grid point u={u[g]:.4g}"
        )
    wy = w @ y
    wdy = (w * d) @ y
    return (s2 * wy - s1 * wdy) / denom


def build_panel(
    records: Iterable[RawRecord], cfg: SmoothConfig, *, threads: int | None = None
) -> tuple[PanelSeries, list[str], list[int]]:
    """Smooth every ``(unit, period)`` cell into an ``n x r x G`` panel."""
    cells: dict[tuple[str, int], list[tuple[float, float]]] = defaultdict(list)
    for rec in records:
        cells[(rec.unit, rec.period)].append((rec.position, np.nan if rec.value is None else rec.value))
    if not cells:
        raise StructureError("no records")
    units = sorted({u for u, _ in cells})
    periods = sorted({p for _, p in cells})
    missing = [(u, p) for p in periods for u in units if (u, p) not in cells]
    if missing:
        shown = ", ".join(f"({u}, {p})" for u, p in missing[:10])
        more = "" if len(missing) <= 10 else f" and {len(missing) - 10} more"
        raise StructureError(f"index set is not rectangular; missing cells {shown}{more}", missing)
    keys = [(u, p) for p in periods for u in units]

    def smooth(key):
        try:
            return local_linear_smooth(np.asarray(cells[key], dtype=np.float64), cfg)
        except SparseDataError as exc:
            raise SparseDataError(f"cell (unit={key[0]}, period={key[1]}): {exc}") from None

    curves = ordered_map(smooth, keys, threads)
    data = np.asarray(curves).reshape(len(periods), len(units), cfg.grid.count)
    return PanelSeries(data, cfg.grid), units, periods


def records_from_arrays(unit: Sequence[str], period: Sequence[int], position, value) -> list[RawRecord]:
    """Convenience constructor for in-memory data."""
    out = []
    for u, p, x, v in zip(unit, period, position, value):
        v = None if v is None or (isinstance(v, float) and math.isnan(v)) else float(v)
        out.append(RawRecord(str(u), int(p), float(x), v))
    return out
