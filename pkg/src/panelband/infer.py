"""Joint simultaneous confidence bands and the test of parallel mean curves."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .boot import (
    SCALE_FLOOR,
    BootstrapConfig,
    _check_block,
    bootstrap_replicates,
    bootstrap_sup_quantile,
    centered_block_means,
    mv_select,
    order_statistic,
)
from .curves import Grid, PanelSeries, integrate, make_grid, sample_mean_sd
from .errors import InvalidArgumentError
from .simgen import BOOT, RngStream

__all__ = [
    "BandSet",
    "ParallelismResult",
    "jscb",
    "band_contains",
    "center_within_curve",
    "pair_indices",
    "parallelism_statistic",
    "parallelism_test",
    "fit_harmonics",
]


def _panel(panel) -> PanelSeries:
    return panel if isinstance(panel, PanelSeries) else PanelSeries(np.asarray(panel, dtype=np.float64))


@dataclass(frozen=True)
class BandSet:
    """Bands ``center +- halfwidth`` covering all ``r`` mean curves jointly."""

    center: np.ndarray
    halfwidth: np.ndarray
    quantile: float
    alpha: float
    m_used: int
    B_used: int
    grid: Grid
    replicates: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    @property
    def lower(self) -> np.ndarray:
        return self.center - self.halfwidth

    @property
    def upper(self) -> np.ndarray:
        return self.center + self.halfwidth


@dataclass(frozen=True)
class ParallelismResult:
    statistic: float
    pairwise: np.ndarray
    critical_value: float
    pairwise_pvalues: np.ndarray
    reject: bool
    alpha: float
    m_used: int
    B_used: int
    replicates: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "critical_value": self.critical_value,
            "alpha": self.alpha,
            "reject": self.reject,
            "m": self.m_used,
            "B": self.B_used,
            "min_pairwise_pvalue": float(np.nanmin(self.pairwise_pvalues)) if self.pairwise.shape[0] > 1 else None,
        }


def jscb(
    panel,
    cfg: BootstrapConfig,
    *,
    stream: RngStream | None = None,
    threads: int | None = None,
) -> BandSet:
    """Bands ``mean_j(u) +- c * sd_j(u) / sqrt(n)`` with ``c`` the bootstrap quantile."""
    panel = _panel(panel)
    mean, sd = sample_mean_sd(panel)
    if cfg.m is None:
        cfg = replace(cfg, m=mv_select(panel))
    q, reps = bootstrap_sup_quantile(panel, cfg, sd, stream=stream, threads=threads)
    half = q * sd / math.sqrt(panel.n)
    return BandSet(mean, half, q, cfg.alpha, cfg.m, cfg.B, panel.grid, reps)


def band_contains(bands: BandSet, candidates) -> tuple[bool, list[bool]]:
    """Whether each candidate curve lies inside its (closed) band everywhere."""
    cand = np.asarray(candidates, dtype=np.float64)
    if cand.ndim == 1 and cand.size == bands.center.shape[1]:
        cand = np.broadcast_to(cand, bands.center.shape)
    if cand.shape != bands.center.shape:
        raise InvalidArgumentError(f"candidates shape {cand.shape} does not match bands {bands.center.shape}")
    inside = (cand >= bands.lower) & (cand <= bands.upper)
    per_panel = [bool(v) for v in inside.all(axis=1)]
    return all(per_panel), per_panel


def center_within_curve(panel) -> np.ndarray:
    """Each curve minus its own integral over [0, 1]."""
    panel = _panel(panel)
    x = panel.data
    return x - integrate(x, panel.grid)[..., None]


def pair_indices(r: int) -> list[tuple[int, int]]:
    return [(j, k) for j in range(r) for k in range(j + 1, r)]


def _pair_blocks(W: np.ndarray):
    """Yield ``(j, D)`` with ``D[:, t] = W[:, j] - W[:, j + 1 + t]``."""
    for j in range(W.shape[1] - 1):
        yield j, W[:, j : j + 1, :] - W[:, j + 1 :, :]


def _reference_scale(W: np.ndarray) -> float:
    return float(np.max(np.sqrt(((W - W.mean(axis=0)) ** 2).mean(axis=0))))


def _pair_stats(W: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    n, r, G = W.shape
    P = r * (r - 1) // 2
    S = np.empty((P, G))
    V = np.empty((P, G))
    row = 0
    for _, D in _pair_blocks(W):
        k = D.shape[1]
        S[row : row + k] = D.sum(axis=0) / math.sqrt(n)
        V[row : row + k] = np.sqrt(((D - D.mean(axis=0)) ** 2).mean(axis=0))
        row += k
    ref = _reference_scale(W)
    floor = SCALE_FLOOR * ref
    ok = V >= floor if ref > 0 else np.zeros_like(V, dtype=bool)
    inv = np.zeros_like(V)
    np.divide(1.0, V, out=inv, where=ok)
    return S, V, inv, floor


def parallelism_statistic(panel) -> tuple[float, np.ndarray, np.ndarray]:
    """``T_n`` with the ``r x r`` pairwise sup-statistics and per-pair scales.

    Points where both the pair scale and the pair mean difference are below the
    floor count as 0; a vanishing scale under a non-vanishing difference gives
    an infinite ratio.
    """
    panel = _panel(panel)
    if panel.r < 2:
        raise InvalidArgumentError("the parallelism statistic needs r >= 2")
    if panel.n < 2:
        raise InvalidArgumentError("the parallelism statistic needs n >= 2")
    stat, pairwise, V, _ = _statistic(center_within_curve(panel))
    return stat, pairwise, V


def _statistic(W: np.ndarray):
    n, r, _ = W.shape
    S, V, inv, floor = _pair_stats(W)
    ratio = np.abs(S) * inv
    blowup = (inv == 0) & (np.abs(S) / math.sqrt(n) >= floor) & (floor > 0)
    ratio[blowup] = np.inf
    sups = ratio.max(axis=1)
    pairwise = np.full((r, r), np.nan)
    for p, (j, k) in enumerate(pair_indices(r)):
        pairwise[j, k] = pairwise[k, j] = sups[p]
    return float(sups.max()), pairwise, V, inv


def _pair_reducer(inv: np.ndarray, r: int):
    offsets = np.cumsum([0] + [r - 1 - j for j in range(r - 1)])

    def reduce(phi: np.ndarray) -> np.ndarray:
        best = np.zeros(phi.shape[0])
        for j in range(r - 1):
            d = phi[:, j : j + 1, :] - phi[:, j + 1 :, :]
            d *= inv[offsets[j] : offsets[j + 1]]
            np.maximum(best, np.abs(d).reshape(phi.shape[0], -1).max(axis=1), out=best)
        return best

    return reduce


def parallelism_test(
    panel,
    cfg: BootstrapConfig,
    *,
    stream: RngStream | None = None,
    threads: int | None = None,
) -> ParallelismResult:
    """Bootstrap test of parallel mean curves with pairwise p-values.

    Replicates take the sup jointly over all pairs and grid points; the same
    replicate list yields the critical value and every pairwise p-value
    ``(1 + #{replicates >= pairwise}) / (B + 1)``.
    """
    panel = _panel(panel)
    if panel.r < 2 or panel.n < 2:
        raise InvalidArgumentError("the parallelism test needs r >= 2 and n >= 2")
    W = center_within_curve(panel)
    n, r, _ = W.shape
    stat, pairwise, _, inv = _statistic(W)
    m = cfg.m if cfg.m is not None else mv_select(W, pairwise=True)
    _check_block(m, n)
    stream = stream if stream is not None else RngStream(cfg.seed, (0, BOOT))
    reps = bootstrap_replicates(centered_block_means(W, m), m, n, cfg.B, stream, _pair_reducer(inv, r), threads)
    crit = order_statistic(reps, cfg.alpha)
    srt = np.sort(reps)
    pvals = np.full((r, r), np.nan)
    for j, k in pair_indices(r):
        count = reps.size - np.searchsorted(srt, pairwise[j, k], side="left")
        pvals[j, k] = pvals[k, j] = (1.0 + count) / (reps.size + 1.0)
    return ParallelismResult(stat, pairwise, crit, pvals, bool(stat > crit), cfg.alpha, int(m), cfg.B, reps)


def fit_harmonics(curves, grid: Grid | None = None, order: int = 2) -> np.ndarray:
    """Least-squares fit of ``c + sum_{j<=order} a_j cos(2 pi j u) + b_j sin(2 pi j u)``."""
    y = np.atleast_2d(np.asarray(curves, dtype=np.float64))
    grid = grid if grid is not None else make_grid(y.shape[-1])
    u = grid.points
    cols = [np.ones_like(u)]
    for j in range(1, order + 1):
        cols += [np.cos(2 * np.pi * j * u), np.sin(2 * np.pi * j * u)]
    X = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(X, y.T, rcond=None)
    return (X @ coef).T
