"""Multiplier block bootstrap for sup-type statistics of panel means.

For block size ``m`` the block means ``T_i`` average ``m`` consecutive curves
and a bootstrap replicate is

    Phi(u) = sqrt(m / (n - m)) * sum_i [T_i(u) - mean(u)] * N_i,   N_i ~ N(0, 1).

The multipliers of replicate ``b`` come from the substream
``stream.child(b)``, and replicates are evaluated in fixed-size chunks, so the
replicate list is identical for any worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._parallel import ordered_map
from .curves import PanelSeries, make_grid, sample_mean_sd, trapezoid_weights
from .errors import DegenerateScaleError, InvalidArgumentError
from .simgen import BOOT, RngStream

__all__ = [
    "BootstrapConfig",
    "BlockMeans",
    "MvCandidates",
    "REPLICATE_CHUNK",
    "SCALE_FLOOR",
    "block_means",
    "centered_block_means",
    "multiplier_draw",
    "bootstrap_replicates",
    "order_statistic",
    "scale_inverse",
    "bootstrap_sup_quantile",
    "default_candidates",
    "mv_criterion",
    "mv_select",
]

REPLICATE_CHUNK = 64
SCALE_FLOOR = 1e-10


@dataclass(frozen=True)
class BootstrapConfig:
    """Block size ``m`` (``None`` selects it by minimum volatility), ``B`` and level."""

    m: int | None = None
    B: int = 500
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.m is not None:
            if int(self.m) != self.m or self.m < 1:
                raise InvalidArgumentError(f"block size must be a positive integer, got {self.m!r}")
            object.__setattr__(self, "m", int(self.m))
        if int(self.B) != self.B or self.B < 1:
            raise InvalidArgumentError(f"B must be a positive integer, got {self.B!r}")
        object.__setattr__(self, "B", int(self.B))
        if not 0.0 <= float(self.alpha) < 1.0:
            raise InvalidArgumentError(f"alpha must lie in [0, 1), got {self.alpha!r}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self) -> dict:
        return {"m": self.m, "B": self.B, "alpha": self.alpha, "seed": self.seed}


@dataclass(frozen=True)
class BlockMeans:
    data: np.ndarray
    m: int


@dataclass(frozen=True)
class MvCandidates:
    """Equally spaced candidate block sizes ``m_1 < ... < m_k``."""

    blocks: tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(int(b) for b in self.blocks)
        if not blocks:
            raise InvalidArgumentError("need at least one candidate block size")
        if any(b < 1 for b in blocks):
            raise InvalidArgumentError("candidate block sizes must be positive")
        if len(blocks) >= 2:
            steps = np.diff(blocks)
            if np.any(steps <= 0) or np.any(steps != steps[0]):
                raise InvalidArgumentError("candidates must be strictly increasing and equally spaced")
            if 2 * blocks[0] - blocks[1] < 1:
                raise InvalidArgumentError("lower extension 2*m_1 - m_2 must be >= 1")
        object.__setattr__(self, "blocks", blocks)

    @property
    def extended(self) -> tuple[int, ...]:
        b = self.blocks
        if len(b) == 1:
            return b
        return (2 * b[0] - b[1],) + b + (2 * b[-1] - b[-2],)


def _array(panel) -> np.ndarray:
    return panel.data if isinstance(panel, PanelSeries) else np.asarray(panel, dtype=np.float64)


def _check_block(m: int, n: int) -> None:
    if int(m) != m or not 1 <= m <= n - 1:
        raise InvalidArgumentError(f"block size m={m} outside [1, {n - 1}] for n={n}")


def block_means(panel, m: int) -> BlockMeans:
    """The ``n - m`` averages of ``m`` consecutive curves."""
    x = _array(panel)
    n = x.shape[0]
    _check_block(m, n)
    windows = sliding_window_view(x, m, axis=0)[: n - m]
    return BlockMeans(windows.mean(axis=-1), int(m))


def centered_block_means(panel, m: int) -> np.ndarray:
    """Block means minus the full-sample mean, shape ``(n - m, r, G)``."""
    x = _array(panel)
    return block_means(x, m).data - x.mean(axis=0)


def multiplier_draw(panel, blocks: BlockMeans, multipliers) -> np.ndarray:
    """One bootstrap function ``Phi_m`` for given multipliers, shape ``r x G``."""
    x = _array(panel)
    n = x.shape[0]
    mult = np.asarray(multipliers, dtype=np.float64)
    k = blocks.data.shape[0]
    if mult.shape != (k,):
        raise InvalidArgumentError(f"expected {k} multipliers, got shape {mult.shape}")
    centered = blocks.data - x.mean(axis=0)
    m = blocks.m
    return math.sqrt(m / (n - m)) * np.tensordot(mult, centered, axes=(0, 0))


def bootstrap_replicates(
    centered: np.ndarray,
    m: int,
    n: int,
    B: int,
    stream: RngStream,
    reducer: Callable[[np.ndarray], np.ndarray],
    threads: int | None = None,
) -> np.ndarray:
    """Reduce ``B`` bootstrap functions to one number each.

    ``centered`` holds the centered block means ``(n - m, r, G)``; ``reducer``
    maps a chunk of bootstrap functions ``(b, r, G)`` to ``(b,)`` values.
    """
    k = centered.shape[0]
    flat = centered.reshape(k, -1)
    factor = math.sqrt(m / (n - m))
    shape = centered.shape[1:]

    def run(start: int) -> np.ndarray:
        stop = min(start + REPLICATE_CHUNK, B)
        mult = np.empty((stop - start, k))
        for row, b in enumerate(range(start, stop)):
            mult[row] = stream.child(b).generator().standard_normal(k)
        phi = (mult @ flat).reshape((stop - start,) + shape)
        phi *= factor
        return np.asarray(reducer(phi), dtype=np.float64)

    chunks = ordered_map(run, range(0, B, REPLICATE_CHUNK), threads)
    return np.concatenate(chunks)


def order_statistic(replicates, alpha: float) -> float:
    """The ``floor((1 - alpha) B)``-th smallest replicate, index clamped to [1, B]."""
    reps = np.sort(np.asarray(replicates, dtype=np.float64))
    B = reps.size
    if B == 0:
        raise InvalidArgumentError("no replicates")
    # guard against (1 - alpha) * B landing a hair below an integer
    idx = int(math.floor((1.0 - alpha) * B + 1e-9))
    idx = min(max(idx, 1), B)
    return float(reps[idx - 1])


def scale_inverse(scale, reference: float | None = None) -> np.ndarray:
    """Reciprocal of ``scale`` with entries under the floor mapped to 0.

    The floor is ``SCALE_FLOOR * reference`` (default: the largest scale).
    """
    scale = np.asarray(scale, dtype=np.float64)
    ref = float(np.max(scale)) if reference is None else float(reference)
    if not ref > 0.0:
        raise DegenerateScaleError("scale is zero everywhere")
    ok = scale >= SCALE_FLOOR * ref
    inv = np.zeros_like(scale)
    np.divide(1.0, scale, out=inv, where=ok)
    return inv


def _sup_reducer(inv_scale: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    def reduce(phi: np.ndarray) -> np.ndarray:
        return np.abs(phi * inv_scale).reshape(phi.shape[0], -1).max(axis=1)

    return reduce


def bootstrap_sup_quantile(
    panel,
    cfg: BootstrapConfig,
    scale=None,
    *,
    stream: RngStream | None = None,
    threads: int | None = None,
) -> tuple[float, np.ndarray]:
    """Quantile and replicates of ``max_j sup_u |Phi_{m,j}(u)| / scale_j(u)``.

    ``scale`` defaults to the panel's pointwise standard deviation; ``cfg.m``
    of ``None`` selects the block size by :func:`mv_select`.
    """
    x = _array(panel)
    n = x.shape[0]
    if scale is None:
        scale = sample_mean_sd(x)[1]
    scale = np.asarray(scale, dtype=np.float64)
    if scale.shape != x.shape[1:]:
        raise InvalidArgumentError(f"scale shape {scale.shape} does not match panel {x.shape[1:]}")
    inv = scale_inverse(scale)
    m = cfg.m if cfg.m is not None else mv_select(x)
    _check_block(m, n)
    stream = stream if stream is not None else RngStream(cfg.seed, (0, BOOT))
    reps = bootstrap_replicates(centered_block_means(x, m), m, n, cfg.B, stream, _sup_reducer(inv), threads)
    return order_statistic(reps, cfg.alpha), reps


def default_candidates(n: int) -> MvCandidates:
    """Integers from 2 to ``ceil(3 n^{1/3})``, trimmed so every extension fits."""
    upper = min(math.ceil(3.0 * n ** (1.0 / 3.0)), n - 2)
    if upper < 2:
        return MvCandidates((1,))
    if upper == 2:
        return MvCandidates((2,))
    return MvCandidates(tuple(range(2, upper + 1)))


def _variance_functional(
    csum: np.ndarray, mean: np.ndarray, m: int, printed: bool, pairwise: bool
) -> np.ndarray:
    n = csum.shape[0] - 1
    centered = (csum[m:n] - csum[: n - m]) / m - mean
    ratio = m / (n - m)
    factor = math.sqrt(ratio) if printed else ratio
    if not pairwise:
        return factor * np.einsum("lrg,lrg->rg", centered, centered)
    # sum_l (c_j - c_k)^2 from the per-grid-point Gram matrices
    gram = np.matmul(centered.transpose(2, 1, 0), centered.transpose(2, 0, 1))  # (G, r, r)
    diag = np.diagonal(gram, axis1=1, axis2=2)  # (G, r)
    j, k = np.triu_indices(centered.shape[1], 1)
    return factor * (diag[:, j] + diag[:, k] - 2.0 * gram[:, j, k]).T


def mv_criterion(
    panel,
    candidates: MvCandidates | Sequence[int] | None = None,
    *,
    printed: bool = False,
    pairwise: bool = False,
) -> tuple[MvCandidates, np.ndarray]:
    """Volatility ``Xi^{(i)}`` of the conditional-variance functional per candidate.

    ``printed=True`` uses the square-root prefactor variant; ``pairwise=True``
    evaluates the functional on all differences ``X_j - X_k``, ``j < k``.
    Returns the candidate set and one volatility per candidate (empty when
    ``k = 1``).
    """
    x = _array(panel)
    n = x.shape[0]
    if candidates is None:
        candidates = default_candidates(n)
    elif not isinstance(candidates, MvCandidates):
        candidates = MvCandidates(tuple(candidates))
    ext = candidates.extended
    too_big = [m for m in ext if m > n - 1]
    if too_big:
        raise InvalidArgumentError(f"candidate block sizes {too_big} exceed n - 1 = {n - 1}")
    if len(candidates.blocks) == 1:
        return candidates, np.empty(0)
    w = trapezoid_weights(make_grid(x.shape[2]))
    # cumulative sums give every block mean in O(1); the criterion tolerates the rounding
    csum = np.concatenate([np.zeros((1,) + x.shape[1:]), np.cumsum(x, axis=0)])
    mean = x.mean(axis=0)
    xi = np.stack([_variance_functional(csum, mean, m, printed, pairwise) for m in ext])
    vol = np.empty(len(candidates.blocks))
    for i in range(1, len(ext) - 1):
        sd = xi[i - 1 : i + 2].std(axis=0, ddof=1)
        vol[i - 1] = float((sd @ w).sum())
    return candidates, vol


def mv_select(
    panel,
    candidates: MvCandidates | Sequence[int] | None = None,
    *,
    printed: bool = False,
    pairwise: bool = False,
) -> int:
    """Minimum-volatility block size; ties go to the smallest candidate."""
    cands, vol = mv_criterion(panel, candidates, printed=printed, pairwise=pairwise)
    if vol.size == 0:
        return cands.blocks[0]
    return cands.blocks[int(np.argmin(vol))]
