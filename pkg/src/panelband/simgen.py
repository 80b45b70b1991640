"""Panel autoregressive / moving-average functional time series generators.

Both models share the innovation curves

    eps_{i,j}(u) = sum_{k=1}^{K} k^{-3} [cos(2 pi k u) + sin(2 pi k u)] eps_{i,j,k}

whose coefficient vectors are ``A eps'`` with ``A`` tridiagonal (1 on the
diagonal, 1/2 off it) and ``eps'`` i.i.d. N(0, 1) or sqrt(2/3) t_6.  The
observed panel is ``X_i = g + A_r e_i`` with the same tridiagonal mixing across
the ``r`` components, where ``e`` is AR(1) (PAR) or MA(1) (PMA) in ``i``.

Every random draw goes through :class:`RngStream`, a counter-based substream
keyed by ``(seed, stream_id)``, so results never depend on scheduling.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields, replace
from typing import Any, Mapping

import numpy as np
from scipy.signal import lfilter

from .curves import Grid, PanelSeries, make_grid
from .errors import InvalidArgumentError

__all__ = [
    "Model",
    "Dist",
    "SimConfig",
    "RngStream",
    "SIM",
    "BOOT",
    "MEAN",
    "draw_error",
    "draw_errors",
    "innovation_basis",
    "mix_coefficients",
    "innovation_curves",
    "innovation_covariance",
    "gen_innovations",
    "simulate_panel",
]

# stream purposes; the second-to-last component of a stream id
SIM = 0
BOOT = 1
MEAN = 2

_SEED_MASK = (1 << 64) - 1
T6_SCALE = np.sqrt(2.0 / 3.0)


class Model(str, enum.Enum):
    PAR = "PAR"
    PMA = "PMA"


class Dist(str, enum.Enum):
    Normal = "Normal"
    ScaledT6 = "ScaledT6"

    @classmethod
    def parse(cls, value) -> "Dist":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        for d in cls:
            if d.value.lower() == key:
                return d
        if key in {"n", "gauss", "gaussian", "norm"}:
            return cls.Normal
        if key in {"t6", "t", "scaledt"}:
            return cls.ScaledT6
        raise InvalidArgumentError(f"unknown innovation distribution {value!r}")


@dataclass(frozen=True)
class RngStream:
    """Deterministic random substream identified by ``(seed, stream_id)``."""

    seed: int
    stream_id: tuple[int, ...] = ()

    def child(self, *key: int) -> "RngStream":
        return RngStream(self.seed, tuple(self.stream_id) + tuple(int(k) for k in key))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed) & _SEED_MASK, spawn_key=tuple(self.stream_id))
        return np.random.Generator(np.random.PCG64(ss))


def _gen(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise InvalidArgumentError(f"expected an RngStream or Generator, got {type(rng).__name__}")


def draw_errors(dist, rng, size) -> np.ndarray:
    """Unit-variance innovation draws of the requested distribution."""
    dist = Dist.parse(dist)
    gen = _gen(rng)
    if dist is Dist.Normal:
        return gen.standard_normal(size)
    return gen.standard_t(6, size) * T6_SCALE


def draw_error(dist, rng) -> float:
    return float(draw_errors(dist, rng, None))


def innovation_basis(K: int, grid: Grid) -> np.ndarray:
    """``(K, G)`` matrix with rows ``k^{-3} (cos(2 pi k u) + sin(2 pi k u))``."""
    k = np.arange(1, K + 1, dtype=np.float64)
    arg = 2.0 * np.pi * np.outer(k, grid.points)
    return (np.cos(arg) + np.sin(arg)) * (k ** -3.0)[:, None]


def mix_coefficients(coef: np.ndarray) -> np.ndarray:
    """Apply the truncated tridiagonal mixing along the last axis."""
    coef = np.asarray(coef, dtype=np.float64)
    out = coef.copy()
    out[..., 1:] += 0.5 * coef[..., :-1]
    out[..., :-1] += 0.5 * coef[..., 1:]
    return out


def innovation_curves(raw_coef: np.ndarray, grid: Grid) -> np.ndarray:
    """Curves from raw (unmixed) coefficients of shape ``(..., K)``."""
    raw_coef = np.asarray(raw_coef, dtype=np.float64)
    return mix_coefficients(raw_coef) @ innovation_basis(raw_coef.shape[-1], grid)


def innovation_covariance(grid: Grid, K_trunc: int = 50) -> np.ndarray:
    """Exact ``G x G`` covariance of one innovation curve (unit-variance draws)."""
    C = innovation_basis(K_trunc, grid)
    mixed = mix_coefficients(C.T)  # A is symmetric, so rows of A C^T
    return mixed @ mixed.T


def gen_innovations(n: int, r: int, K_trunc: int, dist, rng, grid: Grid) -> np.ndarray:
    """``(n, r, G)`` array of independent innovation curves."""
    raw = draw_errors(dist, rng, (n, r, K_trunc))
    return innovation_curves(raw, grid)


def _as_mean(mean, r: int, G: int) -> np.ndarray | None:
    if mean is None:
        return None
    m = np.asarray(mean, dtype=np.float64)
    if m.ndim == 1 and m.size == G:
        m = np.broadcast_to(m, (r, G))
    if m.shape != (r, G):
        raise InvalidArgumentError(f"mean must have shape ({r}, {G}), got {m.shape}")
    return m


@dataclass(frozen=True)
class SimConfig:
    model: Model = Model.PAR
    a: float = 0.0
    n: int = 200
    r: int = 5
    G: int = 101
    K_trunc: int = 50
    burnin: int = 100
    dist: Dist = Dist.Normal
    mean: Any = field(default=None, compare=False, repr=False)
    seed: int = 0

    KEYS = ("model", "a", "n", "r", "G", "K_trunc", "burnin", "dist", "seed")

    def __post_init__(self):
        try:
            object.__setattr__(self, "model", Model(str(getattr(self.model, "value", self.model)).upper()))
        except ValueError:
            raise InvalidArgumentError(f"unknown model {self.model!r}") from None
        object.__setattr__(self, "dist", Dist.parse(self.dist))
        for name in ("n", "r", "G", "K_trunc", "burnin", "seed"):
            v = getattr(self, name)
            if int(v) != v:
                raise InvalidArgumentError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        object.__setattr__(self, "a", float(self.a))
        if self.model is Model.PAR and not 0.0 <= self.a < 1.0:
            raise InvalidArgumentError(f"PAR needs 0 <= a < 1, got a={self.a}")
        if self.model is Model.PMA and self.a < 0.0:
            raise InvalidArgumentError(f"PMA needs a >= 0, got a={self.a}")
        if self.n < 1 or self.r < 1:
            raise InvalidArgumentError("n and r must be positive")
        if self.G < 2:
            raise InvalidArgumentError("G must be at least 2")
        if self.K_trunc < 1:
            raise InvalidArgumentError("K_trunc must be at least 1")
        if self.burnin < 0:
            raise InvalidArgumentError("burnin must be non-negative")
        object.__setattr__(self, "mean", _as_mean(self.mean, self.r, self.G))

    def to_dict(self) -> dict:
        return {
            "model": self.model.value,
            "a": self.a,
            "n": self.n,
            "r": self.r,
            "G": self.G,
            "K_trunc": self.K_trunc,
            "burnin": self.burnin,
            "dist": self.dist.value,
            "seed": self.seed,
        }

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "SimConfig":
        known = {f.name for f in fields(cls)} - {"mean"}
        unknown = set(values) - known
        if unknown:
            raise InvalidArgumentError(f"unknown simulation keys: {sorted(unknown)}")
        kw: dict[str, Any] = {}
        for key, v in values.items():
            if key in {"n", "r", "G", "K_trunc", "burnin", "seed"}:
                kw[key] = int(str(v).strip()) if isinstance(v, str) else v
            elif key == "a":
                kw[key] = float(v)
            else:
                kw[key] = v
        return cls(**kw)

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)


def simulate_panel(cfg: SimConfig, replicate: int = 0) -> PanelSeries:
    """Draw one PAR/PMA panel on the stream ``(cfg.seed, (replicate, SIM))``.

    An innovation block of length ``n + max(burnin, 1)`` is drawn.  PAR runs the
    recursion from ``e = 0`` over the whole block and keeps the last ``n``
    states; PMA keeps the last ``n`` and uses the one before as ``eps_0``.
    Both operate on the basis coefficients, which is exact by linearity.
    """
    if not isinstance(cfg, SimConfig):
        raise InvalidArgumentError("cfg must be a SimConfig")
    grid = make_grid(cfg.G)
    lead = max(cfg.burnin, 1)
    stream = RngStream(cfg.seed, (int(replicate), SIM))
    raw = draw_errors(cfg.dist, stream, (cfg.n + lead, cfg.r, cfg.K_trunc))
    coef = mix_coefficients(raw)
    if cfg.model is Model.PAR:
        e = lfilter([1.0], [1.0, -cfg.a], coef, axis=0)[lead:]
    else:
        e = coef[lead:] + cfg.a * coef[lead - 1 : -1]
    # spatial tridiagonal mixing across panels
    x = e.copy()
    x[:, 1:] += 0.5 * e[:, :-1]
    x[:, :-1] += 0.5 * e[:, 1:]
    data = x @ innovation_basis(cfg.K_trunc, grid)
    if cfg.mean is not None:
        data = data + cfg.mean
    return PanelSeries(data, grid)
