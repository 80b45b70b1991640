"""Monte Carlo harness for coverage, size and power of the two procedures.

Replication ``i`` draws its panel, its random mean shifts and its bootstrap
multipliers from the substreams ``(i, SIM)``, ``(i, MEAN)`` and ``(i, BOOT)``,
so rates are identical for any thread count.  Power runs reuse the same
replications for every ``b`` (common random numbers).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ._parallel import ordered_map
from .boot import BootstrapConfig
from .curves import make_grid
from .errors import InvalidArgumentError
from .infer import band_contains, jscb, parallelism_test
from .simgen import BOOT, MEAN, RngStream, SimConfig, simulate_panel

__all__ = [
    "Mode",
    "ExperimentConfig",
    "ExperimentReport",
    "run_coverage",
    "run_type1",
    "run_power",
    "run_experiment",
    "parallel_means",
]


class Mode(str, enum.Enum):
    Coverage = "Coverage"
    TypeI = "TypeI"
    Power = "Power"


@dataclass(frozen=True)
class ExperimentConfig:
    sim: SimConfig
    boot: BootstrapConfig = BootstrapConfig()
    R: int = 500
    mode: Mode = Mode.Coverage
    power_b_grid: tuple[float, ...] = ()
    mv: bool = True

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "power_b_grid", tuple(float(b) for b in self.power_b_grid))
        if int(self.R) != self.R or self.R < 1:
            raise InvalidArgumentError("R must be a positive integer")
        if not self.mv and self.boot.m is None:
            raise InvalidArgumentError("a fixed block size is required when MV selection is off")
        if self.mode in (Mode.TypeI, Mode.Power) and self.sim.r < 2:
            raise InvalidArgumentError("parallelism experiments need r >= 2")
        if self.mode is Mode.Power and not self.power_b_grid:
            raise InvalidArgumentError("power mode needs a non-empty b grid")

    @property
    def boot_for_run(self) -> BootstrapConfig:
        return replace(self.boot, m=None) if self.mv else self.boot

    def to_dict(self) -> dict:
        return {
            "sim": self.sim.to_dict(),
            "boot": self.boot.to_dict(),
            "R": self.R,
            "mode": self.mode.value,
            "power_b_grid": list(self.power_b_grid),
            "mv": self.mv,
        }


@dataclass(frozen=True)
class ExperimentReport:
    rate: float
    mc_stderr: float
    R: int
    hits: int
    meta: dict = field(default_factory=dict)
    block_sizes: tuple[int, ...] = field(default=(), repr=False)

    @classmethod
    def from_hits(cls, hits: Sequence[bool], meta: dict, block_sizes: Sequence[int] = ()) -> "ExperimentReport":
        R = len(hits)
        k = int(sum(bool(h) for h in hits))
        p = k / R
        return cls(p, math.sqrt(p * (1.0 - p) / R), R, k, dict(meta), tuple(int(m) for m in block_sizes))

    def row(self) -> dict:
        out = dict(self.meta)
        out.update(rate=self.rate, mc_stderr=self.mc_stderr, R=self.R, hits=self.hits)
        if self.block_sizes:
            out["median_m"] = float(np.median(self.block_sizes))
        return out


def _meta(cfg: ExperimentConfig, **extra) -> dict:
    s = cfg.sim
    meta = {
        "mode": cfg.mode.value,
        "model": s.model.value,
        "a": s.a,
        "n": s.n,
        "r": s.r,
        "G": s.G,
        "alpha": cfg.boot.alpha,
        "dist": s.dist.value,
        "B": cfg.boot.B,
        "m": "MV" if cfg.mv else cfg.boot.m,
    }
    meta.update(extra)
    return meta


def parallel_means(sim: SimConfig, replicate: int, b: float = 0.0) -> np.ndarray:
    """``g_j(u) = u^2 - u + c_j`` with ``c_j ~ N(0, 1)``; ``g_1`` gets an extra ``b u``."""
    u = make_grid(sim.G).points
    c = RngStream(sim.seed, (int(replicate), MEAN)).generator().standard_normal(sim.r)
    g = (u * u - u)[None, :] + c[:, None]
    g[0] += b * u
    return g


def run_coverage(cfg: ExperimentConfig, *, target=None, threads: int | None = None) -> ExperimentReport:
    """Fraction of replications whose bands contain ``target`` (default: the true mean)."""
    if cfg.mode is not Mode.Coverage:
        raise InvalidArgumentError("run_coverage needs mode=Coverage")
    sim = cfg.sim
    truth = np.zeros((sim.r, sim.G)) if sim.mean is None else sim.mean
    goal = truth if target is None else np.broadcast_to(np.asarray(target, dtype=np.float64), truth.shape)
    boot = cfg.boot_for_run

    def one(i: int):
        panel = simulate_panel(sim, replicate=i)
        bands = jscb(panel, boot, stream=RngStream(boot.seed, (i, BOOT)), threads=1)
        return band_contains(bands, goal)[0], bands.m_used

    out = ordered_map(one, range(cfg.R), threads)
    return ExperimentReport.from_hits([h for h, _ in out], _meta(cfg), [m for _, m in out])


def _rejections(cfg: ExperimentConfig, b_grid: Sequence[float], threads: int | None) -> list[tuple[list[bool], list[int]]]:
    boot = cfg.boot_for_run

    def one(i: int):
        res = []
        for b in b_grid:
            sim = replace(cfg.sim, mean=parallel_means(cfg.sim, i, b))
            panel = simulate_panel(sim, replicate=i)
            t = parallelism_test(panel, boot, stream=RngStream(boot.seed, (i, BOOT)), threads=1)
            res.append((t.reject, t.m_used))
        return res

    per_rep = ordered_map(one, range(cfg.R), threads)
    return [([rep[k][0] for rep in per_rep], [rep[k][1] for rep in per_rep]) for k in range(len(b_grid))]


def run_type1(cfg: ExperimentConfig, *, threads: int | None = None) -> ExperimentReport:
    """Rejection frequency of the parallelism test under parallel means."""
    if cfg.mode is not Mode.TypeI:
        raise InvalidArgumentError("run_type1 needs mode=TypeI")
    hits, ms = _rejections(cfg, [0.0], threads)[0]
    return ExperimentReport.from_hits(hits, _meta(cfg, b=0.0), ms)


def run_power(cfg: ExperimentConfig, *, threads: int | None = None) -> list[ExperimentReport]:
    """One rejection-rate report per deviation ``b``."""
    if cfg.mode is not Mode.Power:
        raise InvalidArgumentError("run_power needs mode=Power")
    grid = cfg.power_b_grid
    results = _rejections(cfg, grid, threads)
    return [ExperimentReport.from_hits(h, _meta(cfg, b=b), ms) for b, (h, ms) in zip(grid, results)]


def run_experiment(cfg: ExperimentConfig, *, threads: int | None = None) -> list[ExperimentReport]:
    if cfg.mode is Mode.Coverage:
        return [run_coverage(cfg, threads=threads)]
    if cfg.mode is Mode.TypeI:
        return [run_type1(cfg, threads=threads)]
    return run_power(cfg, threads=threads)
