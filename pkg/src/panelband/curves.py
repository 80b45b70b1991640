"""Curves and panels sampled on a uniform grid of [0, 1].

A curve is a 1-d array aligned to a :class:`Grid`; a panel is an
``n x r x G`` array holding ``r`` functional time series of length ``n``.
Sup-norms over ``[0, 1]`` are taken as maxima over the grid points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "Grid",
    "PanelSeries",
    "CosineCoeffs",
    "make_grid",
    "trapezoid_weights",
    "integrate",
    "cosine_coeffs",
    "partial_sum_reconstruct",
    "standardized_sum",
    "sample_mean_sd",
    "sup_abs_max",
]


def _frozen(a, dtype=np.float64) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``u_g = g / (G - 1)``, ``g = 0..G-1``."""

    points: np.ndarray

    def __post_init__(self):
        pts = _frozen(self.points)
        if pts.ndim != 1 or pts.size < 2:
            raise InvalidArgumentError("a grid needs at least 2 points")
        if not np.all(np.diff(pts) > 0):
            raise InvalidArgumentError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def count(self) -> int:
        return int(self.points.size)

    @property
    def spacing(self) -> float:
        return 1.0 / (self.count - 1)

    def __len__(self) -> int:
        return self.count

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and np.array_equal(self.points, other.points)

    def __hash__(self) -> int:
        return hash(self.points.tobytes())


def make_grid(G: int) -> Grid:
    """Uniform grid on [0, 1] with ``G`` points, endpoints included."""
    if int(G) != G or G < 2:
        raise InvalidArgumentError(f"grid size must be an integer >= 2, got {G!r}")
    G = int(G)
    return Grid(np.arange(G, dtype=np.float64) / (G - 1))


@dataclass(frozen=True)
class PanelSeries:
    """Observed tensor ``X[i, j, g] = X_{i,j}(u_g)`` of shape ``(n, r, G)``."""

    data: np.ndarray
    grid: Grid = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        data = _frozen(self.data)
        if data.ndim != 3:
            raise InvalidArgumentError(f"panel data must be 3-d (n, r, G), got shape {data.shape}")
        n, r, G = data.shape
        if n < 1 or r < 1:
            raise InvalidArgumentError(f"empty panel of shape {data.shape}")
        grid = self.grid if self.grid is not None else make_grid(G)
        if grid.count != G:
            raise InvalidArgumentError(f"grid has {grid.count} points but panel has G={G}")
        if not np.all(np.isfinite(data)):
            raise InvalidArgumentError("panel contains non-finite values")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "grid", grid)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def r(self) -> int:
        return self.data.shape[1]

    @property
    def G(self) -> int:
        return self.data.shape[2]

    def scaled(self, c: float) -> "PanelSeries":
        return PanelSeries(self.data * c, self.grid)

    def __add__(self, other: "PanelSeries") -> "PanelSeries":
        if self.grid != other.grid:
            raise InvalidArgumentError("panels live on different grids")
        return PanelSeries(self.data + other.data, self.grid)


@dataclass(frozen=True)
class CosineCoeffs:
    """Coefficients ``a_0..a_K`` in the basis ``{cos(k pi u)}``."""

    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _frozen(np.atleast_1d(self.a)))

    @property
    def K(self) -> int:
        return self.a.shape[-1] - 1


def trapezoid_weights(grid: Grid) -> np.ndarray:
    """Composite trapezoid weights; ``values @ w`` integrates over [0, 1]."""
    w = np.full(grid.count, grid.spacing)
    w[0] = w[-1] = 0.5 * grid.spacing
    return w


def integrate(values, grid: Grid) -> np.ndarray:
    """Trapezoid integral over [0, 1] along the last axis."""
    values = np.asarray(values, dtype=np.float64)
    return values @ trapezoid_weights(grid)


def _cosine_matrix(K: int, grid: Grid) -> np.ndarray:
    k = np.arange(K + 1, dtype=np.float64)
    return np.cos(np.pi * np.outer(k, grid.points))


def cosine_coeffs(curve, grid: Grid, K: int) -> CosineCoeffs:
    """Cosine-basis coefficients by trapezoid quadrature on the curve's grid.

    ``a_0`` is the integral of the curve and ``a_k = 2 * int cos(k pi u) X(u) du``
    for ``k >= 1``. Leading axes of ``curve`` are treated as a batch.
    """
    if K < 0:
        raise InvalidArgumentError("K must be non-negative")
    if grid.count < K + 2:
        raise InvalidArgumentError(f"K={K} needs a grid of at least {K + 2} points, got {grid.count}")
    values = np.asarray(curve, dtype=np.float64)
    if values.shape[-1] != grid.count:
        raise InvalidArgumentError("curve is not aligned to the grid")
    basis = _cosine_matrix(K, grid) * trapezoid_weights(grid)
    a = values @ basis.T
    a[..., 1:] *= 2.0
    return CosineCoeffs(a)


def partial_sum_reconstruct(coeffs: CosineCoeffs, grid: Grid) -> np.ndarray:
    """Evaluate ``sum_k a_k cos(k pi u)`` on the grid."""
    return coeffs.a @ _cosine_matrix(coeffs.K, grid)


def _values(panel) -> np.ndarray:
    return panel.data if isinstance(panel, PanelSeries) else np.asarray(panel, dtype=np.float64)


def standardized_sum(panel) -> np.ndarray:
    """``S_{n,j}(u_g) = n^{-1/2} sum_i X_{i,j}(u_g)`` as an ``r x G`` matrix."""
    x = _values(panel)
    return x.sum(axis=0) / np.sqrt(x.shape[0])


def sample_mean_sd(panel) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise sample mean and divide-by-n standard deviation, each ``r x G``."""
    x = _values(panel)
    n = x.shape[0]
    if n < 2:
        raise InvalidArgumentError("sample moments need n >= 2")
    mean = x.mean(axis=0)
    sd = np.sqrt(((x - mean) ** 2).mean(axis=0))
    return mean, sd


def sup_abs_max(values) -> float:
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return 0.0
    return float(np.max(np.abs(values)))
