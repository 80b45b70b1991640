"""Simultaneous inference for panels of functional time series.

Multiplier block bootstrap bands for all panel mean curves at once, a
family-wise test that the mean curves are parallel, minimum-volatility block
selection, PAR/PMA simulators and local linear smoothing of raw records.
"""

__version__ = "0.1.0"

from .boot import BootstrapConfig, MvCandidates, bootstrap_sup_quantile, mv_select  # noqa: E402
from .curves import Grid, PanelSeries, make_grid  # noqa: E402
from .errors import (  # noqa: E402
    DataError,
    DegenerateScaleError,
    InvalidArgumentError,
    PanelbandError,
)
from .infer import BandSet, ParallelismResult, band_contains, jscb, parallelism_test  # noqa: E402
from .simgen import Dist, Model, SimConfig, simulate_panel  # noqa: E402

__all__ = [
    "__version__",
    "BootstrapConfig",
    "MvCandidates",
    "bootstrap_sup_quantile",
    "mv_select",
    "Grid",
    "PanelSeries",
    "make_grid",
    "DataError",
    "DegenerateScaleError",
    "InvalidArgumentError",
    "PanelbandError",
    "BandSet",
    "ParallelismResult",
    "band_contains",
    "jscb",
    "parallelism_test",
    "Dist",
    "Model",
    "SimConfig",
    "simulate_panel",
]
