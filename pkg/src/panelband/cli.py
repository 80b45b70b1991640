"""Command-line front end: ``panelband <subcommand> ...``.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 numerical
degeneracy.  Settings resolve as built-in defaults < ``--config`` file <
explicit flags, and every JSON output records the resolved values.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from ._parallel import THREADS_ENV, resolve_threads
from .boot import BootstrapConfig, MvCandidates, default_candidates, mv_criterion
from .curves import make_grid
from .errors import DataError, DegenerateScaleError, InvalidArgumentError
from .experiments import ExperimentConfig, Mode, run_coverage, run_power, run_type1
from .infer import center_within_curve, jscb, parallelism_test
from .ingest import SmoothConfig, build_panel, load_long_csv
from .io import (
    read_kv_config,
    read_panel,
    write_bands_csv,
    write_column_csv,
    write_json,
    write_matrix_csv,
    write_panel,
    write_rows_csv,
)
from .simgen import SimConfig, simulate_panel

EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_DEGENERATE = 3

SIM_KEYS = ("model", "a", "n", "r", "G", "K_trunc", "burnin", "dist", "seed")
DESK_R = 500
DESK_B = 500


class ConfigError(InvalidArgumentError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are configuration errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, *, boot: bool = True, panel: bool = False) -> None:
    if panel:
        p.add_argument("panel", help="panel tensor file (as written by simulate or smooth)")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--out", default=".", help="output directory (created if needed)")
    p.add_argument("--seed", type=int, help="master seed for all randomness")
    p.add_argument("--threads", type=int, help=f"worker threads (default: ${THREADS_ENV} or 1); never changes results")
    if boot:
        p.add_argument("--alpha", type=float, help="nominal level (default 0.05)")
        p.add_argument("--block", type=int, help="fixed block size; overrides minimum-volatility selection")
        p.add_argument("--boot-reps", type=int, help=f"bootstrap replicates B (default {DESK_B})")


def _sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=["PAR", "PMA"])
    p.add_argument("--a", type=float, help="AR / MA coefficient")
    p.add_argument("--n", type=int, help="time length")
    p.add_argument("--r", type=int, help="number of panels")
    p.add_argument("--dist", choices=["Normal", "ScaledT6"])
    p.add_argument("--grid", type=int, help="grid size G (default 101)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="panelband", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"panelband {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="draw a PAR/PMA panel")
    _common(p, boot=False)
    _sim_flags(p)

    p = sub.add_parser("jscb", help="joint simultaneous confidence bands for the mean curves")
    _common(p, panel=True)

    p = sub.add_parser("test-parallel", help="bootstrap test that all mean curves are parallel")
    _common(p, panel=True)

    p = sub.add_parser("mv-select", help="minimum-volatility block size")
    _common(p, boot=False, panel=True)
    p.add_argument("--candidates", help="comma-separated equally spaced block sizes")
    p.add_argument("--pairwise", action="store_true", help="select on pairwise differences of centered curves")
    p.add_argument("--printed-prefactor", action="store_true", help="use the square-root prefactor variant")

    for name, helptext in (
        ("coverage-bench", "Monte Carlo coverage of the bands"),
        ("size-bench", "Monte Carlo size of the parallelism test"),
        ("power-bench", "Monte Carlo power of the parallelism test over a b grid"),
    ):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        _sim_flags(p)
        p.add_argument("--reps", type=int, help=f"Monte Carlo replications R (default {DESK_R})")
        if name == "power-bench":
            p.add_argument("--b-grid", help="comma-separated deviations b (default 0,0.1,0.2,0.3)")

    p = sub.add_parser("smooth", help="smooth long-format records into a panel")
    p.add_argument("input", help="CSV with header unit,period,position,value")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--grid", type=int, help="output grid size G (default 101)")
    p.add_argument("--bandwidth", type=float, help="kernel bandwidth on [0, 1] (default: rule of thumb)")
    p.add_argument("--min-points", type=int, help="minimum points inside each local window (default 3)")
    p.add_argument("--seed", type=int, help="accepted for uniformity; smoothing is deterministic")
    p.add_argument("--threads", type=int)
    return parser


def _file_config(args) -> dict[str, str]:
    return read_kv_config(args.config) if getattr(args, "config", None) else {}


def _pick(args, cfg: dict, flag: str, key: str, cast, default):
    v = getattr(args, flag, None)
    if v is not None:
        return v
    if key in cfg:
        try:
            return cast(cfg[key])
        except ValueError:
            raise ConfigError(f"config key {key!r}: cannot parse {cfg[key]!r}") from None
    return default


def _optional_int(s: str):
    return None if str(s).strip().lower() in {"", "none", "mv"} else int(s)


def _bool(s: str) -> bool:
    v = str(s).strip().lower()
    if v in {"1", "true", "yes", "on"}:
        return True
    if v in {"0", "false", "no", "off"}:
        return False
    raise ValueError(s)


def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(x) for x in str(s).replace(";", ",").split(",") if x.strip())


def _boot_config(args, cfg: dict) -> BootstrapConfig:
    return BootstrapConfig(
        m=_pick(args, cfg, "block", "m", _optional_int, None),
        B=_pick(args, cfg, "boot_reps", "B", int, DESK_B),
        alpha=_pick(args, cfg, "alpha", "alpha", float, 0.05),
        seed=_pick(args, cfg, "seed", "seed", int, 0),
    )


def _sim_config(args, cfg: dict) -> SimConfig:
    values: dict[str, Any] = {k: cfg[k] for k in SIM_KEYS if k in cfg}
    for flag, key in (("model", "model"), ("a", "a"), ("n", "n"), ("r", "r"), ("dist", "dist"), ("grid", "G"), ("seed", "seed")):
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = v
    return SimConfig.from_mapping(values)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _meta(command: str, config: dict, seed, m, started: float, threads: int) -> dict:
    return {
        "artifact": "panelband",
        "version": __version__,
        "command": command,
        "config": config,
        "seed": seed,
        "block_size": m,
        "threads": threads,
        "wall_clock_seconds": time.perf_counter() - started,
    }


def _labels(labels: dict, r: int) -> list[str]:
    units = labels.get("units")
    return list(units) if units and len(units) == r else [f"P{j + 1}" for j in range(r)]


def cmd_simulate(args, started: float) -> int:
    cfg = _file_config(args)
    sim = _sim_config(args, cfg)
    out = _outdir(args)
    panel = simulate_panel(sim)
    write_panel(out / "panel.bin", panel)
    write_json(out / "simulate.json", _meta("simulate", sim.to_dict(), sim.seed, None, started, resolve_threads(args.threads)))
    print(out / "panel.bin")
    return 0


def cmd_jscb(args, started: float) -> int:
    cfg = _file_config(args)
    boot = _boot_config(args, cfg)
    panel, labels = read_panel(args.panel)
    out = _outdir(args)
    threads = resolve_threads(args.threads)
    bands = jscb(panel, boot, threads=threads)
    names = _labels(labels, panel.r)
    write_bands_csv(out / "bands.csv", panel.grid, bands.lower, bands.center, bands.upper, names)
    write_column_csv(out / "replicates.csv", "replicate", bands.replicates)
    resolved = dict(boot.to_dict(), m=bands.m_used, n=panel.n, r=panel.r, G=panel.G, panel=str(args.panel))
    meta = _meta("jscb", resolved, boot.seed, bands.m_used, started, threads)
    meta.update(quantile=bands.quantile, alpha=bands.alpha, B=bands.B_used, units=names)
    write_json(out / "jscb.json", meta)
    print(f"quantile={bands.quantile:.6g} m={bands.m_used}")
    return 0


def cmd_test_parallel(args, started: float) -> int:
    cfg = _file_config(args)
    boot = _boot_config(args, cfg)
    panel, labels = read_panel(args.panel)
    out = _outdir(args)
    threads = resolve_threads(args.threads)
    res = parallelism_test(panel, boot, threads=threads)
    names = _labels(labels, panel.r)
    write_matrix_csv(out / "pvalues.csv", res.pairwise_pvalues, names)
    write_matrix_csv(out / "pairwise.csv", res.pairwise, names)
    write_column_csv(out / "replicates.csv", "replicate", res.replicates)
    resolved = dict(boot.to_dict(), m=res.m_used, n=panel.n, r=panel.r, G=panel.G, panel=str(args.panel))
    meta = _meta("test-parallel", resolved, boot.seed, res.m_used, started, threads)
    meta.update(res.to_dict(), units=names)
    write_json(out / "parallel.json", meta)
    print(f"statistic={res.statistic:.6g} critical_value={res.critical_value:.6g} reject={str(res.reject).lower()}")
    return 0


def cmd_mv_select(args, started: float) -> int:
    cfg = _file_config(args)
    panel, _ = read_panel(args.panel)
    out = _outdir(args)
    listed = args.candidates or cfg.get("candidates")
    cands = MvCandidates(tuple(int(x) for x in _floats(listed))) if listed else default_candidates(panel.n)
    data = panel.data
    if args.pairwise:
        data = center_within_curve(panel)
    cands, vol = mv_criterion(data, cands, printed=args.printed_prefactor, pairwise=args.pairwise)
    m = cands.blocks[int(np.argmin(vol))] if vol.size else cands.blocks[0]
    resolved = {"candidates": list(cands.blocks), "pairwise": args.pairwise, "printed_prefactor": args.printed_prefactor}
    meta = _meta("mv-select", resolved, args.seed, m, started, resolve_threads(args.threads))
    meta["volatility"] = dict(zip((str(b) for b in cands.blocks), vol.tolist())) if vol.size else {}
    write_json(out / "mv.json", meta)
    print(m)
    return 0


def _experiment(args, mode: Mode) -> ExperimentConfig:
    cfg = _file_config(args)
    sim = _sim_config(args, cfg)
    boot = _boot_config(args, cfg)
    b_grid: tuple[float, ...] = ()
    if mode is Mode.Power:
        b_grid = _pick(args, cfg, "b_grid", "b_grid", _floats, (0.0, 0.1, 0.2, 0.3))
        if isinstance(b_grid, str):
            b_grid = _floats(b_grid)
    mv = boot.m is None and _pick(args, cfg, "", "mv", _bool, True)
    return ExperimentConfig(
        sim=sim,
        boot=boot,
        R=_pick(args, cfg, "reps", "R", int, DESK_R),
        mode=mode,
        power_b_grid=b_grid,
        mv=mv,
    )


def _bench(args, started: float, mode: Mode, stem: str) -> int:
    exp = _experiment(args, mode)
    out = _outdir(args)
    threads = resolve_threads(args.threads)
    if mode is Mode.Coverage:
        reports = [run_coverage(exp, threads=threads)]
    elif mode is Mode.TypeI:
        reports = [run_type1(exp, threads=threads)]
    else:
        reports = run_power(exp, threads=threads)
    rows = [r.row() for r in reports]
    write_rows_csv(out / f"{stem}.csv", rows)
    if mode is Mode.Power:
        write_rows_csv(out / "power_curve.csv", [{"b": r.meta["b"], "rate": r.rate, "stderr": r.mc_stderr} for r in reports])
    block = "MV" if exp.mv else exp.boot.m
    meta = _meta(stem, exp.to_dict(), exp.sim.seed, block, started, threads)
    meta["cells"] = rows
    write_json(out / f"{stem}.json", meta)
    for r in reports:
        extra = f" b={r.meta['b']}" if "b" in r.meta else ""
        print(f"{stem}{extra}: rate={r.rate:.4f} stderr={r.mc_stderr:.4f} R={r.R}")
    return 0


def cmd_smooth(args, started: float) -> int:
    cfg = _file_config(args)
    G = _pick(args, cfg, "grid", "G", int, 101)
    smooth = SmoothConfig(
        grid=make_grid(G),
        bandwidth=_pick(args, cfg, "bandwidth", "bandwidth", float, None),
        min_points=_pick(args, cfg, "min_points", "min_points", int, 3),
    )
    records = load_long_csv(args.input)
    out = _outdir(args)
    threads = resolve_threads(args.threads)
    panel, units, periods = build_panel(records, smooth, threads=threads)
    write_panel(out / "panel.bin", panel, units, periods)
    resolved = {"G": G, "bandwidth": smooth.bandwidth or "rule-of-thumb", "kernel": smooth.kernel, "min_points": smooth.min_points, "input": str(args.input)}
    meta = _meta("smooth", resolved, args.seed, None, started, threads)
    meta.update(n=panel.n, r=panel.r, units=units, periods=periods)
    write_json(out / "smooth.json", meta)
    print(out / "panel.bin")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "jscb": cmd_jscb,
    "test-parallel": cmd_test_parallel,
    "mv-select": cmd_mv_select,
    "coverage-bench": lambda a, s: _bench(a, s, Mode.Coverage, "coverage"),
    "size-bench": lambda a, s: _bench(a, s, Mode.TypeI, "size"),
    "power-bench": lambda a, s: _bench(a, s, Mode.Power, "power"),
    "smooth": cmd_smooth,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        return COMMANDS[args.command](args, started)
    except DegenerateScaleError as exc:
        print(f"panelband: numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except DataError as exc:
        print(f"panelband: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InvalidArgumentError, ValueError) as exc:
        print(f"panelband: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
