"""``razavy-dw`` command line.

Every command writes one table as CSV (default) or JSON to ``--out`` or stdout.
Options may also come from a JSON file given with ``--config``; flags on the
command line win over the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from .dynamics import (
    DEFAULT_ORTHOGONALITY_THRESHOLD,
    DEFAULT_RECURRENCE_THRESHOLD,
    GridSpec,
    WavepacketSpec,
)
from .errors import RazavyError
from .report import (
    System,
    Thresholds,
    run_bounds,
    run_concurrence,
    run_density,
    run_marginal,
    run_spectrum,
    run_sweep,
    run_table2,
    run_timing,
    run_trace,
    to_csv,
    to_json,
)
from .well import PotentialParams

COMMANDS = ("spectrum", "timing", "trace", "density", "marginal", "bounds", "concurrence", "table2", "sweep")
SINGLE_PACKET = ("trace", "density", "marginal")


class UsageError(RazavyError, ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse would print the whole usage block; keep diagnostics to one line
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    presets: list
    custom: Optional[list]
    g_values: list
    xi: float
    grid: GridSpec
    t_max: Optional[float]
    t_steps: Optional[int]
    times: Optional[list]
    thresholds: Thresholds
    fmt: str
    out: Optional[str]
    jobs: int

    def specs(self) -> list:
        if self.custom is not None:
            return [WavepacketSpec(tuple(self.custom), label="custom")]
        return [WavepacketSpec.preset(p) for p in self.presets]

    def as_dict(self) -> dict:
        d = {
            "command": self.command,
            "presets": None if self.custom is not None else list(self.presets),
            "custom": None if self.custom is None else [[c.real, c.imag] for c in self.custom],
            "g": list(self.g_values),
            "xi": self.xi,
            "grid": [self.grid.n, self.grid.lo, self.grid.hi],
            "t_max": self.t_max,
            "t_steps": self.t_steps,
            "times": self.times,
            "rec_threshold": self.thresholds.recurrence,
            "orth_threshold": self.thresholds.orthogonality,
        }
        return d


def _complex(text: str) -> complex:
    parts = str(text).split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected 're' or 're,im', got {text!r}")


def _sweep(text: str):
    try:
        start, stop, steps = str(text).split(":")
        start, stop, steps = float(start), float(stop), int(steps)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:steps, got {text!r}") from None
    if steps < 2 or not start < stop:
        raise argparse.ArgumentTypeError("sweep needs steps >= 2 and start < stop")
    return start, stop, steps


def _grid(text: str) -> GridSpec:
    try:
        n, lo, hi = str(text).split(",")
        return GridSpec(int(n), float(lo), float(hi))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected n,lo,hi: {exc}") from None


def _times(text: str) -> list:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated times, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="razavy-dw",
        description="Coupled Razavy double-well simulations: spectra, timing, densities, bounds, concurrence.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with option defaults (keys as flag names)")
    p.add_argument("--preset", action="append", choices=["A", "B", "C", "D"],
                   help="reference wavepacket; repeat for several (default: all four)")
    for k in range(4):
        p.add_argument(f"--a{k}", type=_complex, metavar="RE[,IM]",
                       help=f"custom coefficient a{k} (unset ones are 0)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--g", type=float, help="coupling (default 0.0)")
    g.add_argument("--g-sweep", type=_sweep, metavar="START:STOP:STEPS")
    p.add_argument("--xi", type=float, default=1.0)
    p.add_argument("--grid", type=_grid, metavar="N,LO,HI", help="density/marginal lattice (default 201,-3,3)")
    p.add_argument("--t-max", type=float)
    p.add_argument("--t-steps", type=int, help="time samples for trace (2001) and marginal (101)")
    p.add_argument("--times", type=_times, metavar="T1,T2,...", help="explicit density snapshot times")
    p.add_argument("--rec-threshold", type=float, default=DEFAULT_RECURRENCE_THRESHOLD)
    p.add_argument("--orth-threshold", type=float, default=DEFAULT_ORTHOGONALITY_THRESHOLD)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweep")
    return p


_CONVERTERS = {
    "g_sweep": _sweep, "grid": _grid, "times": _times,
    "a0": _complex, "a1": _complex, "a2": _complex, "a3": _complex,
}


def _load_config(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    out = {}
    for key, value in raw.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest in ("command", "config"):
            continue
        if dest in _CONVERTERS and value is not None:
            if dest in ("a0", "a1", "a2", "a3") and isinstance(value, list):
                value = ",".join(str(v) for v in value)
            elif dest == "grid" and isinstance(value, list):
                value = ",".join(str(v) for v in value)
            elif dest == "times" and isinstance(value, list):
                value = ",".join(str(v) for v in value)
            try:
                value = _CONVERTERS[dest](value)
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"config key {key!r}: {exc}") from None
        if dest == "preset" and isinstance(value, str):
            value = [value]
        out[dest] = value
    return out


def parse_config(argv=None) -> RunConfig:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        defaults = _load_config(args.config)
        unknown = set(defaults) - {a.dest for a in parser._actions}
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        parser.set_defaults(**defaults)
        args = parser.parse_args(argv)

    custom = None
    if any(getattr(args, f"a{k}") is not None for k in range(4)):
        custom = [getattr(args, f"a{k}") or 0j for k in range(4)]
        norm = sum(abs(c) ** 2 for c in custom)
        if abs(norm - 1.0) > 1e-12:
            raise UsageError(f"custom coefficients are not normalised (sum |a|^2 = {norm:.12g})")
    presets = args.preset or ["A", "B", "C", "D"]
    if args.command in SINGLE_PACKET and custom is None:
        if args.preset and len(args.preset) > 1:
            raise UsageError(f"{args.command} takes a single wavepacket")
        presets = args.preset or ["A"]

    if args.g_sweep is not None and args.g is not None:
        raise UsageError("--g and --g-sweep are mutually exclusive")
    if args.g_sweep is not None:
        start, stop, steps = args.g_sweep
        g_values = [float(v) for v in np.linspace(start, stop, steps)]
        if args.command in SINGLE_PACKET:
            raise UsageError(f"{args.command} takes a single --g value")
    else:
        g_values = [args.g if args.g is not None else 0.0]
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")

    return RunConfig(
        command=args.command,
        presets=presets,
        custom=custom,
        g_values=g_values,
        xi=args.xi,
        grid=args.grid or GridSpec(),
        t_max=args.t_max,
        t_steps=args.t_steps,
        times=args.times,
        thresholds=Thresholds(args.rec_threshold, args.orth_threshold),
        fmt=args.format,
        out=args.out,
        jobs=args.jobs,
    )


def execute(cfg: RunConfig):
    system = System(PotentialParams(xi=cfg.xi))
    specs = cfg.specs()
    c = cfg.command
    if c == "spectrum":
        return run_spectrum(system, cfg.g_values)
    if c == "timing":
        return run_timing(system, specs, cfg.g_values, cfg.thresholds, cfg.t_max)
    if c == "bounds":
        return run_bounds(system, specs, cfg.g_values)
    if c == "concurrence":
        return run_concurrence(system, specs, cfg.g_values)
    if c == "table2":
        return run_table2(system, cfg.thresholds)
    if c == "sweep":
        return run_sweep(system, specs, cfg.g_values, cfg.thresholds, cfg.t_max, jobs=cfg.jobs)
    g = cfg.g_values[0]
    if c == "trace":
        return run_trace(system, specs[0], g, cfg.t_max, cfg.t_steps or 2001)
    if c == "density":
        return run_density(system, specs[0], g, cfg.grid, cfg.times, cfg.thresholds)
    if c == "marginal":
        return run_marginal(system, specs[0], g, cfg.grid, cfg.t_max, cfg.t_steps or 101)
    raise UsageError(f"unknown command {c!r}")


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        table = execute(cfg)
        text = to_json(table, cfg.as_dict()) if cfg.fmt == "json" else to_csv(table)
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (RazavyError, ValueError, OSError) as exc:
        msg = " ".join(str(exc).split())
        print(f"razavy-dw: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
