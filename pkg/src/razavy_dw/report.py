"""Scenario runners behind the command line: each returns a :class:`Table`.

Tables are plain column lists plus row dicts; :func:`to_csv` and :func:`to_json`
serialise them deterministically (fixed column order, 9 significant digits).
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .coupled import CoupledSpectrum, coupled_spectrum, overlap_gamma
from .dynamics import (
    DEFAULT_ORTHOGONALITY_THRESHOLD,
    DEFAULT_RECURRENCE_THRESHOLD,
    GridSpec,
    WavepacketSpec,
    amplitude,
    correlation,
    density,
    marginal_x1,
    mean_x1,
    timing,
)
from .entanglement import concurrence, concurrence_closed_form, speed_bound, to_product_basis
from .numerics import QuadratureSpec, ScanSpec
from .well import PotentialParams, build_basis, right_packet_peak

__all__ = [
    "SCHEMA",
    "System",
    "Table",
    "run_spectrum",
    "run_timing",
    "run_bounds",
    "run_concurrence",
    "run_table2",
    "run_sweep",
    "run_trace",
    "run_density",
    "run_marginal",
    "to_csv",
    "to_json",
]

SCHEMA = "razavy-dw/1"
SIG_DIGITS = 9

TABLE2_CASES = (("A", 0.0), ("B", 0.0), ("C", 0.1), ("D", 0.1))
# tabulated reference spread for packet C; equal weights on two levels force dE = E
_REFERENCE_DE_C = 0.1213


@dataclass
class Table:
    columns: list
    rows: list
    notes: list = field(default_factory=list)


@dataclass(frozen=True)
class System:
    """Potential parameters plus the quantities every run shares (basis, gamma, x_m)."""

    params: PotentialParams = PotentialParams()
    quad: QuadratureSpec = QuadratureSpec()

    @cached_property
    def basis(self):
        return build_basis(self.params, self.quad)

    @cached_property
    def gamma(self) -> float:
        return overlap_gamma(self.basis, self.quad)

    @cached_property
    def x_m(self) -> float:
        return right_packet_peak(self.basis)

    def spectrum(self, g: float) -> CoupledSpectrum:
        return coupled_spectrum(self.basis, g, gamma=self.gamma)


@dataclass(frozen=True)
class Thresholds:
    recurrence: float = DEFAULT_RECURRENCE_THRESHOLD
    orthogonality: float = DEFAULT_ORTHOGONALITY_THRESHOLD


def _scan(t_max: Optional[float]) -> Optional[ScanSpec]:
    return None if t_max is None else ScanSpec(t_max=t_max)


def run_spectrum(system: System, g_values: Sequence[float]) -> Table:
    eps = system.basis.eps
    rows = []
    for g in g_values:
        s = system.spectrum(g)
        rows.append({
            "g": g, "gamma": s.gamma, "eps0": eps[0], "eps1": eps[1],
            "eps_sum": s.eps_sum, "delta": s.delta, "theta": s.theta,
            "E0": s.E[0], "E1": s.E[1], "E2": s.E[2], "E3": s.E[3],
        })
    return Table(["g", "gamma", "eps0", "eps1", "eps_sum", "delta", "theta", "E0", "E1", "E2", "E3"], rows)


def run_timing(system, specs, g_values, thresholds=Thresholds(), t_max=None) -> Table:
    rows = []
    for spec in specs:
        for g in g_values:
            r = timing(
                spec, system.spectrum(g), _scan(t_max),
                recurrence_threshold=thresholds.recurrence,
                orthogonality_threshold=thresholds.orthogonality,
            )
            rows.append({
                "preset": spec.label, "g": g, "T": r.T, "tau": r.tau,
                "gamma_at_T": r.gamma_at_T, "gamma_at_tau": r.gamma_at_tau, "method": r.method,
            })
    return Table(["preset", "g", "T", "tau", "gamma_at_T", "gamma_at_tau", "method"], rows)


def run_bounds(system, specs, g_values) -> Table:
    rows = []
    for spec in specs:
        for g in g_values:
            b = speed_bound(spec, system.spectrum(g))
            rows.append({"preset": spec.label, "g": g, "E": b.E, "dE": b.dE,
                         "tau_min": b.tau_min, "binding": b.binding})
    return Table(["preset", "g", "E", "dE", "tau_min", "binding"], rows)


def _closed_form_or_none(spec, theta):
    return concurrence_closed_form(spec.label, theta) if spec.label in ("A", "B", "C", "D") else None


def run_concurrence(system, specs, g_values) -> Table:
    rows = []
    for spec in specs:
        for g in g_values:
            theta = system.spectrum(g).theta
            rows.append({
                "preset": spec.label, "g": g, "theta": theta,
                "C": concurrence(to_product_basis(spec, theta)),
                "C_closed_form": _closed_form_or_none(spec, theta),
            })
    return Table(["preset", "g", "theta", "C", "C_closed_form"], rows)


def run_table2(system: System = System(), thresholds: Thresholds = Thresholds()) -> Table:
    """Timing, speed-bound and concurrence summary for the four reference packets."""
    rows = []
    notes = []
    for label, g in TABLE2_CASES:
        spec = WavepacketSpec.preset(label)
        s = system.spectrum(g)
        t = timing(spec, s, recurrence_threshold=thresholds.recurrence,
                   orthogonality_threshold=thresholds.orthogonality)
        b = speed_bound(spec, s)
        note = ""
        if label == "C":
            note = (f"dE computed from the level weights (= E for two equal weights); "
                    f"the reference value {_REFERENCE_DE_C} is treated as a misprint")
            notes.append(f"C: {note}")
        rows.append({
            "wavepacket": label, "g": g, "T": t.T, "tau": t.tau, "E": b.E, "dE": b.dE,
            "tau_min": b.tau_min, "C": concurrence(to_product_basis(spec, s.theta)), "note": note,
        })
    return Table(["wavepacket", "g", "T", "tau", "E", "dE", "tau_min", "C", "note"], rows, notes)


def _sweep_point(args):
    system, spec, g, thresholds, t_max = args
    s = system.spectrum(g)
    t = timing(spec, s, _scan(t_max), recurrence_threshold=thresholds.recurrence,
               orthogonality_threshold=thresholds.orthogonality)
    b = speed_bound(spec, s)
    return {
        "preset": spec.label, "g": g, "T": t.T, "tau": t.tau, "gamma_at_tau": t.gamma_at_tau,
        "E": b.E, "dE": b.dE, "tau_min": b.tau_min,
        "C": concurrence(to_product_basis(spec, s.theta)),
    }


def run_sweep(system, specs, g_values, thresholds=Thresholds(), t_max=None, jobs: int = 1) -> Table:
    """Long-form (preset, g) table of T, tau, tau_min and C.

    Rows come out ordered by preset then g whatever ``jobs`` is.
    """
    # resolve the shared quantities once so workers receive them pickled
    system.gamma
    tasks = [(system, spec, float(g), thresholds, t_max) for spec in specs for g in g_values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(task) for task in tasks]
    return Table(["preset", "g", "T", "tau", "gamma_at_tau", "E", "dE", "tau_min", "C"], rows)


def slowest_period(spec: WavepacketSpec, spectrum: CoupledSpectrum) -> float:
    om = spectrum.omegas[spec.weights > 1e-15]
    om = np.unique(np.round(om - om.min(), 14))
    om = om[om > 0]
    if om.size == 0:
        return 1.0
    return 2.0 * math.pi / float(om.min())


def run_trace(system, spec, g, t_max=None, t_steps=2001) -> Table:
    """Gamma(t) and |Psi(x_m, x_m, t)|^2 on a uniform time grid."""
    s = system.spectrum(g)
    if t_max is None:
        t_max = slowest_period(spec, s)
    times = np.linspace(0.0, t_max, int(t_steps))
    gam = correlation(spec, s, times)
    x_m = system.x_m
    rows = []
    for t, gv in zip(times, np.atleast_1d(gam)):
        psi = amplitude(spec, s, system.basis, t, x_m, x_m)
        rows.append({"t": float(t), "gamma": float(gv), "density_xm": float(abs(psi) ** 2)})
    return Table(["t", "gamma", "density_xm"], rows, [f"x_m = {x_m:.9g}"])


DENSITY_FRACTIONS = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)


def run_density(system, spec, g, grid=GridSpec(), times=None, thresholds=Thresholds()) -> Table:
    """Density snapshots; by default at fractions 0..0.5 of the tunneling period."""
    s = system.spectrum(g)
    if times is None:
        T = timing(spec, s, recurrence_threshold=thresholds.recurrence,
                   orthogonality_threshold=thresholds.orthogonality).T
        period = T if T else slowest_period(spec, s)
        snapshots = [(f, f * period) for f in DENSITY_FRACTIONS]
    else:
        snapshots = [(None, float(t)) for t in times]
    x = grid.points()
    rows = []
    for frac, t in snapshots:
        rho = density(spec, s, system.basis, t, grid)
        for i, x1 in enumerate(x):
            for j, x2 in enumerate(x):
                rows.append({"t_fraction": frac, "t": t, "x1": float(x1), "x2": float(x2),
                             "density": float(rho[i, j])})
    return Table(["t_fraction", "t", "x1", "x2", "density"], rows)


def run_marginal(system, spec, g, grid=GridSpec(), t_max=None, t_steps=101) -> Table:
    s = system.spectrum(g)
    if t_max is None:
        t_max = slowest_period(spec, s)
    x = grid.points()
    rows = []
    for t in np.linspace(0.0, t_max, int(t_steps)):
        rho = marginal_x1(spec, s, system.basis, t, x)
        mx = mean_x1(spec, s, system.basis, t)
        for x1, r in zip(x, rho):
            rows.append({"t": float(t), "x1": float(x1), "rho": float(r), "mean_x1": mx})
    return Table(["t", "x1", "rho", "mean_x1"], rows)


def _format_number(v):
    if v is None:
        return ""
    if isinstance(v, (bool, str)):
        return str(v)
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    out = f"{v:.{SIG_DIGITS}g}"
    return "0" if out == "-0" else out


def to_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_format_number(row.get(c)) for c in table.columns])
    return buf.getvalue()


def _json_value(v):
    if v is None or isinstance(v, (bool, str, int)):
        return v
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    v = float(v)
    if not math.isfinite(v):
        return _format_number(v)
    return float(f"{v:.{SIG_DIGITS}g}")


def to_json(table: Table, config: dict) -> str:
    doc = {
        "schema": SCHEMA,
        "config": _json_value(config),
        "rows": [{c: _json_value(row.get(c)) for c in table.columns} for row in table.rows],
    }
    if table.notes:
        doc["notes"] = list(table.notes)
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"
