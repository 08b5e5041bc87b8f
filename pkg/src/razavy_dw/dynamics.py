"""Wavepacket evolution in the four-level eigenbasis.

Time enters only through the phases exp(-i (E_nu - E_0) t / hbar); dropping the
common E_0 phase leaves every observable here unchanged.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .coupled import CoupledSpectrum, eigenstate_matrix
from .errors import DegenerateSpecWarning, GridInvalid, InvalidParams, UnknownPreset
from .numerics import ScanSpec, discrete_extrema, refine_local_extremum
from .well import SingleWellBasis, eigenfunction

__all__ = [
    "PRESETS",
    "WavepacketSpec",
    "TimingResult",
    "GridSpec",
    "DEFAULT_RECURRENCE_THRESHOLD",
    "DEFAULT_ORTHOGONALITY_THRESHOLD",
    "LOOSE_ORTHOGONALITY_THRESHOLD",
    "correlation",
    "timing",
    "product_coefficients",
    "amplitude",
    "density",
    "marginal_x1",
    "mean_x1",
]

DEFAULT_RECURRENCE_THRESHOLD = 1.0 - 1e-3
DEFAULT_ORTHOGONALITY_THRESHOLD = 1e-6
LOOSE_ORTHOGONALITY_THRESHOLD = 1e-3

_NORM_TOL = 1e-12
_WEIGHT_FLOOR = 1e-15

_H = 0.5
_S = 1.0 / math.sqrt(2.0)
PRESETS = {
    "A": (_H, _S, 0.0, _H),
    "B": (_S, 0.0, 0.0, _S),
    "C": (_S, _S, 0.0, 0.0),
    "D": (_H, _H, _H, _H),
}


@dataclass(frozen=True)
class WavepacketSpec:
    """Expansion coefficients a_0..a_3 over the coupled eigenstates Phi_0..Phi_3."""

    a: tuple
    label: str = "custom"

    def __post_init__(self):
        a = tuple(complex(v) for v in self.a)
        if len(a) != 4:
            raise InvalidParams(f"a wavepacket needs four coefficients, got {len(a)}")
        norm = sum(abs(v) ** 2 for v in a)
        if abs(norm - 1.0) > _NORM_TOL:
            raise InvalidParams(f"coefficients must satisfy sum |a|^2 = 1, got {norm:.15g}")
        object.__setattr__(self, "a", a)

    @classmethod
    def preset(cls, name: str) -> "WavepacketSpec":
        key = name.upper()
        if key not in PRESETS:
            raise UnknownPreset(f"unknown preset {name!r}; choose from A, B, C, D")
        return cls(PRESETS[key], label=key)

    @classmethod
    def normalized(cls, a, label: str = "custom") -> "WavepacketSpec":
        a = np.asarray(a, dtype=complex)
        norm = float(np.sqrt(np.sum(np.abs(a) ** 2)))
        if norm == 0.0:
            raise InvalidParams("all coefficients are zero")
        return cls(tuple(a / norm), label=label)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array(self.a, dtype=complex)

    @property
    def weights(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    def with_phase(self, phi: float) -> "WavepacketSpec":
        """Same state times a global phase exp(i phi)."""
        return WavepacketSpec(tuple(self.coefficients * np.exp(1j * phi)), label=self.label)


@dataclass(frozen=True)
class TimingResult:
    T: Optional[float]
    tau: Optional[float]
    gamma_at_T: Optional[float]
    gamma_at_tau: Optional[float]
    method: str


@dataclass(frozen=True)
class GridSpec:
    """Square n x n lattice on [lo, hi]^2."""

    n: int = 201
    lo: float = -3.0
    hi: float = 3.0

    def __post_init__(self):
        if int(self.n) < 2:
            raise GridInvalid(f"grid needs at least 2 points per axis, got {self.n}")
        if not self.lo < self.hi:
            raise GridInvalid(f"grid bounds must satisfy lo < hi, got ({self.lo}, {self.hi})")

    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, int(self.n))


def _phased_sum(weights, omegas, t):
    t = np.asarray(t, dtype=float)
    # dividing by the weight sum makes Gamma(0) == 1 exactly despite roundoff in |a|^2
    return np.exp(-1j * np.multiply.outer(t, omegas)) @ (weights / weights.sum())


def correlation(spec: WavepacketSpec, spectrum: CoupledSpectrum, t):
    """Gamma(t) = | sum_nu |a_nu|^2 exp(-i Omega_nu t) |, scalar or array in t."""
    g = np.abs(_phased_sum(spec.weights, spectrum.omegas, t))
    return float(g) if np.ndim(g) == 0 else g


def _frequency_groups(spec, spectrum):
    """Merge active levels that share a frequency (E_1 = E_2 at g = 0)."""
    w = spec.weights
    om = spectrum.omegas
    scale = max(1.0, float(np.max(np.abs(om))))
    groups = []
    for weight, freq in zip(w, om):
        if weight <= _WEIGHT_FLOOR:
            continue
        for grp in groups:
            if abs(grp[1] - freq) <= 1e-12 * scale:
                grp[0] += weight
                break
        else:
            groups.append([weight, float(freq)])
    return sorted(groups, key=lambda item: item[1])


def timing(
    spec: WavepacketSpec,
    spectrum: CoupledSpectrum,
    scan: Optional[ScanSpec] = None,
    recurrence_threshold: float = DEFAULT_RECURRENCE_THRESHOLD,
    orthogonality_threshold: float = DEFAULT_ORTHOGONALITY_THRESHOLD,
    *,
    force_scan: bool = False,
) -> TimingResult:
    """Tunneling period T and orthogonality time tau.

    T is the first local maximum of Gamma with value >= ``recurrence_threshold``
    and tau the first local minimum with value <= ``orthogonality_threshold``;
    either is ``None`` if not reached by ``scan.t_max``. The default horizon is
    20 periods of the slowest populated frequency. With exactly two populated
    levels the closed forms T = 2 pi / Omega and tau = pi / Omega are used
    unless ``force_scan`` is set.

    A packet that populates a single level has Gamma == 1: a
    DegenerateSpecWarning is emitted and T = 0, tau = None are returned.
    """
    groups = _frequency_groups(spec, spectrum)
    if len(groups) < 2:
        warnings.warn(
            "wavepacket populates a single energy level; Gamma(t) == 1, T set to 0",
            DegenerateSpecWarning,
            stacklevel=2,
        )
        return TimingResult(T=0.0, tau=None, gamma_at_T=1.0, gamma_at_tau=None, method="degenerate")

    weights = np.array([grp[0] for grp in groups])
    freqs = np.array([grp[1] for grp in groups])
    nonzero = freqs[freqs > 0]
    omega_min, omega_max = float(nonzero.min()), float(nonzero.max())

    if len(groups) == 2 and not force_scan:
        omega = omega_max - float(freqs[0])
        T = 2.0 * math.pi / omega
        depth = float(abs(weights[0] - weights[1]))
        tau = math.pi / omega if depth <= orthogonality_threshold else None
        return TimingResult(
            T=T,
            tau=tau,
            gamma_at_T=float(abs(weights.sum())),
            gamma_at_tau=depth if tau is not None else None,
            method="analytic-two-state",
        )

    if scan is None:
        scan = ScanSpec(t_max=20.0 * 2.0 * math.pi / omega_min)
    scan = replace(scan, fastest_frequency=omega_max)

    def gamma(t):
        return float(abs(_phased_sum(weights, freqs, t)))

    def gamma_sq_rate(t):
        phases = np.exp(-1j * freqs * t)
        w = weights / weights.sum()
        s = np.dot(w, phases)
        ds = np.dot(w * (-1j * freqs), phases)
        return 2.0 * float((np.conj(s) * ds).real)

    t = scan.grid()
    values = np.abs(_phased_sum(weights, freqs, t))
    minima, maxima = discrete_extrema(values)
    # |dGamma/dt| <= sum w Omega bounds how far a refined extremum can move in value
    slack = float(np.dot(weights, np.abs(freqs))) * (t[1] - t[0])

    def first(indices, kind, accept):
        for i in indices:
            grid_value = values[i]
            if kind == "min" and grid_value - slack > orthogonality_threshold:
                continue
            if kind == "max" and grid_value + slack < recurrence_threshold:
                continue
            t_star, _ = refine_local_extremum(
                gamma, (t[i - 1], t[i + 1]), kind,
                tol=scan.refine_tol, derivative=gamma_sq_rate,
            )
            value = gamma(t_star)
            if accept(value):
                return float(t_star), value
        return None, None

    tau, g_tau = first(minima, "min", lambda v: v <= orthogonality_threshold)
    T, g_T = first(maxima, "max", lambda v: v >= recurrence_threshold)
    return TimingResult(T=T, tau=tau, gamma_at_T=g_T, gamma_at_tau=g_tau, method="numeric-scan")


def product_coefficients(spec: WavepacketSpec, spectrum: CoupledSpectrum, t):
    """Amplitudes c_kl(t) over (00, 01, 10, 11); shape (..., 4) for array t."""
    phases = np.exp(-1j * np.multiply.outer(np.asarray(t, dtype=float), spectrum.omegas))
    evolved = phases * spec.coefficients
    return evolved @ eigenstate_matrix(spectrum.theta)


def _orbitals(basis, x):
    x = np.asarray(x, dtype=float)
    return np.stack([eigenfunction(basis, 0, x), eigenfunction(basis, 1, x)])


def amplitude(spec, spectrum, basis, t, x1, x2):
    """Psi(x1, x2, t) at matching points (broadcast over x1, x2; scalar t)."""
    c = product_coefficients(spec, spectrum, t).reshape(2, 2)
    p1 = _orbitals(basis, x1)
    p2 = _orbitals(basis, x2)
    return np.einsum("k...,kl,l...->...", p1, c, p2)


def density(
    spec: WavepacketSpec,
    spectrum: CoupledSpectrum,
    basis: SingleWellBasis,
    t: float,
    grid: GridSpec = GridSpec(),
) -> np.ndarray:
    """|Psi(x1, x2, t)|^2 on the grid; entry [i, j] is at (x[i], x[j])."""
    x = grid.points()
    p = _orbitals(basis, x)
    c = product_coefficients(spec, spectrum, t).reshape(2, 2)
    psi = p.T @ c @ p
    return np.abs(psi) ** 2


def _reduced(spec, spectrum, t):
    c = product_coefficients(spec, spectrum, t).reshape(2, 2)
    # tracing out x2 leaves the 2x2 matrix C C^dagger over (phi0, phi1) of x1
    return c @ c.conj().T


def marginal_x1(spec, spectrum, basis, t, x1):
    """rho(x1, t) = integral of |Psi|^2 over x2, in closed form via orthonormality."""
    r = _reduced(spec, spectrum, t)
    phi0 = eigenfunction(basis, 0, x1)
    phi1 = eigenfunction(basis, 1, x1)
    rho = r[0, 0].real * phi0 ** 2 + r[1, 1].real * phi1 ** 2 + 2.0 * r[0, 1].real * phi0 * phi1
    return float(rho) if np.ndim(rho) == 0 else rho


def mean_x1(spec, spectrum, basis, t) -> float:
    """<x1>(t); only the phi0-phi1 cross term survives, weighted by gamma."""
    r = _reduced(spec, spectrum, t)
    return 2.0 * float(r[0, 1].real) * spectrum.gamma
