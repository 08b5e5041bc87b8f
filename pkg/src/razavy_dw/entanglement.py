"""Speed-limit bound on the orthogonality time, and pure-state concurrence."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coupled import CoupledSpectrum
from .dynamics import WavepacketSpec
from .errors import UnknownPreset

__all__ = [
    "SpeedBound",
    "ProductBasisState",
    "speed_bound",
    "to_product_basis",
    "concurrence",
    "concurrence_real",
    "concurrence_closed_form",
]


@dataclass(frozen=True)
class SpeedBound:
    """Mean energy E and spread dE above E_0, and the bound they imply.

    ``tau_min`` is ``math.inf`` when the smaller of E, dE vanishes (a packet
    that populates a single level never becomes orthogonal to itself).
    ``binding`` names the term that attains the maximum.
    """

    E: float
    dE: float
    tau_min: float
    binding: str


@dataclass(frozen=True)
class ProductBasisState:
    """Pure two-qubit state over |k l> = phi_k(x1) phi_l(x2)."""

    c00: complex
    c01: complex
    c10: complex
    c11: complex

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.c00, self.c01], [self.c10, self.c11]], dtype=complex)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_matrix()))


def speed_bound(spec: WavepacketSpec, spectrum: CoupledSpectrum) -> SpeedBound:
    w = spec.weights
    gaps = np.asarray(spectrum.E) - spectrum.E[0]
    mean = float(np.dot(w, gaps))
    # roundoff can push the variance of a near-pure packet slightly negative
    variance = max(float(np.dot(w, gaps ** 2)) - mean ** 2, 0.0)
    spread = math.sqrt(variance)
    smallest = min(mean, spread)
    tau_min = math.inf if smallest <= 0.0 else math.pi * spectrum.hbar / (2.0 * smallest)
    if math.isclose(mean, spread, rel_tol=1e-9, abs_tol=1e-15):
        binding = "equal"
    elif mean < spread:
        binding = "mean"
    else:
        binding = "spread"
    return SpeedBound(E=mean, dE=spread, tau_min=tau_min, binding=binding)


def to_product_basis(spec: WavepacketSpec, theta: float) -> ProductBasisState:
    """Rewrite the t = 0 packet over the product basis."""
    a0, a1, a2, a3 = spec.a
    c, s = math.cos(theta), math.sin(theta)
    r = 1.0 / math.sqrt(2.0)
    return ProductBasisState(
        c00=a0 * c - a3 * s,
        c01=r * (a1 - a2),
        c10=r * (a1 + a2),
        c11=a0 * s + a3 * c,
    )


def concurrence(state: ProductBasisState) -> float:
    """C = 2 |c00 c11 - c01 c10|, zero exactly for product states."""
    return 2.0 * abs(state.c00 * state.c11 - state.c01 * state.c10)


def concurrence_real(spec: WavepacketSpec, theta: float) -> float:
    """Concurrence expanded directly in real eigenbasis coefficients.

    Only valid when every a_nu is real; complex input raises ValueError.
    """
    if any(abs(v.imag) > 0.0 for v in spec.a):
        raise ValueError("concurrence_real requires real coefficients")
    a0, a1, a2, a3 = (v.real for v in spec.a)
    return abs(
        (a0 ** 2 - a3 ** 2) * math.sin(2 * theta)
        + 2 * a0 * a3 * math.cos(2 * theta)
        - a1 ** 2
        + a2 ** 2
    )


_CLOSED_FORMS = {
    "A": lambda th: 0.5 * abs(1.0 - math.cos(2 * th)),
    "B": lambda th: abs(math.cos(2 * th)),
    "C": lambda th: 0.5 * abs(1.0 - math.sin(2 * th)),
    "D": lambda th: 0.5 * abs(math.cos(2 * th)),
}


def concurrence_closed_form(preset: str, theta: float) -> float:
    try:
        return _CLOSED_FORMS[preset.upper()](theta)
    except KeyError:
        raise UnknownPreset(f"no closed-form concurrence for preset {preset!r}") from None
