"""Two Razavy wells coupled by -g x1 x2, truncated to the product doublet basis.

Basis order is fixed everywhere as (phi0 phi0, phi0 phi1, phi1 phi0, phi1 phi1);
index k*2 + l holds phi_k(x1) phi_l(x2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import QuadratureSpec, integrate
from .well import PotentialParams, SingleWellBasis, eigenfunction, potential

__all__ = [
    "BASIS_LABELS",
    "CoupledSpectrum",
    "CoupledEigenstate",
    "overlap_gamma",
    "energy_matrix",
    "coupled_spectrum",
    "eigenstate",
    "eigenstate_matrix",
    "composite_potential",
]

BASIS_LABELS = ("00", "01", "10", "11")
_SQRT1_2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class CoupledSpectrum:
    """Closed-form spectrum of the coupled pair at one coupling g."""

    g: float
    gamma: float
    eps_sum: float
    delta: float
    theta: float
    E: tuple
    hbar: float = 1.0

    @property
    def omegas(self) -> np.ndarray:
        """Transition frequencies (E_nu - E_0)/hbar, with omegas[0] = 0."""
        e = np.asarray(self.E)
        return (e - e[0]) / self.hbar


@dataclass(frozen=True)
class CoupledEigenstate:
    index: int
    coefficients: tuple


def overlap_gamma(basis: SingleWellBasis, quad: QuadratureSpec = QuadratureSpec(), *, rule: str = "gauss-kronrod") -> float:
    """Dipole element gamma = integral of phi0(x) x phi1(x) over the line."""
    return integrate(
        lambda x: eigenfunction(basis, 0, x) * x * eigenfunction(basis, 1, x), quad, rule=rule
    )


def energy_matrix(basis: SingleWellBasis, g: float, gamma: float | None = None) -> np.ndarray:
    if gamma is None:
        gamma = overlap_gamma(basis)
    e0, e1 = basis.eps[0], basis.eps[1]
    c = -g * gamma ** 2
    return np.array([
        [2.0 * e0, 0.0, 0.0, c],
        [0.0, e0 + e1, c, 0.0],
        [0.0, c, e0 + e1, 0.0],
        [c, 0.0, 0.0, 2.0 * e1],
    ])


def coupled_spectrum(basis: SingleWellBasis, g: float, gamma: float | None = None) -> CoupledSpectrum:
    """Closed-form levels E0..E3 and mixing angle theta.

    Pass ``gamma`` explicitly when evaluating many couplings so that every
    point shares one overlap value.
    """
    if gamma is None:
        gamma = overlap_gamma(basis)
    e0, e1 = basis.eps[0], basis.eps[1]
    eps_sum = e0 + e1
    delta = e1 - e0
    coupling = g * gamma ** 2
    root = math.hypot(delta, coupling)
    # atan2 keeps theta in [-pi/4, pi/4] for delta > 0
    theta = 0.5 * math.atan2(coupling, delta)
    E = (eps_sum - root, eps_sum - coupling, eps_sum + coupling, eps_sum + root)
    return CoupledSpectrum(
        g=float(g), gamma=float(gamma), eps_sum=eps_sum, delta=delta, theta=theta,
        E=E, hbar=basis.params.hbar,
    )


def eigenstate_matrix(theta: float) -> np.ndarray:
    """Rows are Phi_0..Phi_3 expanded over the product basis."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([
        [c, 0.0, 0.0, s],
        [0.0, _SQRT1_2, _SQRT1_2, 0.0],
        [0.0, -_SQRT1_2, _SQRT1_2, 0.0],
        [-s, 0.0, 0.0, c],
    ])


def eigenstate(spectrum: CoupledSpectrum, index: int) -> CoupledEigenstate:
    if index not in (0, 1, 2, 3):
        raise IndexError(f"eigenstate index must be 0..3, got {index}")
    row = eigenstate_matrix(spectrum.theta)[index]
    return CoupledEigenstate(index=index, coefficients=tuple(float(v) for v in row))


def composite_potential(params: PotentialParams, g: float, x1, x2):
    u = potential(params, x1) + potential(params, x2) - g * np.asarray(x1) * np.asarray(x2)
    return float(u) if np.ndim(u) == 0 else u
