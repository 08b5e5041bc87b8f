"""The single Razavy double well: potential, closed-form levels and the two lowest eigenfunctions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams
from .numerics import QuadratureSpec, integrate, refine_local_extremum

__all__ = [
    "PotentialParams",
    "SingleWellBasis",
    "potential",
    "single_well_levels",
    "eigenfunction",
    "build_basis",
    "right_packet_peak",
]

# exp(-700) ~ 1e-304; past this the Gaussian-like factor underflows every prefactor
_EXP_CUTOFF = 700.0


@dataclass(frozen=True)
class PotentialParams:
    hbar: float = 1.0
    mass: float = 1.0
    xi: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "mass", "xi"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise InvalidParams(f"{name} must be a positive finite number, got {value!r}")

    @property
    def scale(self) -> float:
        """The kinetic prefactor hbar^2 / 2m that multiplies every energy."""
        return self.hbar ** 2 / (2.0 * self.mass)


@dataclass(frozen=True)
class SingleWellBasis:
    """Normalised lowest doublet of one well plus its analytic geometry."""

    params: PotentialParams
    eps: tuple
    A0: float
    A1: float
    x_s: float
    V_min: float
    V_barrier: float


def potential(params: PotentialParams, x):
    """Razavy potential V(x); overflows (to inf) for |x| beyond about 170."""
    xi = params.xi
    x = np.asarray(x, dtype=float)
    v = params.scale * (xi ** 2 / 8.0 * np.cosh(4.0 * x) - 4.0 * xi * np.cosh(2.0 * x) - xi ** 2 / 8.0)
    return float(v) if v.ndim == 0 else v


def single_well_levels(params: PotentialParams) -> tuple:
    """The four closed-form levels (eps0, eps1, eps2, eps3), ascending for every xi > 0."""
    xi = params.xi
    r_minus = math.sqrt(4.0 - 2.0 * xi + xi ** 2)
    r_plus = math.sqrt(4.0 + 2.0 * xi + xi ** 2)
    s = params.scale
    return (
        s * (-xi - 5.0 - 2.0 * r_minus),
        s * (xi - 5.0 - 2.0 * r_plus),
        s * (-xi - 5.0 + 2.0 * r_minus),
        s * (xi - 5.0 + 2.0 * r_plus),
    )


def _unnormalized(params: PotentialParams, n: int, x):
    xi = params.xi
    x = np.asarray(x, dtype=float)
    arg = xi * np.cosh(np.clip(2.0 * x, -_EXP_CUTOFF, _EXP_CUTOFF)) / 4.0
    alive = arg <= _EXP_CUTOFF
    xs = np.where(alive, x, 0.0)
    if n == 0:
        c3 = 4.0 - xi + 2.0 * math.sqrt(4.0 - 2.0 * xi + xi ** 2)
        poly = 3.0 * xi * np.cosh(xs) + c3 * np.cosh(3.0 * xs)
    elif n == 1:
        c3 = 4.0 + xi + 2.0 * math.sqrt(4.0 + 2.0 * xi + xi ** 2)
        poly = 3.0 * xi * np.sinh(xs) + c3 * np.sinh(3.0 * xs)
    else:
        raise ValueError(f"only the two lowest eigenfunctions are available, got n={n}")
    return np.where(alive, np.exp(-np.where(alive, arg, 0.0)) * poly, 0.0)


def eigenfunction(basis: SingleWellBasis, n: int, x):
    """Normalised phi_n(x) for n in {0, 1}; phi_0 is even and phi_1 odd."""
    amplitude = basis.A0 if n == 0 else basis.A1
    v = amplitude * _unnormalized(basis.params, n, x)
    return float(v) if np.ndim(v) == 0 else v


def build_basis(params: PotentialParams = PotentialParams(), quad: QuadratureSpec = QuadratureSpec()) -> SingleWellBasis:
    """Fix A0, A1 by quadrature and evaluate the well geometry analytically.

    Raises InvalidParams when xi >= 8: the minimum condition cosh(2 x_s) = 8/xi
    has no solution and the potential is a single well.
    """
    if params.xi >= 8.0:
        raise InvalidParams(
            f"xi={params.xi} >= 8 gives a single well (cosh 2x_s = 8/xi has no real root)"
        )
    norms = [
        integrate(lambda x, n=n: _unnormalized(params, n, x) ** 2, quad) for n in (0, 1)
    ]
    x_s = math.acosh(8.0 / params.xi) / 2.0
    return SingleWellBasis(
        params=params,
        eps=single_well_levels(params),
        A0=1.0 / math.sqrt(norms[0]),
        A1=1.0 / math.sqrt(norms[1]),
        x_s=x_s,
        V_min=potential(params, x_s),
        V_barrier=potential(params, 0.0),
    )


def right_packet_peak(basis: SingleWellBasis, tol: float = 1e-10) -> float:
    """Abscissa x_m > 0 where the right-localised packet (phi0 + phi1)/sqrt(2) peaks."""
    packet = lambda x: (eigenfunction(basis, 0, x) + eigenfunction(basis, 1, x)) / math.sqrt(2.0)
    hi = 2.0 * basis.x_s
    xs = np.linspace(0.0, hi, 401)
    k = int(np.argmax(packet(xs) ** 2))
    lo_b, hi_b = xs[max(k - 1, 0)], xs[min(k + 1, len(xs) - 1)]
    # psi > 0 near the peak, so maximising psi maximises the density
    x_m, _ = refine_local_extremum(packet, (lo_b, hi_b), "max", tol=tol)
    return float(x_m)
