"""One-dimensional numerical kernels: quadrature, first-root search, extremum refinement.

Everything here is a pure function of its arguments. The quadrature rules work on
a truncated symmetric domain [-H, H], which is exact to double precision for the
super-exponentially decaying integrands that appear in the Razavy well.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import BracketInvalid, NonConvergence

__all__ = [
    "QuadratureSpec",
    "ScanSpec",
    "integrate",
    "find_first_root",
    "refine_local_extremum",
    "discrete_extrema",
]

_EPS = np.finfo(float).eps
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_CGOLD = 1.0 - _INV_PHI

# Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
# full 15-node layout: -x0..-x6, 0, x6..x0
_NODES15 = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
_WK15 = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
_WG15 = np.zeros(15)
# Gauss 7-point nodes sit at odd positions of the Kronrod layout
_WG15[[1, 3, 5]] = _WG[:3]
_WG15[7] = _WG[3]
_WG15[[9, 11, 13]] = _WG[2::-1]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and truncation for integrals over the real line.

    The domain is cut to ``[-truncation_halfwidth, truncation_halfwidth]``.
    """

    truncation_halfwidth: float = 6.0
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_subdivisions: int = 60

    def __post_init__(self):
        if not self.truncation_halfwidth > 0:
            raise ValueError("truncation_halfwidth must be positive")
        if not self.rel_tol > 0 or not self.abs_tol > 0:
            raise ValueError("rel_tol and abs_tol must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")


@dataclass(frozen=True)
class ScanSpec:
    """Uniform time scan followed by local refinement.

    The scan step is ``2*pi / (fastest_frequency * samples_per_fastest_period)``,
    so ``fastest_frequency`` should be the largest angular frequency present in
    the scanned signal.
    """

    t_max: float
    samples_per_fastest_period: int = 256
    refine_tol: float = 1e-10
    fastest_frequency: float = 1.0

    def __post_init__(self):
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if self.samples_per_fastest_period < 8:
            raise ValueError("samples_per_fastest_period must be >= 8")
        if not self.refine_tol > 0:
            raise ValueError("refine_tol must be positive")
        if not self.fastest_frequency > 0:
            raise ValueError("fastest_frequency must be positive")

    @property
    def step(self) -> float:
        return 2.0 * math.pi / (self.fastest_frequency * self.samples_per_fastest_period)

    def grid(self) -> np.ndarray:
        n = max(2, int(math.ceil(self.t_max / self.step)))
        return np.linspace(0.0, self.t_max, n + 1)


def _evaluate(f, x):
    """Call ``f`` on an array, falling back to a Python loop for scalar-only callables."""
    x = np.asarray(x, dtype=float)
    try:
        vals = np.asarray(f(x), dtype=float)
    except (TypeError, ValueError):
        vals = None
    if vals is None or vals.shape != x.shape:
        vals = np.array([float(f(xi)) for xi in x.ravel()]).reshape(x.shape)
    return vals


def _gk15(f, a, b):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    fx = _evaluate(f, c + h * _NODES15)
    kronrod = h * float(np.dot(_WK15, fx))
    gauss = h * float(np.dot(_WG15, fx))
    return kronrod, abs(kronrod - gauss)


def _integrate_gk(f, a, b, spec):
    est, err = _gk15(f, a, b)
    heap = [(-err, a, b, est)]
    n_intervals = 1
    while True:
        total = math.fsum(item[3] for item in heap)
        total_err = math.fsum(-item[0] for item in heap)
        if total_err <= max(spec.abs_tol, spec.rel_tol * abs(total)):
            return total
        if n_intervals >= spec.max_subdivisions:
            raise NonConvergence(
                f"adaptive Gauss-Kronrod: error estimate {total_err:.3g} after "
                f"{n_intervals} subintervals"
            )
        _, lo, hi, _ = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        for sub in ((lo, mid), (mid, hi)):
            e, r = _gk15(f, *sub)
            heapq.heappush(heap, (-r, sub[0], sub[1], e))
        n_intervals += 1


def _integrate_tanh_sinh(f, a, b, spec, max_level=12):
    # double-exponential substitution; each level halves the step in u
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    u_max = 3.5
    previous = None
    for level in range(max_level + 1):
        step = 2.0 ** (-level)
        u = np.arange(-u_max, u_max + 0.5 * step, step)
        s = 0.5 * math.pi * np.sinh(u)
        x = np.tanh(s)
        w = 0.5 * math.pi * np.cosh(u) / np.cosh(s) ** 2
        keep = np.abs(x) < 1.0
        vals = _evaluate(f, c + h * x[keep])
        estimate = h * step * math.fsum(w[keep] * vals)
        if previous is not None:
            err = abs(estimate - previous)
            if level >= 3 and err <= max(spec.abs_tol, spec.rel_tol * abs(estimate)):
                return estimate
        previous = estimate
    raise NonConvergence(f"tanh-sinh: no convergence after {max_level} levels")


def integrate(
    f: Callable,
    spec: QuadratureSpec = QuadratureSpec(),
    *,
    lo: Optional[float] = None,
    hi: Optional[float] = None,
    rule: str = "gauss-kronrod",
) -> float:
    """Integrate ``f`` over ``[lo, hi]`` (default ``[-H, H]``).

    Parameters
    ----------
    f : callable
        Real function of one variable. Array-aware callables are evaluated in
        batches; scalar-only ones are looped over.
    spec : QuadratureSpec
        Tolerances, truncation half-width and subdivision budget.
    rule : {"gauss-kronrod", "tanh-sinh"}
        Globally adaptive G7/K15 bisection, or level-doubling double-exponential
        quadrature. The two share no nodes and serve as mutual cross-checks.

    Raises
    ------
    NonConvergence
        If the error estimate stays above ``max(abs_tol, rel_tol*|I|)``.
    """
    a = -spec.truncation_halfwidth if lo is None else float(lo)
    b = spec.truncation_halfwidth if hi is None else float(hi)
    if a == b:
        return 0.0
    if a > b:
        return -integrate(f, spec, lo=b, hi=a, rule=rule)
    if rule == "gauss-kronrod":
        return _integrate_gk(f, a, b, spec)
    if rule == "tanh-sinh":
        return _integrate_tanh_sinh(f, a, b, spec)
    raise ValueError(f"unknown quadrature rule {rule!r}")


def _bisect(f, a, b, fa, xtol, max_iter=200):
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        if b - a <= xtol or m in (a, b):
            return m
        fm = f(m)
        if fm == 0.0:
            return m
        if (fa < 0) == (fm < 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _golden_min(f, a, b, xtol, max_iter=300):
    """Golden-section minimisation; robust for cusp-shaped minima such as |g(t)|."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def find_first_root(f: Callable, scan: ScanSpec) -> Optional[float]:
    """Smallest t in (0, t_max] where ``f`` vanishes, or ``None``.

    Sign changes are refined by bisection. Touching zeros (``f >= 0`` with a
    zero minimum, e.g. a modulus) are found as local minima of ``|f|`` and
    refined by golden section; they count only if ``|f(t*)| <= refine_tol``.
    """
    t = scan.grid()
    vals = _evaluate(f, t)
    absvals = np.abs(vals)
    scalar = lambda s: float(_evaluate(f, np.array([s]))[0])
    xtol = max(1e-3 * scan.refine_tol, 4 * _EPS * scan.t_max)
    n = len(t)
    for i in range(1, n):
        if vals[i] == 0.0:
            return float(t[i])
        if vals[i - 1] != 0.0 and (vals[i - 1] < 0) != (vals[i] < 0):
            return _bisect(scalar, t[i - 1], t[i], vals[i - 1], xtol)
        if i + 1 < n and absvals[i] <= absvals[i - 1] and absvals[i] <= absvals[i + 1]:
            ts, fs = _golden_min(lambda s: abs(scalar(s)), t[i - 1], t[i + 1], xtol)
            if fs <= scan.refine_tol:
                return float(ts)
    return None


def _brent_min(f, a, b, tol, max_iter=500):
    """Brent's parabolic/golden-section minimisation on [a, b]."""
    x = w = v = a + _CGOLD * (b - a)
    fx = fw = fv = f(x)
    d = e = 0.0
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        tol1 = tol + _EPS * abs(x)
        tol2 = 2.0 * tol1
        if abs(x - m) <= tol2 - 0.5 * (b - a):
            break
        parabolic = False
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            if abs(p) < abs(0.5 * q * e) and q * (a - x) < p < q * (b - x):
                e, d = d, p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = tol1 if m >= x else -tol1
                parabolic = True
        if not parabolic:
            e = (a - x) if x >= m else (b - x)
            d = _CGOLD * e
        u = x + d if abs(d) >= tol1 else x + (tol1 if d > 0 else -tol1)
        fu = f(u)
        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v, fv, w, fw, x, fx = w, fw, x, fx, u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv, w, fw = w, fw, u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return x, fx


def refine_local_extremum(
    f: Callable[[float], float],
    bracket: tuple,
    kind: str = "min",
    *,
    tol: float = 1e-10,
    derivative: Optional[Callable[[float], float]] = None,
) -> tuple:
    """Locate the single local extremum of ``f`` inside ``bracket``.

    When ``derivative`` is supplied and changes sign across the bracket, the
    extremum is found as a bracketed root of the derivative, which reaches
    ``tol`` in t regardless of how flat ``f`` is. Otherwise Brent's method on
    ``f`` is used; its accuracy in t is then limited to roughly
    ``sqrt(eps) * |t|`` by the flatness of a smooth extremum.

    Returns ``(t_star, f(t_star))``.
    """
    lo, hi = (float(v) for v in bracket)
    if not lo < hi:
        raise BracketInvalid(f"bracket must satisfy lo < hi, got ({lo}, {hi})")
    if kind not in ("min", "max"):
        raise ValueError("kind must be 'min' or 'max'")
    sign = 1.0 if kind == "min" else -1.0
    if derivative is not None:
        d_lo, d_hi = sign * derivative(lo), sign * derivative(hi)
        if d_lo <= 0.0 <= d_hi:
            if d_lo == 0.0:
                t_star = lo
            elif d_hi == 0.0:
                t_star = hi
            else:
                t_star = _bisect(lambda s: sign * derivative(s), lo, hi, d_lo, tol * 1e-2)
            return t_star, f(t_star)
    t_star, _ = _brent_min(lambda s: sign * f(s), lo, hi, tol)
    return t_star, f(t_star)


def discrete_extrema(values: np.ndarray) -> tuple:
    """Indices of interior discrete local minima and maxima of a sampled signal.

    Plateaus are reported once, at their first sample.
    """
    v = np.asarray(values, dtype=float)
    left = v[1:-1] - v[:-2]
    right = v[2:] - v[1:-1]
    minima = np.nonzero((left < 0) & (right >= 0))[0] + 1
    maxima = np.nonzero((left > 0) & (right <= 0))[0] + 1
    return minima, maxima
