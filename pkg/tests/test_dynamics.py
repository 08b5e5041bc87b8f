import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sp_integrate

from razavy_dw.dynamics import (
    PRESETS,
    GridSpec,
    WavepacketSpec,
    amplitude,
    correlation,
    density,
    marginal_x1,
    mean_x1,
    timing,
)
from razavy_dw.errors import DegenerateSpecWarning, GridInvalid, InvalidParams, UnknownPreset
from razavy_dw.numerics import ScanSpec, find_first_root, refine_local_extremum
from razavy_dw.well import eigenfunction, right_packet_peak

R = 1 / math.sqrt(2)
REFERENCE_GS = (0.0, 0.05, 0.1, 0.15, 0.2)

unit_phase = st.floats(0, 2 * math.pi)


@st.composite
def packets(draw):
    re = draw(st.lists(st.floats(-1, 1), min_size=4, max_size=4))
    im = draw(st.lists(st.floats(-1, 1), min_size=4, max_size=4))
    a = np.array(re) + 1j * np.array(im)
    if np.linalg.norm(a) < 1e-3:
        a = np.array([1, 0, 0, 0], dtype=complex)
    return WavepacketSpec.normalized(a)


def test_presets_exact():
    assert PRESETS["A"] == (0.5, R, 0.0, 0.5)
    assert PRESETS["B"] == (R, 0.0, 0.0, R)
    assert PRESETS["C"] == (R, R, 0.0, 0.0)
    assert PRESETS["D"] == (0.5, 0.5, 0.5, 0.5)
    for p in "ABCD":
        assert WavepacketSpec.preset(p).weights.sum() == pytest.approx(1.0, abs=1e-15)


def test_spec_validation():
    with pytest.raises(InvalidParams):
        WavepacketSpec((1, 1, 0, 0))
    with pytest.raises(InvalidParams):
        WavepacketSpec((1, 0, 0))
    with pytest.raises(UnknownPreset):
        WavepacketSpec.preset("E")
    with pytest.raises(InvalidParams):
        WavepacketSpec.normalized((0, 0, 0, 0))


@settings(max_examples=40, deadline=None)
@given(spec=packets(), t=st.floats(0, 1e4))
def test_correlation_bounds(spectrum_at, spec, t):
    s = spectrum_at(0.1)
    assert correlation(spec, s, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert 0.0 <= correlation(spec, s, t) <= 1.0 + 1e-15


@settings(max_examples=30, deadline=None)
@given(w=st.lists(st.floats(0, 1), min_size=4, max_size=4), t=st.floats(0, 500))
def test_g0_polynomial_form(spectrum_at, w, t):
    if sum(w) < 1e-3:
        w = [1, 0, 0, 0]
    spec = WavepacketSpec.normalized(np.sqrt(w))
    s = spectrum_at(0.0)
    p = spec.weights
    z = np.exp(-1j * s.omegas[1] * t)
    assert correlation(spec, s, t) == pytest.approx(abs(p[0] + (p[1] + p[2]) * z + p[3] * z * z), abs=1e-12)


def test_correlation_zeros(spectrum_at):
    s0 = spectrum_at(0.0)
    B = WavepacketSpec.preset("B")
    assert correlation(B, s0, math.pi / s0.omegas[3]) == pytest.approx(0.0, abs=1e-12)
    s = spectrum_at(0.1)
    D = WavepacketSpec.preset("D")
    t_zero = math.pi / (s.E[3] - s.E[1])
    assert t_zero == pytest.approx(11.01, abs=0.01)
    assert correlation(D, s, t_zero) == pytest.approx(0.0, abs=1e-9)
    # Gamma_D factorises into two two-level factors
    t = np.linspace(0, 300, 500)
    om = s.omegas
    fact = 0.25 * np.abs((1 + np.exp(-1j * om[1] * t)) * (1 + np.exp(-1j * om[2] * t)))
    assert np.allclose(correlation(D, s, t), fact, atol=1e-13)


def test_array_and_scalar_agree(spectrum_at):
    s = spectrum_at(0.1)
    spec = WavepacketSpec.preset("D")
    t = np.linspace(0, 50, 7)
    assert np.allclose(correlation(spec, s, t), [correlation(spec, s, v) for v in t], atol=0, rtol=0)


@pytest.mark.parametrize("preset,g,T,tau", [
    ("A", 0.0, 72.81, 36.40),
    ("B", 0.0, 36.40, 18.20),
    ("C", 0.1, 240.63, 120.32),
])
def test_reference_timings(spectrum_at, preset, g, T, tau):
    r = timing(WavepacketSpec.preset(preset), spectrum_at(g))
    assert r.T == pytest.approx(T, abs=0.01)
    assert r.tau == pytest.approx(tau, abs=0.01)


def test_timing_D(spectrum_at):
    s = spectrum_at(0.1)
    r = timing(WavepacketSpec.preset("D"), s)
    assert r.method == "numeric-scan"
    assert r.T == pytest.approx(242.32, rel=1e-3)
    assert 11.0 <= r.tau <= 11.02
    assert r.gamma_at_T >= 1 - 1e-3
    assert r.gamma_at_tau <= 1e-6
    assert r.tau == pytest.approx(math.pi / (s.E[3] - s.E[1]), rel=1e-9)


def test_root_and_extremum_on_correlation(spectrum_at):
    s0 = spectrum_at(0.0)
    B = WavepacketSpec.preset("B")
    # Gamma_B touches zero without changing sign
    t = find_first_root(lambda t: correlation(B, s0, t), ScanSpec(t_max=100.0, fastest_frequency=s0.omegas[3]))
    assert t == pytest.approx(18.20, abs=0.005)
    A = WavepacketSpec.preset("A")
    t_star, v = refine_local_extremum(lambda t: correlation(A, s0, t), (70.0, 75.0), "max")
    assert t_star == pytest.approx(72.81, abs=0.005)
    assert v == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("preset", ["B", "C"])
@pytest.mark.parametrize("g", REFERENCE_GS)
def test_analytic_matches_scan(spectrum_at, preset, g):
    spec = WavepacketSpec.preset(preset)
    a = timing(spec, spectrum_at(g))
    n = timing(spec, spectrum_at(g), force_scan=True)
    assert a.method == "analytic-two-state" and n.method == "numeric-scan"
    assert n.T == pytest.approx(a.T, rel=1e-6)
    assert n.tau == pytest.approx(a.tau, rel=1e-6)
    assert a.T == pytest.approx(2 * a.tau, rel=1e-9)


@pytest.mark.parametrize("g", REFERENCE_GS)
def test_closed_gap_identities(spectrum_at, g):
    s = spectrum_at(g)
    assert timing(WavepacketSpec.preset("B"), s).T == pytest.approx(2 * math.pi / (s.E[3] - s.E[0]), rel=1e-15)
    if g >= 0.05:
        tau_d = timing(WavepacketSpec.preset("D"), s).tau
        assert tau_d == pytest.approx(math.pi / (s.E[3] - s.E[1]), rel=1e-3)


@pytest.mark.parametrize("preset", "ABCD")
@pytest.mark.parametrize("g", REFERENCE_GS)
def test_threshold_contract(spectrum_at, preset, g):
    r = timing(WavepacketSpec.preset(preset), spectrum_at(g))
    if r.T is not None:
        assert r.gamma_at_T >= 1 - 1e-3
    if r.tau is not None:
        assert r.gamma_at_tau <= 1e-6


def test_unequal_two_level_packet_has_no_tau(spectrum_at):
    spec = WavepacketSpec.normalized((0.8, 0.6, 0, 0))
    r = timing(spec, spectrum_at(0.1))
    assert r.tau is None
    assert r.T == pytest.approx(2 * math.pi / spectrum_at(0.1).omegas[1])


def test_unreached_target_is_none(spectrum_at):
    spec = WavepacketSpec.preset("A")
    r = timing(spec, spectrum_at(0.1), ScanSpec(t_max=5.0))
    assert r.T is None and r.tau is None


def test_single_level_degenerate(spectrum_at):
    with pytest.warns(DegenerateSpecWarning):
        r = timing(WavepacketSpec((0, 0, 1, 0)), spectrum_at(0.1))
    assert (r.T, r.tau, r.method) == (0.0, None, "degenerate")


def test_g0_merges_equal_frequencies(spectrum_at):
    # a1 and a2 share a level at g = 0: two groups, so the analytic path applies
    spec = WavepacketSpec((0, R, R, 0))
    with pytest.warns(DegenerateSpecWarning):
        timing(spec, spectrum_at(0.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        r = timing(WavepacketSpec.preset("A"), spectrum_at(0.0))
    assert r.method == "numeric-scan"


@settings(max_examples=15, deadline=None)
@given(phi=unit_phase, preset=st.sampled_from("ABCD"), g=st.sampled_from(REFERENCE_GS))
def test_global_phase_invariance(basis, spectrum_at, phi, preset, g):
    s = spectrum_at(g)
    spec = WavepacketSpec.preset(preset)
    rot = spec.with_phase(phi)
    t = np.linspace(0, 100, 9)
    assert np.allclose(correlation(rot, s, t), correlation(spec, s, t), atol=1e-14)
    r1, r2 = timing(spec, s), timing(rot, s)
    # A at g = 0 has a fourth-order zero of Gamma^2; roundoff in the weights moves it ~1e-8
    assert r1.T == pytest.approx(r2.T, rel=1e-8)
    assert (r1.tau is None) == (r2.tau is None)
    if r1.tau is not None:
        assert r1.tau == pytest.approx(r2.tau, rel=1e-8)
    grid = GridSpec(41)
    for tt in (0.0, 13.7):
        assert np.allclose(density(rot, s, basis, tt, grid), density(spec, s, basis, tt, grid), atol=1e-14)
        x = grid.points()
        assert np.allclose(marginal_x1(rot, s, basis, tt, x), marginal_x1(spec, s, basis, tt, x), atol=1e-14)


def test_grid_validation():
    with pytest.raises(GridInvalid):
        GridSpec(1)
    with pytest.raises(GridInvalid):
        GridSpec(10, 1.0, -1.0)


def test_density_argmax_at_x_m(basis, spectrum_at):
    x_m = right_packet_peak(basis)
    grid = GridSpec(n=2001, lo=-3, hi=3)
    rho = density(WavepacketSpec.preset("A"), spectrum_at(0.0), basis, 0.0, grid)
    i, j = np.unravel_index(np.argmax(rho), rho.shape)
    x = grid.points()
    assert x[i] == pytest.approx(x_m, abs=grid_step(grid))
    assert x[j] == pytest.approx(x_m, abs=grid_step(grid))
    assert x_m == pytest.approx(1.23534, abs=1e-5)


def grid_step(grid):
    return (grid.hi - grid.lo) / (grid.n - 1)


def test_half_period_reflection(basis, spectrum_at):
    s = spectrum_at(0.0)
    spec = WavepacketSpec.preset("A")
    T = timing(spec, s).T
    rho0 = density(spec, s, basis, 0.0)
    rho_half = density(spec, s, basis, T / 2)
    assert np.allclose(rho_half, rho0[::-1, ::-1], atol=1e-8, rtol=0)


def test_density_matches_amplitude(basis, spectrum_at):
    s = spectrum_at(0.1)
    spec = WavepacketSpec.preset("D")
    grid = GridSpec(11)
    x = grid.points()
    rho = density(spec, s, basis, 9.0, grid)
    psi = amplitude(spec, s, basis, 9.0, x[:, None], x[None, :])
    assert np.allclose(rho, np.abs(psi) ** 2, atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(spec=packets(), t=st.floats(0, 500), g=st.sampled_from(REFERENCE_GS))
def test_density_normalised_and_nonnegative(basis, spectrum_at, spec, t, g):
    grid = GridSpec()
    rho = density(spec, spectrum_at(g), basis, t, grid)
    x = grid.points()
    assert rho.min() >= 0.0
    assert np.trapezoid(np.trapezoid(rho, x, axis=1), x) == pytest.approx(1.0, abs=1e-6)


def test_marginal_matches_preset_c_closed_form(basis, spectrum_at):
    s = spectrum_at(0.1)
    spec = WavepacketSpec.preset("C")
    th = s.theta
    x = np.linspace(-4, 4, 161)
    p0, p1 = eigenfunction(basis, 0, x), eigenfunction(basis, 1, x)
    for t in (0.0, 31.0, 120.0, 240.6):
        ref = (0.25 * ((2 * math.cos(th) ** 2 + 1) * p0 ** 2 + (2 * math.sin(th) ** 2 + 1) * p1 ** 2)
               + R * (math.cos(th) + math.sin(th)) * p0 * p1 * math.cos(s.omegas[1] * t))
        assert np.allclose(marginal_x1(spec, s, basis, t, x), ref, atol=1e-14)


@pytest.mark.parametrize("preset,g,t", [("C", 0.1, 40.0), ("D", 0.1, 5.0), ("A", 0.0, 20.0)])
def test_marginal_vs_quadrature_oracle(basis, spectrum_at, preset, g, t):
    s = spectrum_at(g)
    spec = WavepacketSpec.preset(preset)
    for x1 in (-1.3, 0.2, 1.1):
        ref, _ = sp_integrate.quad(
            lambda x2: abs(amplitude(spec, s, basis, t, x1, x2)) ** 2, -6, 6, epsabs=1e-13, epsrel=1e-12, limit=200)
        assert marginal_x1(spec, s, basis, t, x1) == pytest.approx(ref, abs=1e-8)


@settings(max_examples=20, deadline=None)
@given(spec=packets(), t=st.floats(0, 500))
def test_marginal_integrates_to_one(basis, spectrum_at, spec, t):
    x = np.linspace(-6, 6, 2401)
    assert np.trapezoid(marginal_x1(spec, spectrum_at(0.1), basis, t, x), x) == pytest.approx(1.0, abs=1e-10)


def test_mean_x1_preset_c(basis, spectrum_at):
    s = spectrum_at(0.1)
    spec = WavepacketSpec.preset("C")
    amp = s.gamma * R * (math.cos(s.theta) + math.sin(s.theta))
    # frozen from the formula; grid integration of the marginal confirms it
    assert amp == pytest.approx(1.0894514925, abs=1e-9)
    x = np.linspace(-6, 6, 2401)
    for t in np.linspace(0, 500, 11):
        m = mean_x1(spec, s, basis, t)
        assert m == pytest.approx(amp * math.cos(s.omegas[1] * t), abs=1e-8)
        assert np.trapezoid(x * marginal_x1(spec, s, basis, t, x), x) == pytest.approx(m, abs=1e-8)
    half = math.pi / s.omegas[1]
    assert mean_x1(spec, s, basis, half) == pytest.approx(-mean_x1(spec, s, basis, 0.0), abs=1e-12)


def test_mean_x1_preset_b_vanishes(basis, spectrum_at):
    s = spectrum_at(0.0)
    spec = WavepacketSpec.preset("B")
    x = np.linspace(-6, 6, 2401)
    for t in (0.0, 5.0, 18.2, 77.0):
        assert mean_x1(spec, s, basis, t) == pytest.approx(0.0, abs=1e-15)
        assert np.trapezoid(x * marginal_x1(spec, s, basis, t, x), x) == pytest.approx(0.0, abs=1e-12)
