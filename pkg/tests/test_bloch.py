import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ssh_emergence import (CrystalSpec, NumericalError, StabilityError, ValidationError,
                           band_edges, band_gap, dispersion_curve, monodromy, segment_transfer)
from ssh_emergence.bloch import ScanSettings, all_band_edges, band_interval, discriminant
from ssh_emergence.fd import bloch_cell_eigenvalues
from ssh_emergence.homotopy import HomotopyConfig, deformed_spec

FREE = CrystalSpec(0.0, 0.5, 0.5, 0.1, 0.1)
DEFAULT_PATH = HomotopyConfig()

# first verified run; cross-checked against the FD oracle in the acceptance suite
DEFAULT_PATH_EDGES = {
    -1.0: (-26.02221088689698, -3.9988950932375147, -18.047309085678823, -17.763292034971215),
    0.0: (-34.13314831876314, 5.53305798879747, -32.67005676850711, -2.931079488945289),
    1.0: (-26.02221088689698, -3.9988950932375156, -18.047309085678442, -17.763292034971442),
}


@st.composite
def crystals(draw, max_lam=10.0):
    wa = draw(st.floats(0.05, 0.3))
    wb = draw(st.floats(0.05, 0.3))
    reach = (wa + wb) / 2
    return CrystalSpec(draw(st.floats(0, max_lam)), reach + draw(st.floats(0.05, 0.6)),
                       reach + draw(st.floats(0.05, 0.6)), wa, wb)


def test_segment_examples():
    assert np.array_equal(segment_transfer(0.7, 0.0, 0.0), [[1, 0.7], [0, 1]])
    assert np.allclose(segment_transfer(1.0, 0.0, math.pi**2), -np.eye(2), atol=1e-15)
    with pytest.raises(ValidationError):
        segment_transfer(0.0, 0.0, 1.0)


@pytest.mark.parametrize("z", [3.0, -3.0, 1e-5, -1e-5, 1e-13, 0.0])
def test_segment_matches_closed_form(z):
    ell = 0.8
    T = segment_transfer(ell, 1.0, 1.0 + z)
    if abs(z) < 1e-12:
        want = [[1, ell], [0, 1]]
    elif z > 0:
        q = math.sqrt(z)
        want = [[math.cos(q * ell), math.sin(q * ell) / q], [-q * math.sin(q * ell), math.cos(q * ell)]]
    else:
        k = math.sqrt(-z)
        want = [[math.cosh(k * ell), math.sinh(k * ell) / k], [k * math.sinh(k * ell), math.cosh(k * ell)]]
    assert np.allclose(T, want, rtol=1e-13, atol=1e-13)


@given(st.floats(0.01, 2), st.floats(-100, 100), st.floats(-100, 200))
def test_segment_unimodular(ell, V, E):
    T = segment_transfer(ell, V, E)
    assert abs(np.linalg.det(T) - 1) <= 1e-12 * max(1.0, np.abs(T).max() ** 2)


def test_vectorized_matches_scalar():
    E = np.linspace(-100, 50, 17)
    spec = deformed_spec(DEFAULT_PATH, 0.3)
    M = monodromy(spec, E)
    for e, m in zip(E, M):
        assert np.allclose(m, monodromy(spec, e), rtol=1e-14, atol=0)


def test_segments_cover_period():
    spec = deformed_spec(DEFAULT_PATH, 0.4)
    lengths = [ell for ell, _ in spec.segments()]
    assert sum(lengths) == pytest.approx(spec.period, rel=1e-14)
    assert [v for _, v in spec.segments()] == [-100.0, 0.0, -100.0, 0.0]


@given(crystals(), st.floats(0, 1))
def test_det_within_roundoff(spec, u):
    lo = -spec.depth
    E = lo + u * (20 * (math.pi / spec.period) ** 2 - lo)
    M = monodromy(spec, E)
    # |det - 1| is bounded by cancellation in m00 m11 - m01 m10
    assert abs(np.linalg.det(M) - 1) <= 64 * np.finfo(float).eps * max(1.0, np.abs(M).max()) ** 2


def test_det_at_single_well_energy():
    from ssh_emergence import WellParams, solve_ground_state
    e0 = solve_ground_state(WellParams(10, 0.1)).e0
    M = monodromy(deformed_spec(DEFAULT_PATH, -1.0), e0)
    assert abs(np.linalg.det(M) - 1) <= 1e-10


@given(st.floats(0.01, 400))
def test_free_trace(E):
    assert discriminant(FREE, E) == pytest.approx(2 * math.cos(math.sqrt(E)), abs=1e-11)


@given(st.floats(0, 10), st.floats(0.05, 0.3), st.floats(0.05, 0.5), st.floats(-100, 100))
def test_period_halving(lam, w, gap, E):
    d = w + gap
    spec = CrystalSpec(lam, d, d, w, w)
    half = segment_transfer(d - w, 0.0, E) @ segment_transfer(w, -lam**2, E)
    M = monodromy(spec, E)
    assert np.allclose(M, half @ half, rtol=1e-10, atol=1e-10 * max(1.0, np.abs(M).max()))


@given(crystals(), st.floats(-100, 200))
def test_trace_invariant_under_cell_shift(spec, E):
    Ts = [segment_transfer(ell, V, E) for ell, V in spec.segments()]
    traces = []
    for shift in range(4):
        M = np.eye(2)
        for T in Ts[shift:] + Ts[:shift]:
            M = T @ M
        traces.append(np.trace(M))
    assert np.allclose(traces, traces[0], rtol=1e-9, atol=1e-9 * max(1.0, np.abs(traces).max()))


def test_overflow_guard():
    with pytest.raises(StabilityError):
        monodromy(CrystalSpec(40, 5, 5, 0.1, 0.1), -1600.0)


def test_free_band_edges():
    periodic = [p.energy for p in band_edges(FREE, 0, 3)]
    antiperiodic = [p.energy for p in band_edges(FREE, math.pi, 3)]
    assert periodic[0] == pytest.approx(0, abs=1e-8)
    assert periodic[1:] == pytest.approx([4 * math.pi**2] * 2, rel=1e-8)
    assert antiperiodic[:2] == pytest.approx([math.pi**2] * 2, rel=1e-8)
    assert antiperiodic[2] == pytest.approx(9 * math.pi**2, rel=1e-8)
    assert band_gap(FREE)[1] == pytest.approx(0, abs=1e-8)


def test_band_points():
    pts = band_edges(deformed_spec(DEFAULT_PATH, -1.0), math.pi, 2)
    assert [p.band for p in pts] == [1, 2]
    assert all(p.k == math.pi for p in pts)
    assert pts[0].energy <= pts[1].energy
    assert pts[0].energy > -100
    with pytest.raises(ValidationError):
        band_edges(FREE, 1.0)
    with pytest.raises(ValidationError):
        band_edges(FREE, 0, 0)


def test_insufficient_scan_range():
    tight = ScanSettings(ceiling_factor=0.1, ceiling_doublings=0)
    with pytest.raises(NumericalError, match="insufficient scan range"):
        all_band_edges(FREE, 2, tight)


def test_symmetric_crystal_gap_closes():
    spec = CrystalSpec(10, 0.5, 0.5, 0.1, 0.1)
    gap0, gapPi = band_gap(spec)
    assert gapPi <= 1e-8
    assert gap0 > 1


@pytest.mark.parametrize("eps", sorted(DEFAULT_PATH_EDGES))
def test_default_path_regression(eps):
    periodic, antiperiodic = all_band_edges(deformed_spec(DEFAULT_PATH, eps), 2)
    assert periodic + antiperiodic == pytest.approx(DEFAULT_PATH_EDGES[eps], abs=1e-9)
    gap0, gapPi = band_gap(deformed_spec(DEFAULT_PATH, eps))
    assert gap0 > 0 and gapPi > 0


def test_free_dispersion_curve():
    k, E = dispersion_curve(FREE, 1, 33)
    assert E == pytest.approx(k**2, abs=1e-8 * math.pi**2)
    k, E = dispersion_curve(FREE, 2, 33)
    assert E == pytest.approx((2 * math.pi - k) ** 2, rel=1e-8)


@pytest.mark.parametrize("eps", [-1.0, 0.0, 0.5])
def test_dispersion_monotone_and_consistent(eps):
    spec = deformed_spec(DEFAULT_PATH, eps)
    periodic, antiperiodic = all_band_edges(spec, 2)
    k, E1 = dispersion_curve(spec, 1, 64)
    _, E2 = dispersion_curve(spec, 2, 64)
    assert np.all(np.diff(E1) >= 0) and np.all(np.diff(E2) <= 0)
    assert E1[0] == pytest.approx(periodic[0], abs=1e-10)
    assert E1[-1] == pytest.approx(antiperiodic[0], abs=1e-10)
    assert E2[0] == pytest.approx(periodic[1], abs=1e-10)
    assert E2[-1] == pytest.approx(antiperiodic[1], abs=1e-10)
    # interior points solve D(E) = 2 cos k
    D = discriminant(spec, E1[1:-1])
    assert np.allclose(D, 2 * np.cos(k[1:-1]), atol=1e-7)


def test_band_interval_ordering():
    spec = deformed_spec(DEFAULT_PATH, 0.0)
    b1 = band_interval(spec, 1)
    b2 = band_interval(spec, 2)
    assert b1[0] < b1[1] < b2[0] < b2[1]


def test_fd_oracle_small_depth():
    spec = CrystalSpec(4.0, 0.6, 0.4, 0.15, 0.1)
    periodic, antiperiodic = all_band_edges(spec, 2)
    for sign, exact in ((1, periodic), (-1, antiperiodic)):
        fd = bloch_cell_eigenvalues(spec, sign, 2048)
        assert np.allclose(fd, exact, rtol=1e-4)


@pytest.mark.parametrize("args", [(-1, .5, .5, .1, .1), (1, .5, .5, .6, .6), (1, 0, .5, .1, .1),
                                  (math.inf, .5, .5, .1, .1), (1, .5, .5, .1, math.nan)])
def test_crystal_validation(args):
    with pytest.raises(ValidationError):
        CrystalSpec(*args)
