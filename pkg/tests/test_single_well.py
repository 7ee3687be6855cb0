import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad
from scipy.linalg import eigh_tridiagonal

from ssh_emergence import (ValidationError, WellParams, asymptotic_energy, eval_wavefunction,
                           solve_ground_state)
from ssh_emergence.single_well import in_asymptotic_regime, norm_integral

# bisection value at lambda = 10, w = 0.1; agrees with the dense FD oracle below
E0_LAM10_W01 = -18.933886448602475


def fd_ground_energy(lam, w, h, half_box=2.0):
    """Dense FD on [-half_box, half_box]; well edges fall midway between nodes."""
    x = np.arange(-half_box + h / 2, half_box, h)
    V = np.where(np.abs(x) < w / 2, -lam**2, 0.0)
    vals = eigh_tridiagonal(2 / h**2 + V, np.full(x.size - 1, -1 / h**2),
                            eigvals_only=True, select="i", select_range=(0, 1))
    return vals


def test_fd_oracle_lambda10():
    st_ = solve_ground_state(WellParams(10, 0.1))
    assert st_.e0 == pytest.approx(E0_LAM10_W01, abs=1e-12)
    assert -100 < st_.e0 < 0
    fd = fd_ground_energy(10, 0.1, 1e-4)
    assert abs(fd[0] - st_.e0) < 5e-6
    # the first excited FD level sits in the continuum: one bound state only
    assert fd[1] > 0


@given(st.floats(0.5, 100), st.floats(0.02, 3))
def test_state_invariants(lam, w):
    well = WellParams(lam, w)
    s = solve_ground_state(well)
    assert s.e0 < 0 and s.q > 0 and s.kappa > 0
    assert s.q**2 - lam**2 == pytest.approx(s.e0, rel=1e-12, abs=1e-12 * lam**2)
    assert -s.kappa**2 == pytest.approx(s.e0, rel=1e-12)
    assert s.residual(w) <= 1e-10 * lam
    assert norm_integral(s, well) == pytest.approx(1, abs=1e-10)


@given(st.floats(1, 60), st.floats(0.05, 2))
def test_energy_decreases_with_depth(lam, w):
    assert solve_ground_state(WellParams(1.1 * lam, w)).e0 < solve_ground_state(WellParams(lam, w)).e0


def test_wavefunction_even_continuous_normalized():
    well = WellParams(10, 0.1)
    s = solve_ground_state(well)
    x = np.linspace(0, 3, 101)
    assert np.array_equal(eval_wavefunction(s, well, x), eval_wavefunction(s, well, -x))
    edge = well.w / 2
    inside = s.norm_A * math.cos(s.q * edge)
    outside = eval_wavefunction(s, well, edge * (1 + 1e-15))
    assert abs(inside - outside) <= 1e-10 * abs(inside)
    # derivatives match through the matching condition
    assert -s.norm_A * s.q * math.sin(s.q * edge) == pytest.approx(-s.kappa * inside, rel=1e-10)
    X = edge + 40 / s.kappa
    f = lambda u: eval_wavefunction(s, well, u) ** 2
    total = 2 * (quad(f, 0, edge, epsabs=0, epsrel=1e-13)[0]
                 + quad(f, edge, X, epsabs=0, epsrel=1e-13)[0])
    assert total == pytest.approx(1, abs=1e-9)
    assert norm_integral(s, well, X) == pytest.approx(total, abs=1e-12)


def test_asymptotic_energy_examples():
    assert asymptotic_energy(WellParams(10, 1)) == pytest.approx(-100 + math.pi**2)
    assert asymptotic_energy(WellParams(10, 1)) == pytest.approx(-90.1304, abs=1e-4)
    assert asymptotic_energy(WellParams(10, 0.1)) == pytest.approx(886.96, abs=1e-2)
    assert not in_asymptotic_regime(WellParams(10, 0.1))
    assert asymptotic_energy(WellParams(80, 1)) == pytest.approx(-6400 + math.pi**2)
    assert in_asymptotic_regime(WellParams(80, 1))


def test_large_lambda_convergence():
    res = [abs(solve_ground_state(WellParams(lam, 1)).e0 + lam**2 - math.pi**2)
           for lam in (20, 40, 80)]
    amp = [abs(solve_ground_state(WellParams(lam, 1)).norm_A - math.sqrt(2)) for lam in (20, 40, 80)]
    for seq in (res, amp):
        assert 0.3 <= seq[1] / seq[0] <= 0.7 and 0.3 <= seq[2] / seq[1] <= 0.7
    # |A - sqrt(2/w)| <= C / lambda with C fitted at lambda = 20
    C = amp[0] * 20
    assert all(a <= 1.05 * C / lam for a, lam in zip(amp, (20, 40, 80)))


@pytest.mark.parametrize("bad", [(0, 1), (-1, 1), (1, 0), (math.nan, 1)])
def test_well_validation(bad):
    with pytest.raises(ValidationError):
        WellParams(*bad)
