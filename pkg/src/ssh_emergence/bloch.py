"""Band structure of the periodic square-well crystal via transfer matrices.

One period starts at the left edge of the A well and consists of four
constant-potential segments: A well, in-cell gap, B well, out-of-cell gap.
A segment of length l at potential V transports (psi, psi') by

    T = [[C, S], [-z S, C]],   z = E - V,

with C = cos(sqrt(z) l) and S = sin(sqrt(z) l) / sqrt(z), both entire in z.
The discriminant D(E) = tr M(E) of the period product M gives the Bloch
condition D(E) = 2 cos k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import NumericalError, StabilityError, ValidationError

OVERFLOW_GUARD = 1e150

# |z| l^2 below this switches C, S to their Taylor series
_SERIES_CUTOFF = 1e-3
_SERIES_TERMS = 8
_C_COEF = np.array([(-1) ** n / factorial(2 * n) for n in range(_SERIES_TERMS)])
_S_COEF = np.array([(-1) ** n / factorial(2 * n + 1) for n in range(_SERIES_TERMS)])
_C_SER = tuple(float(c) for c in _C_COEF)
_S_SER = tuple(float(c) for c in _S_COEF)


@dataclass(frozen=True)
class CrystalSpec:
    lam: float
    d_in: float
    d_out: float
    w_A: float
    w_B: float

    def __post_init__(self):
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ValidationError(f"lambda must be non-negative, got {self.lam}")
        for name in ("d_in", "d_out", "w_A", "w_B"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValidationError(f"{name} must be positive, got {value}")
        reach = (self.w_A + self.w_B) / 2
        if self.d_in <= reach or self.d_out <= reach:
            raise ValidationError(
                f"wells overlap: need d_in, d_out > (w_A + w_B)/2 = {reach}, "
                f"got d_in={self.d_in}, d_out={self.d_out}")

    @property
    def period(self) -> float:
        return self.d_in + self.d_out

    @property
    def depth(self) -> float:
        return self.lam**2

    def segments(self) -> list[tuple[float, float]]:
        """(length, potential) pairs covering one period in cell order."""
        reach = (self.w_A + self.w_B) / 2
        v = -self.depth
        return [
            (self.w_A, v),
            (self.d_in - reach, 0.0),
            (self.w_B, v),
            (self.d_out - reach, 0.0),
        ]

    def potential(self, x):
        """V(x) on the whole line, periodic with the cell origin at x = 0."""
        x = np.mod(np.asarray(x, dtype=float), self.period)
        a_left = self.w_A
        b_left = self.d_in - self.w_B / 2 + self.w_A / 2
        in_well = (x < a_left) | ((x >= b_left) & (x < b_left + self.w_B))
        return np.where(in_well, -self.depth, 0.0)


@dataclass(frozen=True)
class BandPoint:
    band: int
    k: float
    energy: float


def _cs(length, z):
    """C, S and their z-derivatives for arrays of z."""
    z = np.asarray(z, dtype=float)
    x = z * length**2
    small = np.abs(x) < _SERIES_CUTOFF
    C = np.empty_like(z)
    S = np.empty_like(z)
    dC = np.empty_like(z)
    dS = np.empty_like(z)

    pos = (z > 0) & ~small
    neg = (z < 0) & ~small
    if pos.any():
        r = np.sqrt(z[pos])
        C[pos] = np.cos(r * length)
        S[pos] = np.sin(r * length) / r
    if neg.any():
        r = np.sqrt(-z[neg])
        with np.errstate(over="ignore"):
            C[neg] = np.cosh(r * length)
            S[neg] = np.sinh(r * length) / r
    big = ~small
    dC[big] = -length * S[big] / 2
    dS[big] = (length * C[big] - S[big]) / (2 * z[big])

    if small.any():
        powers = x[small][:, None] ** np.arange(_SERIES_TERMS)
        C[small] = powers @ _C_COEF
        S[small] = length * (powers @ _S_COEF)
        # d/dz of l * sum s_n (z l^2)^n = l^3 * sum n s_n (z l^2)^(n-1)
        n = np.arange(1, _SERIES_TERMS)
        dS[small] = length**3 * (powers[:, :-1] @ (n * _S_COEF[1:]))
        dC[small] = -length * S[small] / 2
    return C, S, dC, dS


def segment_transfer(length: float, V: float, E):
    """Transfer matrix across one constant-potential segment.

    Scalar ``E`` gives a 2x2 array; an array of energies gives shape (n, 2, 2).
    """
    if not length > 0:
        raise ValidationError(f"segment length must be positive, got {length}")
    E_arr = np.asarray(E, dtype=float)
    z = np.atleast_1d(E_arr - V)
    C, S, _, _ = _cs(length, z)
    T = np.empty(z.shape + (2, 2))
    T[..., 0, 0] = C
    T[..., 0, 1] = S
    T[..., 1, 0] = -z * S
    T[..., 1, 1] = C
    return T[0] if E_arr.ndim == 0 else T


def _segment_with_derivative(length, V, E):
    z = E - V
    C, S, dC, dS = _cs(length, z)
    T = np.empty(z.shape + (2, 2))
    T[..., 0, 0] = C
    T[..., 0, 1] = S
    T[..., 1, 0] = -z * S
    T[..., 1, 1] = C
    dT = np.empty_like(T)
    dT[..., 0, 0] = dC
    dT[..., 0, 1] = dS
    dT[..., 1, 0] = -S - z * dS
    dT[..., 1, 1] = dC
    return T, dT


def _check_overflow(M):
    with np.errstate(invalid="ignore"):
        bad = ~np.isfinite(M) | (np.abs(M) > OVERFLOW_GUARD)
    if bad.any():
        raise StabilityError(
            f"transfer-matrix entries exceed {OVERFLOW_GUARD:g}; energy too far "
            "below the bands for plain products")


def _monodromy_and_derivative(segments, E):
    E = np.atleast_1d(np.asarray(E, dtype=float))
    M = np.broadcast_to(np.eye(2), E.shape + (2, 2)).copy()
    dM = np.zeros_like(M)
    for length, V in segments:
        T, dT = _segment_with_derivative(length, V, E)
        dM = T @ dM + dT @ M
        M = T @ M
        _check_overflow(M)
    return M, dM


def monodromy(spec: CrystalSpec, E):
    """Period transfer matrix M(E) = T_4 T_3 T_2 T_1."""
    E_arr = np.asarray(E, dtype=float)
    M, _ = _monodromy_and_derivative(spec.segments(), E_arr)
    return M[0] if E_arr.ndim == 0 else M


def discriminant(spec: CrystalSpec, E):
    M = monodromy(spec, E)
    return M[..., 0, 0] + M[..., 1, 1]


def _disc(segments, E):
    M, dM = _monodromy_and_derivative(segments, E)
    return M[..., 0, 0] + M[..., 1, 1], dM[..., 0, 0] + dM[..., 1, 1]


def _cs_scalar(length, z):
    x = z * length * length
    if abs(x) < _SERIES_CUTOFF:
        C = S = dS = 0.0
        p = 1.0
        for n in range(_SERIES_TERMS):
            C += _C_SER[n] * p
            S += _S_SER[n] * p
            if n + 1 < _SERIES_TERMS:
                dS += (n + 1) * _S_SER[n + 1] * p
            p *= x
        S *= length
        dS *= length**3
    else:
        if z > 0:
            r = math.sqrt(z)
            C, S = math.cos(r * length), math.sin(r * length) / r
        else:
            r = math.sqrt(-z)
            C, S = math.cosh(r * length), math.sinh(r * length) / r
        dS = (length * C - S) / (2 * z)
    return C, S, -length * S / 2, dS


def _disc_scalar(segments, E):
    """(D, dD/dE) at one energy; plain-float version of ``_disc``."""
    m00, m01, m10, m11 = 1.0, 0.0, 0.0, 1.0
    d00 = d01 = d10 = d11 = 0.0
    for length, V in segments:
        z = E - V
        C, S, dC, dS = _cs_scalar(length, z)
        t00, t01, t10, t11 = C, S, -z * S, C
        u00, u01, u10, u11 = dC, dS, -S - z * dS, dC
        d00, d01, d10, d11 = (
            t00 * d00 + t01 * d10 + u00 * m00 + u01 * m10,
            t00 * d01 + t01 * d11 + u00 * m01 + u01 * m11,
            t10 * d00 + t11 * d10 + u10 * m00 + u11 * m10,
            t10 * d01 + t11 * d11 + u10 * m01 + u11 * m11,
        )
        m00, m01, m10, m11 = (
            t00 * m00 + t01 * m10, t00 * m01 + t01 * m11,
            t10 * m00 + t11 * m10, t10 * m01 + t11 * m11,
        )
        if max(abs(m00), abs(m01), abs(m10), abs(m11)) > OVERFLOW_GUARD:
            raise StabilityError(
                f"transfer-matrix entries exceed {OVERFLOW_GUARD:g} at E = {E:g}")
    return m00 + m11, d00 + d11


def _roundoff(segments, E):
    """Crude bound on the absolute rounding error of D(E)."""
    cond = 1.0
    for length, V in segments:
        cond *= max(1.0, float(np.max(np.abs(segment_transfer(length, V, E)))))
    return 256 * np.finfo(float).eps * cond


def _bisect(f, a, b, fa):
    """Bisect a sign change of f on [a, b] down to floating-point resolution."""
    for _ in range(200):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (fa < 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


@dataclass(frozen=True)
class ScanSettings:
    """Knobs for the band-edge root scan."""

    points_per_unit: int = 2000
    refine_factor: int = 16
    refine_passes: int = 3
    ceiling_factor: float = 20.0
    ceiling_doublings: int = 3


DEFAULT_SCAN = ScanSettings()


class _EdgeScan:
    """Sorted periodic (D = 2) and antiperiodic (D = -2) energies."""

    def __init__(self, spec: CrystalSpec, settings: ScanSettings = DEFAULT_SCAN):
        self.spec = spec
        self.segments = spec.segments()
        self.settings = settings
        L = spec.period
        self.e_low = -spec.depth * (1 + 1e-9) - 1e-9 * (math.pi / L) ** 2
        self.step = (spec.depth + (math.pi / L) ** 2) / settings.points_per_unit
        self.e_max = settings.ceiling_factor * (math.pi / L) ** 2

    def _grid(self, a, b):
        E = np.linspace(a, b, max(2, int(math.ceil((b - a) / self.step)) + 1))
        D, dD = _disc(self.segments, E)
        for _ in range(self.settings.refine_passes):
            flag = self._flag(D, dD)
            if not flag.any():
                break
            idx = np.nonzero(flag)[0]
            frac = np.arange(1, self.settings.refine_factor) / self.settings.refine_factor
            extra = E[idx, None] + (E[idx + 1] - E[idx])[:, None] * frac
            E = np.sort(np.concatenate([E, extra.ravel()]))
            D, dD = _disc(self.segments, E)
        return E, D, dD

    @staticmethod
    def _flag(D, dD):
        changes = (
            (np.sign(D[:-1] - 2) != np.sign(D[1:] - 2))
            | (np.sign(D[:-1] + 2) != np.sign(D[1:] + 2))
            | (np.sign(dD[:-1]) != np.sign(dD[1:]))
        )
        return changes

    def edges(self, n_needed: int):
        top = self.e_max
        for _ in range(self.settings.ceiling_doublings + 1):
            periodic, antiperiodic = self._edges_below(top, n_needed)
            if len(periodic) >= n_needed and len(antiperiodic) >= n_needed:
                return periodic[:n_needed], antiperiodic[:n_needed]
            top *= 2
        raise NumericalError(
            f"insufficient scan range: found {len(periodic)} periodic and "
            f"{len(antiperiodic)} antiperiodic edges below E = {top / 2:g}")

    def _critical_points(self, E, dD):
        crit = []
        f = lambda e: _disc_scalar(self.segments, e)[1]
        for i in np.nonzero(np.sign(dD[:-1]) != np.sign(dD[1:]))[0]:
            if dD[i] == 0:
                crit.append(float(E[i]))
            else:
                crit.append(_bisect(f, float(E[i]), float(E[i + 1]), float(dD[i])))
        return crit

    def _edges_below(self, top, n_needed):
        E, D, dD = self._grid(self.e_low, top)
        crit = self._critical_points(E, dD)
        # monotone pieces between consecutive critical points
        knots = [float(E[0])] + crit + [float(E[-1])]
        values = [_disc_scalar(self.segments, e)[0] for e in knots]
        periodic, antiperiodic = [], []
        for i in range(1, len(knots) - 1):
            for level, bucket in ((2.0, periodic), (-2.0, antiperiodic)):
                if abs(values[i] - level) <= _roundoff(self.segments, knots[i]):
                    values[i] = level
                    bucket.extend([knots[i], knots[i]])
        D_of = lambda e: _disc_scalar(self.segments, e)[0]
        for a, b, fa, fb in zip(knots[:-1], knots[1:], values[:-1], values[1:]):
            for level, bucket in ((2.0, periodic), (-2.0, antiperiodic)):
                if (fa - level) * (fb - level) < 0:
                    g = lambda e, lv=level: D_of(e) - lv
                    bucket.append(_bisect(g, a, b, fa - level))
            if len(periodic) >= n_needed and len(antiperiodic) >= n_needed:
                break
        return sorted(periodic), sorted(antiperiodic)


def _k_label(k) -> float:
    if k == 0:
        return 0.0
    if math.isclose(k, math.pi, rel_tol=0, abs_tol=1e-12):
        return math.pi
    raise ValidationError(f"band edges are defined at k = 0 or pi, got {k}")


def band_edges(spec: CrystalSpec, k, n_bands: int = 2,
               settings: ScanSettings = DEFAULT_SCAN) -> list[BandPoint]:
    """Lowest ``n_bands`` solutions of D(E) = 2 cos k for k in {0, pi}."""
    if n_bands < 1:
        raise ValidationError(f"n_bands must be positive, got {n_bands}")
    k = _k_label(k)
    periodic, antiperiodic = _EdgeScan(spec, settings).edges(n_bands)
    energies = periodic if k == 0 else antiperiodic
    return [BandPoint(band=b + 1, k=k, energy=e) for b, e in enumerate(energies)]


def all_band_edges(spec: CrystalSpec, n_bands: int = 2,
                   settings: ScanSettings = DEFAULT_SCAN):
    """(periodic, antiperiodic) edge energies from a single scan."""
    return _EdgeScan(spec, settings).edges(n_bands)


def band_gap(spec: CrystalSpec, settings: ScanSettings = DEFAULT_SCAN):
    """(mu_2(0) - mu_1(0), mu_2(pi) - mu_1(pi)) for the two lowest bands."""
    periodic, antiperiodic = all_band_edges(spec, 2, settings)
    return periodic[1] - periodic[0], antiperiodic[1] - antiperiodic[0]


def band_interval(spec: CrystalSpec, band: int, settings: ScanSettings = DEFAULT_SCAN):
    """Energy range [bottom, top] swept by ``band`` (1-based) over k."""
    if band < 1:
        raise ValidationError(f"band index must be positive, got {band}")
    periodic, antiperiodic = all_band_edges(spec, band + 1, settings)
    merged = sorted(periodic + antiperiodic)
    return merged[2 * band - 2], merged[2 * band - 1]


def dispersion_curve(spec: CrystalSpec, band: int, n_k: int = 64,
                     settings: ScanSettings = DEFAULT_SCAN):
    """Arrays (k, E) of band ``band`` on a uniform grid of [0, pi].

    Inside a band the discriminant is monotone in E, so each interior k is
    a single bisection of D(E) - 2 cos k between the band's edges.
    """
    if n_k < 2:
        raise ValidationError(f"n_k must be >= 2, got {n_k}")
    segments = spec.segments()
    bottom, top = band_interval(spec, band, settings)
    D_bottom = _disc_scalar(segments, bottom)[0]
    ks = np.linspace(0.0, math.pi, n_k)
    energies = np.empty(n_k)
    # odd bands start at D = +2 (k = 0) at their bottom edge
    k0_at_bottom = band % 2 == 1
    for i, k in enumerate(ks):
        if i == 0:
            energies[i] = bottom if k0_at_bottom else top
            continue
        if i == n_k - 1:
            energies[i] = top if k0_at_bottom else bottom
            continue
        target = 2 * math.cos(k)
        g = lambda e: _disc_scalar(segments, e)[0] - target
        energies[i] = _bisect(g, bottom, top, D_bottom - target)
    return ks, energies
