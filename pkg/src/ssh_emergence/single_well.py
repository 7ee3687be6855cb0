"""Ground state of one square well, h = -d^2/dx^2 - lam^2 * chi_[-w/2, w/2]."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# lam * w below this is treated as outside the deep-well expansion
ASYMPTOTIC_MIN_LAMBDA_W = 10.0


@dataclass(frozen=True)
class WellParams:
    lam: float
    w: float

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValidationError(f"lambda must be positive, got {self.lam}")
        if not (self.w > 0 and math.isfinite(self.w)):
            raise ValidationError(f"well width must be positive, got {self.w}")


@dataclass(frozen=True)
class BoundState:
    e0: float
    q: float
    kappa: float
    norm_A: float

    def residual(self, w: float) -> float:
        """Even-parity matching residual q tan(q w / 2) - kappa."""
        return self.q * math.tan(self.q * w / 2) - self.kappa


def _matching(q: float, lam: float, w: float) -> float:
    # q sin - kappa cos: same roots as q tan - kappa, no poles on the bracket
    kappa = math.sqrt((lam - q) * (lam + q))
    return q * math.sin(q * w / 2) - kappa * math.cos(q * w / 2)


def _norm_constant(q: float, kappa: float, w: float) -> float:
    inside = w / 2 + math.sin(q * w) / (2 * q)
    outside = math.cos(q * w / 2) ** 2 / kappa
    return 1.0 / math.sqrt(inside + outside)


def solve_ground_state(well: WellParams) -> BoundState:
    """Nodeless even bound state from the transcendental matching condition.

    The root is bracketed in (0, min(lam, pi/w)), where the matching
    function goes from -lam to a positive value, and bisected until the
    bracket stops shrinking in floating point.
    """
    lam, w = well.lam, well.w
    top = min(lam, math.pi / w)
    lo = 1e-14 * top
    hi = top * (1 - 1e-16)
    f_lo = _matching(lo, lam, w)
    if _matching(hi, lam, w) <= 0 or f_lo >= 0:
        raise ValidationError(f"no sign change bracketing the ground state for {well}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = _matching(mid, lam, w)
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    q = 0.5 * (lo + hi)
    kappa = math.sqrt((lam - q) * (lam + q))
    return BoundState(e0=-kappa * kappa, q=q, kappa=kappa, norm_A=_norm_constant(q, kappa, w))


def eval_wavefunction(state: BoundState, well: WellParams, x):
    """phi(x): A cos(q x) inside, matched exponential tail outside."""
    x = np.abs(np.asarray(x, dtype=float))
    half = well.w / 2
    inside = state.norm_A * np.cos(state.q * np.minimum(x, half))
    tail = np.exp(-state.kappa * np.maximum(x - half, 0.0))
    return inside * tail


def norm_integral(state: BoundState, well: WellParams, X: float | None = None) -> float:
    """Closed-form integral of phi^2 over [-X, X] (whole line by default)."""
    q, kappa, A, half = state.q, state.kappa, state.norm_A, well.w / 2
    inside = half + math.sin(q * well.w) / (2 * q)
    edge = math.cos(q * half) ** 2
    if X is None:
        outside = edge / kappa
    elif X <= half:
        return A * A * (X + math.sin(2 * q * X) / (2 * q))
    else:
        outside = edge * (1 - math.exp(-2 * kappa * (X - half))) / kappa
    return A * A * (inside + outside)


def asymptotic_energy(well: WellParams) -> float:
    """Leading-order deep-well energy -lam^2 + pi^2 / w^2."""
    return -well.lam**2 + math.pi**2 / well.w**2


def in_asymptotic_regime(well: WellParams) -> bool:
    return well.lam * well.w >= ASYMPTOTIC_MIN_LAMBDA_W
