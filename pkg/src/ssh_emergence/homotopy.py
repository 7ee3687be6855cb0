"""Gap-preserving deformation between the two dimerizations.

Along eps in [-1, 1] the spacings interpolate linearly between
(d + alpha/lam, d) and (d, d + alpha/lam) while the well widths are pulled
apart by beta * (1 - |eps|). At eps = 0 the spacings are equal; without the
width asymmetry (beta = 0) the period halves there and the zone-edge gap
closes.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bloch import CrystalSpec, all_band_edges
from .errors import ValidationError
from .reduction import hopping_report, ssh_limit
from .ssh import winding_number


@dataclass(frozen=True)
class HomotopyConfig:
    lam: float = 10.0
    d: float = 0.5
    w: float = 0.1
    alpha: float = 1 / 15
    beta: float = 1 / 20
    n_eps: int = 201

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValidationError(f"lambda must be positive, got {self.lam}")
        if not self.w > 0:
            raise ValidationError(f"w must be positive, got {self.w}")
        if not 0 <= self.beta < self.w:
            raise ValidationError(f"need 0 <= beta < w, got beta={self.beta}, w={self.w}")
        if not math.isfinite(self.alpha):
            raise ValidationError(f"alpha must be finite, got {self.alpha}")
        if self.n_eps < 3:
            raise ValidationError(f"n_eps must be >= 3, got {self.n_eps}")
        # widest wells occur at eps = 0, shortest spacing is min(d, d + alpha/lam)
        if min(self.d, self.d + self.alpha / self.lam) <= self.w:
            raise ValidationError(
                f"wells overlap along the path: need min(d, d + alpha/lam) > w = {self.w}")

    def eps_grid(self) -> np.ndarray:
        grid = np.linspace(-1.0, 1.0, self.n_eps)
        # exact mirror pairs, so the scan is symmetric under eps -> -eps
        return 0.5 * (grid - grid[::-1])


@dataclass(frozen=True)
class GapScanRow:
    eps: float
    mu1_0: float
    mu2_0: float
    mu1_pi: float
    mu2_pi: float

    @property
    def gap0(self) -> float:
        return self.mu2_0 - self.mu1_0

    @property
    def gapPi(self) -> float:
        return self.mu2_pi - self.mu1_pi


def deformed_spec(config: HomotopyConfig, eps: float) -> CrystalSpec:
    if not -1.0 <= eps <= 1.0:
        raise ValidationError(f"eps must lie in [-1, 1], got {eps}")
    lo = (1 - eps) / 2
    hi = (1 + eps) / 2
    long = config.d + config.alpha / config.lam
    d_in = lo * long + hi * config.d
    d_out = lo * config.d + hi * long
    spread = config.beta * (1 - abs(eps))
    return CrystalSpec(lam=config.lam, d_in=d_in, d_out=d_out,
                       w_A=config.w + spread, w_B=config.w - spread)


def scan_row(config: HomotopyConfig, eps: float) -> GapScanRow:
    periodic, antiperiodic = all_band_edges(deformed_spec(config, eps), 2)
    return GapScanRow(eps=float(eps), mu1_0=periodic[0], mu2_0=periodic[1],
                      mu1_pi=antiperiodic[0], mu2_pi=antiperiodic[1])


def _scan_one(args):
    return scan_row(*args)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("SSH_EMERGENCE_THREADS", "1")))
    except ValueError:
        return 1


def gap_scan(config: HomotopyConfig, workers: int | None = None) -> list[GapScanRow]:
    """Lowest two band edges at k = 0 and pi along the whole path."""
    workers = default_workers() if workers is None else workers
    jobs = [(config, float(e)) for e in config.eps_grid()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_scan_one, jobs))
    return [_scan_one(job) for job in jobs]


def min_gap(rows: list[GapScanRow]) -> float:
    """The scan's gap constant: smallest of gap0 and gapPi over all rows."""
    return min(min(r.gap0, r.gapPi) for r in rows)


def endpoint_topology(config: HomotopyConfig) -> tuple[int, int]:
    """Winding indices of the SSH limits at eps = -1 and eps = +1."""
    out = []
    for eps in (-1.0, 1.0):
        report = hopping_report(deformed_spec(config, eps))
        out.append(winding_number(ssh_limit(report)))
    return out[0], out[1]
