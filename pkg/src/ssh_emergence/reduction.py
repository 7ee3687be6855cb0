"""Atomic-orbital reduction of the dimer crystal to an SSH chain.

Orbitals are translates of the single-well ground state phi to the sites
s_{2n} = n L and s_{2n+1} = n L + d_in. Because phi is an exact eigenfunction
of its own well, (H - e0) phi_k = (V - V_k) phi_k, so every matrix element is
a sum of integrals over the *other* wells and no derivatives are needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .bloch import CrystalSpec
from .errors import ValidationError
from .fd import averaged_potential, dirichlet_operator, well_intervals
from .single_well import BoundState, WellParams, solve_ground_state
from .ssh import SSHParams
from .sturm import eigvalsh_tridiagonal, inverse_iteration

MAX_SITE_SEPARATION = 3
# wells farther than this many sites from both orbitals are dropped
_WELL_REACH = 6


def _require_equal_widths(crystal: CrystalSpec):
    if not math.isclose(crystal.w_A, crystal.w_B, rel_tol=1e-12):
        raise ValidationError(
            f"orbital reduction needs w_A == w_B, got {crystal.w_A} and {crystal.w_B}")


@dataclass(frozen=True)
class OrbitalBasis:
    crystal: CrystalSpec
    state: BoundState
    j_min: int = -8
    j_max: int = 9

    @classmethod
    def from_crystal(cls, crystal: CrystalSpec, j_min: int = -8, j_max: int = 9):
        _require_equal_widths(crystal)
        state = solve_ground_state(WellParams(crystal.lam, crystal.w_A))
        return cls(crystal, state, j_min, j_max)

    @property
    def w(self) -> float:
        return self.crystal.w_A

    def site(self, j: int) -> float:
        n, parity = divmod(j, 2)
        return n * self.crystal.period + parity * self.crystal.d_in

    def _check(self, *indices):
        for j in indices:
            if not self.j_min <= j <= self.j_max:
                raise ValidationError(
                    f"site {j} outside basis window [{self.j_min}, {self.j_max}]")


def cos_exp_integral(q: float, kappa: float, w: float) -> float:
    """Adaptive quadrature of cos(q u) exp(kappa u) over [-w/2, w/2].

    Only the even part survives, so cosh is integrated.
    """
    half = w / 2
    value, _ = quad(lambda u: math.cos(q * u) * math.cosh(kappa * u), -half, half,
                    epsabs=0.0, epsrel=1e-12, limit=200)
    return value


def _exp_integral(a: float, w: float) -> float:
    """Integral of exp(-a u) over [-w/2, w/2]."""
    if abs(a * w) < 1e-12:
        return w
    return 2.0 * math.sinh(a * w / 2) / a


def _well_integral(basis: OrbitalBasis, j: int, k: int, m: int) -> float:
    """Integral of phi_j phi_k over well m, with well m distinct from k."""
    st, w = basis.state, basis.w
    A, q, kappa = st.norm_A, st.q, st.kappa
    c = math.cos(q * w / 2)
    s_m = basis.site(m)
    if m == j and j == k:
        raise ValueError("diagonal well of a diagonal element is excluded")
    if m == j or m == k:
        # one orbital is in its own well (cosine), the other is a tail
        other = k if m == j else j
        D = abs(basis.site(other) - s_m)
        return A * A * c * math.exp(-kappa * (D - w / 2)) * cos_exp_integral(q, kappa, w)
    # both tails: |x - s_i| = D_i + sigma_i u on the well, u = x - s_m
    sig_j = 1.0 if s_m > basis.site(j) else -1.0
    sig_k = 1.0 if s_m > basis.site(k) else -1.0
    D_j = abs(s_m - basis.site(j))
    D_k = abs(s_m - basis.site(k))
    pref = A * A * c * c * math.exp(-kappa * (D_j + D_k - w))
    return pref * _exp_integral(kappa * (sig_j + sig_k), w)


def matrix_element(basis: OrbitalBasis, j: int, k: int) -> float:
    """<phi_j, (H - e0) phi_k> as a sum over the wells other than k's."""
    basis._check(j, k)
    if abs(j - k) > MAX_SITE_SEPARATION:
        raise ValidationError(
            f"|j - k| = {abs(j - k)} exceeds {MAX_SITE_SEPARATION}; element is below "
            "double-precision noise")
    depth = basis.crystal.depth
    total = 0.0
    for m in range(min(j, k) - _WELL_REACH, max(j, k) + _WELL_REACH + 1):
        if m == k:
            continue
        total += _well_integral(basis, j, k, m)
    return -depth * total


def overlap(basis: OrbitalBasis, j: int, k: int) -> float:
    """<phi_j, phi_k> over the whole line."""
    basis._check(j, k)
    if j == k:
        return 1.0
    st, w = basis.state, basis.w
    A, q, kappa = st.norm_A, st.q, st.kappa
    c = math.cos(q * w / 2)
    D = abs(basis.site(k) - basis.site(j))
    in_wells = 2 * A * A * c * math.exp(-kappa * (D - w / 2)) * cos_exp_integral(q, kappa, w)
    outside = A * A * c * c * math.exp(-kappa * D) / kappa
    between = A * A * c * c * math.exp(-kappa * (D - w)) * (D - w)
    return in_wells + outside + between


@dataclass(frozen=True)
class HoppingReport:
    lam: float
    alpha: float
    e0: float
    rho1: float
    rho2: float
    onsite: float
    overlap_in: float
    overlap_out: float

    @property
    def ratio(self) -> float:
        return self.rho2 / self.rho1


def dimer_crystal(lam: float, d: float, w: float, alpha: float) -> CrystalSpec:
    """Equal wells with d_in = d and d_out = d + alpha / lam."""
    return CrystalSpec(lam=lam, d_in=d, d_out=d + alpha / lam, w_A=w, w_B=w)


def hopping_report(crystal: CrystalSpec, alpha: float | None = None) -> HoppingReport:
    """In-cell (rho1) and out-of-cell (rho2) hoppings of the orbital basis.

    ``alpha`` defaults to lam * (d_out - d_in); when given it must agree.
    """
    lam = crystal.lam
    implied = lam * (crystal.d_out - crystal.d_in)
    if alpha is None:
        alpha = implied
    elif not math.isclose(alpha, implied, rel_tol=1e-9, abs_tol=1e-12):
        raise ValidationError(
            f"d_out - d_in = {crystal.d_out - crystal.d_in} does not equal "
            f"alpha / lambda = {alpha / lam}")
    basis = OrbitalBasis.from_crystal(crystal)
    return HoppingReport(
        lam=lam,
        alpha=alpha,
        e0=basis.state.e0,
        rho1=matrix_element(basis, 0, 1),
        rho2=matrix_element(basis, -1, 0),
        onsite=matrix_element(basis, 0, 0),
        overlap_in=overlap(basis, 0, 1),
        overlap_out=overlap(basis, -1, 0),
    )


def ssh_limit(report: HoppingReport) -> SSHParams:
    """Hoppings normalized by the larger of |rho1|, |rho2|."""
    scale = max(abs(report.rho1), abs(report.rho2))
    return SSHParams(t_in=abs(report.rho1) / scale, t_out=abs(report.rho2) / scale)


def _chain_grid(crystal: CrystalSpec, n_cells: int, points_per_cell: int,
                offset: float | None = None):
    """Interior nodes of [0, n L] and the averaged potential on them.

    By default both ends sit mid-way along an out-of-cell gap, so the cut
    chain starts with an A site and ends with a B site.
    """
    if n_cells < 1 or points_per_cell < 2:
        raise ValidationError("need n_cells >= 1 and points_per_cell >= 2")
    h = crystal.period / points_per_cell
    x = np.arange(1, n_cells * points_per_cell) * h
    if offset is None:
        offset = (crystal.d_out - (crystal.w_A + crystal.w_B) / 2) / 2
    V = averaged_potential(x, h, well_intervals(crystal, n_cells, offset), crystal.depth)
    return x, h, V


def _dirichlet_states(crystal, n_cells, points_per_cell, offset=None, vectors=False):
    x, h, V = _chain_grid(crystal, n_cells, points_per_cell, offset)
    d, e = dirichlet_operator(V, h)
    energies = eigvalsh_tridiagonal(d, e, select=(0, 2 * n_cells - 1))
    if not vectors:
        return energies
    return energies, x, inverse_iteration(d, e, energies)


def finite_volume_spectrum(crystal: CrystalSpec, n_cells: int = 8,
                           grid_points_per_cell: int = 256):
    """Lowest 2 n_cells Dirichlet eigenvalues of the crystal cut to n_cells periods."""
    if n_cells < 8:
        raise ValidationError(f"n_cells must be >= 8, got {n_cells}")
    if grid_points_per_cell < 256:
        raise ValidationError(f"grid_points_per_cell must be >= 256, got {grid_points_per_cell}")
    return _dirichlet_states(crystal, n_cells, grid_points_per_cell)


def snap_to_grid(crystal: CrystalSpec, grid_points_per_cell: int):
    """Crystal with w, d_in, d_out rounded to multiples of a spacing h ~ L / ppc.

    Returns (snapped crystal, h, points per cell). The well width is an exact
    multiple of h, so with edges on half-nodes every well is discretized
    identically.
    """
    _require_equal_widths(crystal)
    h0 = crystal.period / grid_points_per_cell
    m = max(1, round(crystal.w_A / h0))
    h = crystal.w_A / m
    n_in = round(crystal.d_in / h)
    n_out = round(crystal.d_out / h)
    snapped = CrystalSpec(crystal.lam, n_in * h, n_out * h, m * h, m * h)
    return snapped, h, n_in + n_out


def discrete_well_energy(lam: float, w: float, h: float) -> float:
    """Ground energy of one well of width w = m h with edges on half-nodes."""
    state = solve_ground_state(WellParams(lam, w))
    m = round(w / h)
    pad = int(math.ceil(40.0 / (state.kappa * h)))
    n = 2 * pad + m + 1
    x = np.arange(1, n) * h
    left = (pad + 0.5) * h
    V = averaged_potential(x, h, [(left, left + m * h)], lam**2)
    d, e = dirichlet_operator(V, h)
    return float(eigvalsh_tridiagonal(d, e, select=(0, 0))[0])


@dataclass(frozen=True)
class SpectralCheck:
    """Rescaled finite-volume spectrum against the SSH band set."""

    crystal: CrystalSpec
    e0: float
    rho1: float
    rho2: float
    r: float
    rescaled: np.ndarray
    edge_artifact: np.ndarray
    distance: float


def ssh_band_distance(values, r: float) -> np.ndarray:
    """Distance of each value to the set +-[|1 - r|, 1 + r]."""
    a = np.abs(np.asarray(values, dtype=float))
    lo, hi = abs(1 - r), 1 + r
    return np.where(a < lo, lo - a, np.where(a > hi, a - hi, 0.0))


def edge_mass(x, vectors, n_cells: int, period: float) -> np.ndarray:
    """Fraction of each eigenvector's weight in the first and last cells."""
    outer = (x < period) | (x > (n_cells - 1) * period)
    return np.sum(vectors[outer] ** 2, axis=0) / np.sum(vectors**2, axis=0)


def tight_binding_check(crystal: CrystalSpec, n_cells: int = 8,
                        grid_points_per_cell: int = 4096) -> SpectralCheck:
    """Compare (E - e0)/|rho| from a finite chain of wells to the SSH bands.

    The crystal is first snapped to a grid (``snap_to_grid``); hoppings, r
    and the grid-level e0 all refer to the snapped crystal, so the uniform
    discretization shift cancels in E - e0. Eigenstates with more than half
    their weight in the two end cells are flagged as boundary artifacts and
    left out of the distance, which is the largest distance of a remaining
    rescaled level from the band set +-[1 - r, 1 + r].

    The walls sit half an out-of-cell gap from the end wells, which shifts
    the end sites by an amount of the order of the hopping itself; end
    states of the weak-bond termination are pushed to the band edge rather
    than staying near zero.
    """
    snapped, h, ppc = snap_to_grid(crystal, grid_points_per_cell)
    report = hopping_report(snapped)
    e0 = discrete_well_energy(snapped.lam, snapped.w_A, h)
    gap_nodes = round((snapped.d_out - snapped.w_A) / h)
    offset = (gap_nodes // 2 + 0.5) * h
    energies, x, vecs = _dirichlet_states(snapped, n_cells, ppc, offset, vectors=True)
    params = ssh_limit(report)
    scale = max(abs(report.rho1), abs(report.rho2))
    rescaled = (energies - e0) / scale
    r = min(params.t_in, params.t_out) / max(params.t_in, params.t_out)
    artifact = edge_mass(x, vecs, n_cells, snapped.period) > 0.5
    dist = ssh_band_distance(rescaled[~artifact], r)
    return SpectralCheck(
        crystal=snapped, e0=e0, rho1=report.rho1, rho2=report.rho2, r=r,
        rescaled=rescaled, edge_artifact=artifact, distance=float(dist.max(initial=0.0)))
