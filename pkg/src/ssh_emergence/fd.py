"""Second-order finite-difference discretizations of -d^2/dx^2 + V.

The potential is a sum of square wells. Each grid node gets the average of
V over its dual cell [x - h/2, x + h/2], which keeps the jump
discontinuities from degrading the eigenvalues to first order in h.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .bloch import CrystalSpec
from .errors import ResourceError

MAX_DIMENSION = 2**22


def well_intervals(spec: CrystalSpec, n_cells: int, offset: float = 0.0):
    """[left, right] of every well in ``n_cells`` periods, shifted by ``offset``."""
    L = spec.period
    a_left = 0.0
    b_left = spec.d_in - spec.w_B / 2 + spec.w_A / 2
    out = []
    for n in range(-1, n_cells + 1):
        base = n * L + offset
        out.append((base + a_left, base + a_left + spec.w_A))
        out.append((base + b_left, base + b_left + spec.w_B))
    return out


def averaged_potential(x, h, intervals, depth):
    """Dual-cell average of -depth * (indicator of the union of intervals)."""
    x = np.asarray(x, dtype=float)
    lo = x - h / 2
    hi = x + h / 2
    covered = np.zeros_like(x)
    for a, b in intervals:
        covered += np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)
    return -depth * covered / h


def _check_size(n):
    if n > MAX_DIMENSION:
        raise ResourceError(f"matrix dimension {n} exceeds the limit {MAX_DIMENSION}")


def dirichlet_operator(V, h):
    """(diagonal, off-diagonal) of the Dirichlet Laplacian plus V."""
    V = np.asarray(V, dtype=float)
    _check_size(V.size)
    return 2.0 / h**2 + V, np.full(V.size - 1, -1.0 / h**2)


def crystal_cell_potential(spec: CrystalSpec, n_points: int):
    """Nodes x_j = j h on [0, L) and the averaged potential there."""
    h = spec.period / n_points
    x = np.arange(n_points) * h
    return x, h, averaged_potential(x, h, well_intervals(spec, 1), spec.depth)


def bloch_cell_eigenvalues(spec: CrystalSpec, k_sign: int, n_points: int = 4096,
                           n_eigs: int = 2):
    """Lowest eigenvalues on one period with psi(x + L) = k_sign * psi(x).

    ``k_sign`` is +1 (periodic, k = 0) or -1 (antiperiodic, k = pi).
    """
    if k_sign not in (1, -1):
        raise ValueError("k_sign must be +1 or -1")
    _check_size(n_points)
    _, h, V = crystal_cell_potential(spec, n_points)
    off = np.full(n_points - 1, -1.0 / h**2)
    H = sp.diags([off, 2.0 / h**2 + V, off], [-1, 0, 1], format="lil")
    H[0, n_points - 1] = -k_sign / h**2
    H[n_points - 1, 0] = -k_sign / h**2
    sigma = -spec.depth - 1.0
    vals = eigsh(H.tocsc(), k=n_eigs, sigma=sigma, which="LM", return_eigenvectors=False)
    return np.sort(vals)
