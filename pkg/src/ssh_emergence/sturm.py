"""Symmetric tridiagonal eigenvalues by Sturm-sequence bisection.

The matrix is given by its diagonal ``d`` (length n) and off-diagonal ``e``
(length n-1). Each eigenvalue is bracketed independently from the
Gershgorin interval; the count recurrence is compiled with numba.
"""
from __future__ import annotations

import numba
import numpy as np
from scipy.linalg import solve_banded

_TINY = np.finfo(float).tiny


def gershgorin_bounds(d, e):
    d = np.asarray(d, dtype=float)
    e = np.abs(np.asarray(e, dtype=float))
    r = np.zeros_like(d)
    r[:-1] += e
    r[1:] += e
    return float(np.min(d - r)), float(np.max(d + r))


@numba.njit(cache=True)
def _count_below(d, e2, x, pivmin):
    # a pivot that underflows is replaced by -pivmin before it is counted
    q = d[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    count = 1 if q < 0 else 0
    for i in range(1, d.size):
        q = (d[i] - x) - e2[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0:
            count += 1
    return count


@numba.njit(cache=True)
def _bisect(d, e2, idx, lo, hi, atol, pivmin, max_iter):
    eps = 2.220446049250313e-16
    out = np.empty(idx.size)
    for j in range(idx.size):
        a = lo
        b = hi
        for _ in range(max_iter):
            if b - a <= atol + 2 * eps * max(abs(a), abs(b)) + 1e-300:
                break
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            if _count_below(d, e2, mid, pivmin) > idx[j]:
                b = mid
            else:
                a = mid
        out[j] = 0.5 * (a + b)
    return out


def _pivmin(e2):
    return _TINY * max(1.0, float(np.max(e2, initial=0.0)))


def sturm_count(d, e, x):
    """Number of eigenvalues strictly below each shift in ``x``."""
    d = np.ascontiguousarray(d, dtype=float)
    e2 = np.ascontiguousarray(e, dtype=float) ** 2
    x = np.atleast_1d(np.asarray(x, dtype=float))
    pivmin = _pivmin(e2)
    return np.array([_count_below(d, e2, float(xi), pivmin) for xi in x])


def eigvalsh_tridiagonal(d, e, select=None, tol=None, max_iter=200):
    """Eigenvalues of a real symmetric tridiagonal matrix, sorted ascending.

    ``select`` is an inclusive index range ``(lo, hi)``; default is all.
    ``tol`` is the absolute bracket width at which bisection stops; the
    default runs to the limit of double precision.
    """
    d = np.asarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    n = d.size
    if e.size != max(n - 1, 0):
        raise ValueError("off-diagonal must have length len(d) - 1")
    if n == 0:
        return np.empty(0)
    lo_idx, hi_idx = (0, n - 1) if select is None else select
    if not 0 <= lo_idx <= hi_idx < n:
        raise ValueError(f"select range {select} outside [0, {n - 1}]")
    a, b = gershgorin_bounds(d, e)
    span = max(b - a, abs(a), abs(b), 1.0)
    a -= 1e-12 * span
    b += 1e-12 * span
    idx = np.arange(lo_idx, hi_idx + 1)
    e2 = np.ascontiguousarray(e) ** 2
    atol = 0.0 if tol is None else float(tol)
    return _bisect(np.ascontiguousarray(d), e2, idx, a, b, atol, _pivmin(e2), max_iter)


def inverse_iteration(d, e, eigvals, n_iter=3, rng=None):
    """Unit eigenvectors for the given (accurate) eigenvalues.

    Columns of the returned array are eigenvectors. Near-degenerate
    eigenvalues are not re-orthogonalized beyond one Gram-Schmidt pass.
    """
    d = np.asarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    n = d.size
    rng = np.random.default_rng(0) if rng is None else rng
    scale = max(float(np.max(np.abs(d))), float(np.max(np.abs(e), initial=0.0)), 1.0)
    vecs = np.empty((n, len(eigvals)))
    for col, lam in enumerate(eigvals):
        shift = lam + 64 * np.finfo(float).eps * scale
        ab = np.zeros((3, n))
        ab[0, 1:] = e
        ab[1] = d - shift
        ab[2, :-1] = e
        v = rng.standard_normal(n)
        for _ in range(n_iter):
            v = solve_banded((1, 1), ab, v)
            for prev in range(col):
                if abs(eigvals[prev] - lam) < 1e-8 * scale:
                    v -= (vecs[:, prev] @ v) * vecs[:, prev]
            v /= np.linalg.norm(v)
        vecs[:, col] = v
    return vecs
