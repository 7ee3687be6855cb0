"""Discrete SSH chain: Bloch symbol, bands, winding number and open chains.

Sites in cell n are ordered (A_n, B_n). The in-cell bond joins A_n to B_n,
the out-of-cell bond joins B_n to A_{n+1}. Hoppings are real and
non-negative throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GapClosedError, ValidationError
from .sturm import eigvalsh_tridiagonal


@dataclass(frozen=True)
class SSHParams:
    t_in: float
    t_out: float

    def __post_init__(self):
        for name in ("t_in", "t_out"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value}")
            if value < 0:
                raise ValidationError(f"{name} must be non-negative, got {value}")

    @property
    def gapped(self) -> bool:
        return abs(self.t_in) != abs(self.t_out)

    def swapped(self) -> "SSHParams":
        return SSHParams(self.t_out, self.t_in)


@dataclass(frozen=True)
class FiniteChain:
    n_cells: int
    params: SSHParams

    def __post_init__(self):
        if self.n_cells < 1:
            raise ValidationError(f"n_cells must be positive, got {self.n_cells}")

    def off_diagonal(self) -> np.ndarray:
        """Alternating bonds t_in, t_out, ..., t_in (length 2N - 1)."""
        e = np.empty(2 * self.n_cells - 1)
        e[0::2] = self.params.t_in
        e[1::2] = self.params.t_out
        return e

    def hamiltonian(self) -> np.ndarray:
        e = self.off_diagonal()
        return np.diag(e, 1) + np.diag(e, -1)


def bloch_symbol(params: SSHParams, k):
    """s(k) = t_in + t_out * exp(-i k)."""
    k = np.mod(k, 2 * np.pi)
    return params.t_in + params.t_out * np.exp(-1j * k)


def dispersion(params: SSHParams, k):
    """The two bands (E_minus, E_plus) = (-|s(k)|, +|s(k)|)."""
    mag = np.abs(bloch_symbol(params, k))
    return -mag, mag


def spectral_gap(params: SSHParams) -> float:
    return 2.0 * abs(params.t_in - params.t_out)


def signed_winding(params: SSHParams, n_samples: int = 256) -> int:
    """Winding of k -> s(k) about the origin, counterclockwise positive.

    Sums the wrapped phase increments of s on a closed uniform grid.
    """
    if n_samples < 16:
        raise ValidationError(f"n_samples must be >= 16, got {n_samples}")
    if not params.gapped:
        raise GapClosedError(
            f"gap closed: |t_in| == |t_out| == {abs(params.t_in)}, "
            "winding undefined")
    k = np.linspace(0.0, 2 * np.pi, n_samples + 1)
    phase = np.angle(bloch_symbol(params, k))
    step = np.diff(phase)
    # wrap each increment into (-pi, pi]
    step = -np.mod(-step + np.pi, 2 * np.pi) + np.pi
    return int(round(step.sum() / (2 * np.pi)))


def winding_number(params: SSHParams, n_samples: int = 256) -> int:
    """Phase label in {0, 1}: 1 iff |t_in| < |t_out|.

    With s(k) = t_in + t_out exp(-ik) the raw winding in the non-trivial
    phase is -1; the absolute value is returned.
    """
    return abs(signed_winding(params, n_samples))


def finite_chain_spectrum(chain: FiniteChain) -> np.ndarray:
    e = chain.off_diagonal()
    return eigvalsh_tridiagonal(np.zeros(2 * chain.n_cells), e)


def edge_mode_count(chain: FiniteChain, tol: float | None = None) -> int:
    """Eigenvalues with |E| < tol. Default tol is a quarter of the bulk gap."""
    if tol is None:
        tol = spectral_gap(chain.params) / 4
    energies = finite_chain_spectrum(chain)
    return int(np.count_nonzero(np.abs(energies) < tol))
