"""Fock-space algebra: Laguerre functions and displacement-operator couplings.

The central object is the matrix element

    chi_{nn'} = <n| exp(i*eta*(a + a^dag)) |n'>
              = exp(-eta^2/2) * (i*eta)^|n-n'| * sqrt(n_<!/n_>!) * L_{n_<}^{|n-n'|}(eta^2)

with n_< (n_>) the lesser (greater) of n and n'.  ``coupling_table`` batch
builds these from the closed form; ``displacement_oracle`` rebuilds the same
matrix by exponentiating the truncated tridiagonal operator i*eta*(a + a^dag)
and serves as an independent cross-check of the Laguerre route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import _kernels
from .params import TrapParams

#: i^k for k = 0..3 as exact unit phases (1j**k would accumulate roundoff).
PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


def _check_index(name: str, value: int) -> None:
    if value < 0:
        raise ValueError(f"{name} must be a nonnegative integer, got {value!r}")


def _check_eta(eta: float) -> None:
    if not math.isfinite(eta) or eta < 0:
        raise ValueError(f"eta must be finite and >= 0, got {eta!r}")


def laguerre(n: int, alpha: int, x: float) -> float:
    """Generalized Laguerre function L_n^alpha(x).

    Evaluated by the three-term recurrence in n, which is stable for x >= 0;
    the alternating finite sum loses precision beyond n of a few tens.
    """
    _check_index("n", n)
    _check_index("alpha", alpha)
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x!r}")
    return float(_kernels.laguerre_value(n, float(alpha), x))


def chi_magnitude(n: int, nprime: int, eta: float) -> float:
    """|chi_{nn'}|, the phase-free part of the displacement matrix element.

    The factorial ratio goes through lgamma so the result stays finite for
    quantum numbers far beyond the n = 170 overflow of raw factorials.
    """
    _check_index("n", n)
    _check_index("nprime", nprime)
    _check_eta(eta)
    lo, hi = (n, nprime) if n <= nprime else (nprime, n)
    d = hi - lo
    x = eta * eta
    return (
        math.exp(-0.5 * x)
        * eta**d
        * math.exp(0.5 * (math.lgamma(lo + 1.0) - math.lgamma(hi + 1.0)))
        * float(_kernels.laguerre_value(lo, float(d), x))
    )


def chi(n: int, nprime: int, eta: float) -> complex:
    """Displacement-operator matrix element chi_{nn'} = <n|e^{i eta (a+a†)}|n'>."""
    d = abs(n - nprime)
    return PHASES[d % 4] * chi_magnitude(n, nprime, eta)


def rabi_coupling(n: int, nprime: int, params: TrapParams) -> complex:
    """Coupling strength Omega_{nn'} = Omega_R * chi_{nn'} between trap levels."""
    return params.rabi * chi(n, nprime, params.eta)


@dataclass(frozen=True, eq=False)
class CouplingTable:
    """Matrix of chi_{nn'} over the truncated basis 0..n_max."""

    eta: float
    n_max: int
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.n_max + 1

    def row_norm(self, n: int) -> float:
        """sum_k |chi_{nk}|^2; tends to 1 with n_max by unitarity."""
        return float(np.sum(np.abs(self.entries[n]) ** 2))


def coupling_table(eta: float, n_max: int) -> CouplingTable:
    """Batch-evaluate chi_{nn'} for 0 <= n, n' <= n_max from the closed form."""
    _check_index("n_max", n_max)
    _check_eta(eta)
    mag = _kernels.chi_magnitudes(eta, n_max)
    idx = np.arange(n_max + 1)
    d = np.abs(idx[:, None] - idx[None, :])
    phase = np.asarray(PHASES)[d % 4]
    return CouplingTable(eta=eta, n_max=n_max, entries=phase * mag)


def oracle_pad(eta: float, n_max: int) -> int:
    """Basis padding for the matrix-exponential oracle.

    Exponentiating a truncated operator corrupts the last rows and columns;
    the displacement mixes of order eta*sqrt(n) levels, so the pad grows with
    both eta and n_max before the result is cropped back.
    """
    return max(20, 4 * math.ceil(eta * math.sqrt(max(n_max, 1))))


def displacement_oracle(eta: float, n_max: int, pad: int | None = None) -> CouplingTable:
    """chi table via scaled-and-squared exponentiation of i*eta*(a + a^dag).

    Independent of the Laguerre closed form: builds the tridiagonal ladder
    operator on a padded basis, exponentiates, and crops to (n_max+1)^2.
    """
    _check_index("n_max", n_max)
    _check_eta(eta)
    if pad is None:
        pad = oracle_pad(eta, n_max)
    dim = n_max + 1 + pad
    ladder = np.sqrt(np.arange(1.0, dim))
    position = np.zeros((dim, dim))
    position[np.arange(dim - 1), np.arange(1, dim)] = ladder
    position[np.arange(1, dim), np.arange(dim - 1)] = ladder
    full = expm(1j * eta * position)
    return CouplingTable(eta=eta, n_max=n_max, entries=full[: n_max + 1, : n_max + 1])
