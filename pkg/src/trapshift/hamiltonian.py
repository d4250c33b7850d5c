"""Time-independent laser-ion Hamiltonian on a truncated two-level ⊗ Fock basis.

In the frame rotating with the laser (hbar = 1):

    H = omega_t * a^dag a - (delta/2) * sigma_z + (rabi/2) * [chi * sigma_+ + h.c.]

Basis ordering is fixed: |g,0> .. |g,n_max| then |e,0> .. |e,n_max>, so the
matrix splits into diagonal g/e blocks and chi-valued coupling blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import PHASES, coupling_table
from .params import SidebandId, TrapParams

GROUND = "g"
EXCITED = "e"


def bare_energy(state: str, n: int, params: TrapParams) -> float:
    """Uncoupled level energy: E_{g,n} = n*omega_t + delta/2, E_{e,n} = n*omega_t - delta/2."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n!r}")
    if state == GROUND:
        return n * params.omega_t + 0.5 * params.delta
    if state == EXCITED:
        return n * params.omega_t - 0.5 * params.delta
    raise ValueError(f"state must be 'g' or 'e', got {state!r}")


def crossing_point(sideband: SidebandId, params: TrapParams) -> tuple[float, float]:
    """(E0, Delta0) where the bare lines of the sideband pair intersect.

    E0 = (omega_t/2)(n_g + n_e) and Delta0 = (n_e - n_g) * omega_t.
    """
    e0 = 0.5 * params.omega_t * (sideband.n_g + sideband.n_e)
    delta0 = (sideband.n_e - sideband.n_g) * params.omega_t
    return e0, delta0


def default_n_max(sideband: SidebandId, eta: float) -> int:
    """Default truncation: pair maximum plus a margin that grows with eta^2.

    Validated downstream by the basis-doubling convergence check.
    """
    return max(sideband.n_g, sideband.n_e) + 15 + math.ceil(25.0 * eta * eta)


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    """Hermitian matrix of the coupled system plus its basis bookkeeping."""

    params: TrapParams
    n_max: int
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)

    def index_of(self, state: str, n: int) -> int:
        """Flat basis index of |state, n| in the g-block-then-e-block ordering."""
        if not 0 <= n <= self.n_max:
            raise ValueError(f"n must be in [0, {self.n_max}], got {n!r}")
        if state == GROUND:
            return n
        if state == EXCITED:
            return self.n_max + 1 + n
        raise ValueError(f"state must be 'g' or 'e', got {state!r}")

    def gauge_vector(self) -> np.ndarray:
        """Diagonal phases i^n (per sector) that make the matrix real symmetric."""
        phases = np.asarray(PHASES)[np.arange(self.n_max + 1) % 4]
        return np.concatenate([phases, phases])

    def real_form(self) -> np.ndarray:
        """Real symmetric gauge of the matrix.

        The coupling entries are exactly (real) * i^|n-n'|, so conjugating by
        the i^n phases cancels every imaginary part identically, not just to
        roundoff.  Eigenvalues and bare-state overlap magnitudes are unchanged.
        """
        u = self.gauge_vector()
        gauged = (u[:, None] * self.matrix) * u.conj()[None, :]
        return np.ascontiguousarray(gauged.real)


def coupling_block(params: TrapParams, n_max: int) -> np.ndarray:
    """The g-e block (rabi/2) * chi_{nn'} of the Hamiltonian."""
    return 0.5 * params.rabi * coupling_table(params.eta, n_max).entries


def build_hamiltonian(params: TrapParams, n_max: int) -> HamiltonianMatrix:
    """Assemble the full matrix: bare energies on the diagonal, chi couplings off it."""
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max!r}")
    nb = n_max + 1
    if 2 * nb > 20_000:
        raise MemoryError(f"basis dimension {2 * nb} is beyond the supported range")
    h = np.zeros((2 * nb, 2 * nb), dtype=complex)
    n = np.arange(nb)
    h[n, n] = n * params.omega_t + 0.5 * params.delta
    h[nb + n, nb + n] = n * params.omega_t - 0.5 * params.delta
    block = coupling_block(params, n_max)
    h[:nb, nb:] = block
    h[nb:, :nb] = block.conj().T
    return HamiltonianMatrix(params=params, n_max=n_max, matrix=h)
