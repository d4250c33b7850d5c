"""Problem definition types: trap/laser parameters and sideband labels.

Everything downstream works in hbar = 1 units.  The default ``omega_t = 1``
puts all energies and detunings in units of the trap frequency; physical
angular frequencies (rad/s) work equally well as long as all four fields use
the same unit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

#: Above this drive-to-trap ratio second-order perturbation theory degrades.
PERTURBATIVE_RATIO_LIMIT = 0.1


@dataclass(frozen=True)
class TrapParams:
    """Trap frequency, Rabi frequency, Lamb-Dicke parameter and detuning.

    ``delta`` is the laser detuning from the internal transition,
    ``omega_L - omega_0``; it is the swept variable of the spectra.
    """

    rabi: float
    eta: float
    delta: float = 0.0
    omega_t: float = 1.0

    def __post_init__(self) -> None:
        for name in ("rabi", "eta", "delta", "omega_t"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.omega_t <= 0:
            raise ValueError(f"omega_t must be positive, got {self.omega_t!r}")
        if self.rabi < 0:
            raise ValueError(f"rabi must be nonnegative, got {self.rabi!r}")
        if self.eta < 0:
            raise ValueError(f"eta must be nonnegative, got {self.eta!r}")
        if self.rabi > PERTURBATIVE_RATIO_LIMIT * self.omega_t:
            warnings.warn(
                f"rabi/omega_t = {self.rabi / self.omega_t:.3g} exceeds "
                f"{PERTURBATIVE_RATIO_LIMIT}; perturbative shift formulas "
                "lose accuracy in this regime",
                stacklevel=2,
            )

    def with_delta(self, delta: float) -> TrapParams:
        """Copy of these parameters at a different detuning."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return replace(self, delta=delta)


@dataclass(frozen=True, order=True)
class SidebandId:
    """The pair (n_g, n_e) labelling a |g,n_g> <-> |e,n_e> resonance."""

    n_g: int
    n_e: int

    def __post_init__(self) -> None:
        if self.n_g < 0 or self.n_e < 0:
            raise ValueError(f"vibrational quantum numbers must be >= 0, got {self}")

    @property
    def order(self) -> int:
        """Sideband order k = n_e - n_g: 0 carrier, > 0 blue, < 0 red."""
        return self.n_e - self.n_g

    @property
    def kind(self) -> str:
        if self.order == 0:
            return "carrier"
        return "blue" if self.order > 0 else "red"

    @property
    def is_carrier(self) -> bool:
        return self.n_g == self.n_e

    def swapped(self) -> SidebandId:
        return SidebandId(self.n_e, self.n_g)
