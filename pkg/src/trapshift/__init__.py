"""Sideband resonance shifts of laser-driven trapped ions.

Off-resonant couplings between trap levels displace the apparent position of
every sideband resonance.  This package computes that displacement two
independent ways: a closed-form sum over level shifts (``resolvent``) and
exact diagonalization of the truncated laser-ion Hamiltonian with dressed
branch tracking (``spectrum``), plus a CLI that regenerates the standard
level-diagram and shift-scan datasets.
"""

from .errors import (
    ConvergenceError,
    ResonanceWindowError,
    TrackingAmbiguityError,
    TrapshiftError,
)
from .fock import (
    CouplingTable,
    chi,
    chi_magnitude,
    coupling_table,
    displacement_oracle,
    laguerre,
    oracle_pad,
    rabi_coupling,
)
from .hamiltonian import (
    EXCITED,
    GROUND,
    HamiltonianMatrix,
    bare_energy,
    build_hamiltonian,
    crossing_point,
    default_n_max,
)
from .params import SidebandId, TrapParams
from .resolvent import (
    LevelShiftElements,
    PerturbativeShift,
    bs_shift,
    bs_shift_ld,
    bs_shift_literature,
    eta_zero_shift,
    level_shift_diag,
    splitting_half,
)
from .spectrum import (
    DressedSpectrum,
    ShiftReport,
    convergence,
    eigenlevels,
    find_resonance,
    measure_splitting,
    sweep_spectrum,
    track_branch,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "CouplingTable",
    "DressedSpectrum",
    "EXCITED",
    "GROUND",
    "HamiltonianMatrix",
    "LevelShiftElements",
    "PerturbativeShift",
    "ResonanceWindowError",
    "ShiftReport",
    "SidebandId",
    "TrackingAmbiguityError",
    "TrapParams",
    "TrapshiftError",
    "bare_energy",
    "bs_shift",
    "bs_shift_ld",
    "bs_shift_literature",
    "build_hamiltonian",
    "chi",
    "chi_magnitude",
    "convergence",
    "coupling_table",
    "crossing_point",
    "default_n_max",
    "displacement_oracle",
    "eigenlevels",
    "eta_zero_shift",
    "find_resonance",
    "laguerre",
    "level_shift_diag",
    "measure_splitting",
    "oracle_pad",
    "rabi_coupling",
    "splitting_half",
    "sweep_spectrum",
    "track_branch",
]
