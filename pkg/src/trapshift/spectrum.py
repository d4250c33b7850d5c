"""Exact numerical pipeline: detuning sweeps, branch tracking, resonance location.

The dressed levels E(delta) are eigenvalues of the full coupled Hamiltonian.
A sideband resonance is located as the extremum of the dressed branch that
enters the target anti-crossing from the tagged bare state; when the pair is
decoupled (a true crossing, gap below ``GAP_FLOOR_FRACTION * omega_t``) the
locator switches to root-finding the intersection of the two tagged branches.

All heavy eigensolves run in the exact real-symmetric gauge of
``HamiltonianMatrix.real_form``; bare-state overlap magnitudes are gauge
invariant, so nothing downstream can observe the difference.  Scans are
sequential and deterministic; share nothing across threads except the
immutable inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment, minimize_scalar

from .errors import ResonanceWindowError, TrackingAmbiguityError, TrapshiftError
from .fock import PHASES, chi_magnitude
from .hamiltonian import (
    HamiltonianMatrix,
    coupling_block,
    crossing_point,
    default_n_max,
)
from .params import SidebandId, TrapParams

#: Measured pair gaps below this fraction of omega_t count as true crossings.
GAP_FLOOR_FRACTION = 1e-10
#: Coarse scan resolution of the resonance window.
COARSE_POINTS = 101
#: Window half-width: max of this fraction of omega_t and 5x the gap estimate.
WINDOW_FRACTION = 0.1
WINDOW_GAP_MULTIPLE = 5.0
#: Centered finite-difference step for derivative residuals (units of omega_t).
FD_STEP_FRACTION = 1e-5
#: Basis-margin doubling convergence thresholds.
CONVERGENCE_RELATIVE = 1e-4
CONVERGENCE_ABSOLUTE = 1e-12
#: Hard cap: final dimension never exceeds 2 * (n_max_start + 240).
CONVERGENCE_CAP_MARGIN = 239
#: Branch continuation is trusted only above this eigenvector overlap.
TRACK_OVERLAP_MIN = 0.5
#: Two continuation candidates closer than this are ambiguous.
TRACK_AMBIGUITY_GAP = 0.05
MAX_BISECTION_LEVELS = 12
MAX_WINDOW_ESCALATIONS = 4
MAX_WINDOW_SHRINKS = 10


@dataclass(frozen=True)
class ShiftReport:
    """Located resonance of one sideband from the numerically exact spectrum."""

    sideband: SidebandId
    delta0: float
    delta_star: float
    delta_omega: float
    gap: float
    method: str  # "extremum" | "intersection" | "carrier"
    n_max_used: int
    converged: bool


@dataclass(frozen=True, eq=False)
class DressedSpectrum:
    """Tracked dressed-level branches over a detuning grid.

    ``branches[(state, n)]`` follows the eigenvalue that is continuously
    connected to the bare level |state, n>; ``overlaps`` records the squared
    weight of that bare state in the branch eigenvector at every sample.
    """

    grid: np.ndarray
    branches: dict[tuple[str, int], np.ndarray]
    overlaps: dict[tuple[str, int], np.ndarray]
    n_max: int


def eigenlevels(h: HamiltonianMatrix | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    ``HamiltonianMatrix`` inputs are solved in the exact real gauge and the
    eigenvectors are rotated back, so V diagonalizes the original complex
    matrix.  The residual ||Hv - lambda v|| is verified against 1e-10 ||H||.
    """
    if isinstance(h, HamiltonianMatrix):
        matrix = h.matrix
        gauge = h.gauge_vector()
        try:
            values, vectors_real = np.linalg.eigh(h.real_form())
        except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
            raise TrapshiftError(f"eigensolver failed on dim {h.dim} matrix: {exc}") from exc
        vectors = gauge.conj()[:, None] * vectors_real
    else:
        matrix = np.asarray(h)
        try:
            values, vectors = np.linalg.eigh(matrix)
        except np.linalg.LinAlgError as exc:
            raise TrapshiftError(f"eigensolver failed on dim {matrix.shape[0]} matrix: {exc}") from exc
    scale = max(float(np.max(np.abs(values))), 1e-300)
    residual = np.linalg.norm(matrix @ vectors - vectors * values[None, :], axis=0)
    worst = float(np.max(residual))
    if worst > 1e-10 * scale:
        raise TrapshiftError(
            f"eigenpair residual {worst:.3e} exceeds 1e-10 * ||H|| = {1e-10 * scale:.3e} "
            f"(dim {matrix.shape[0]})"
        )
    return values, vectors


class _DetuningScan:
    """Reusable eigensolver for one (params, n_max) across many detunings.

    Holds the detuning-independent coupling block in the real gauge so each
    sample only rewrites the diagonal.  Not thread-safe; make one per thread.
    """

    def __init__(self, params: TrapParams, n_max: int):
        self.params = params
        self.n_max = n_max
        nb = n_max + 1
        self.nb = nb
        phases = np.asarray(PHASES)[np.arange(nb) % 4]
        gauged = (phases[:, None] * coupling_block(params, n_max)) * phases.conj()[None, :]
        block = gauged.real  # exact: the gauge cancels every i^|n-n'| phase
        self._h = np.zeros((2 * nb, 2 * nb))
        self._h[:nb, nb:] = block
        self._h[nb:, :nb] = block.T
        self._nvec = np.arange(nb) * params.omega_t
        self._diag = np.arange(2 * nb)

    def eigen(self, delta: float) -> tuple[np.ndarray, np.ndarray]:
        nb = self.nb
        self._h[self._diag[:nb], self._diag[:nb]] = self._nvec + 0.5 * delta
        self._h[self._diag[nb:], self._diag[nb:]] = self._nvec - 0.5 * delta
        return np.linalg.eigh(self._h)

    def pair_levels(self, delta: float, sideband: SidebandId) -> tuple[float, float]:
        """(E_low, E_up) of the two eigenstates with most weight on the pair."""
        values, vectors = self.eigen(delta)
        support = vectors[sideband.n_g, :] ** 2 + vectors[self.nb + sideband.n_e, :] ** 2
        top = np.argpartition(support, -2)[-2:]
        pair = np.sort(values[top])
        return float(pair[0]), float(pair[1])

    def pair_low(self, delta: float, sideband: SidebandId) -> float:
        return self.pair_levels(delta, sideband)[0]

    def pair_gap(self, delta: float, sideband: SidebandId) -> float:
        low, up = self.pair_levels(delta, sideband)
        return up - low

    def tagged_difference(self, delta: float, sideband: SidebandId) -> float:
        """E(g, n_g) - E(e, n_e) with each branch tagged by its dominant bare state."""
        values, vectors = self.eigen(delta)
        jg = int(np.argmax(vectors[sideband.n_g, :] ** 2))
        je = int(np.argmax(vectors[self.nb + sideband.n_e, :] ** 2))
        return float(values[jg] - values[je])


def _local_minima(values: np.ndarray) -> list[int]:
    out = []
    for i in range(1, len(values) - 1):
        if values[i] < values[i - 1] and values[i] <= values[i + 1]:
            out.append(i)
    return out


def _refine_maximum(fun, lo: float, hi: float, omega_t: float) -> float:
    """Successive parabolic interpolation for the branch extremum, then a
    Newton polish on the centered finite-difference slope."""
    result = minimize_scalar(
        lambda d: -fun(d),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12 * omega_t, "maxiter": 200},
    )
    d_star = float(result.x)
    h = FD_STEP_FRACTION * omega_t
    for _ in range(4):
        f_plus, f_minus, f_mid = fun(d_star + h), fun(d_star - h), fun(d_star)
        slope = (f_plus - f_minus) / (2.0 * h)
        curvature = (f_plus - 2.0 * f_mid + f_minus) / (h * h)
        if curvature >= 0.0 or not math.isfinite(curvature):
            break
        step = slope / curvature
        if abs(step) > (hi - lo):
            break
        d_star -= step
        if abs(step) < 1e-13 * omega_t:
            break
    return min(max(d_star, lo), hi)


def _refine_minimum(fun, lo: float, hi: float, omega_t: float) -> tuple[float, float]:
    result = minimize_scalar(
        fun,
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12 * omega_t, "maxiter": 200},
    )
    return float(result.x), float(result.fun)


def _min_pair_gap(
    scan: _DetuningScan, sideband: SidebandId, lo: float, hi: float
) -> float:
    """Minimal pair separation in [lo, hi].

    Smooth anti-crossing bottoms come out of the parabolic minimizer; when the
    result is consistent with a near-crossing the V-shaped bottom defeats the
    minimizer's relative positioning floor, so the sign change of the tagged
    branch difference is root-found instead and the gap is sampled there.
    """
    omega_t = scan.params.omega_t
    _, gap_min = _refine_minimum(lambda d: scan.pair_gap(d, sideband), lo, hi, omega_t)
    if gap_min < 1e-6 * omega_t:
        f_lo = scan.tagged_difference(lo, sideband)
        f_hi = scan.tagged_difference(hi, sideband)
        if f_lo * f_hi < 0:
            root = float(
                brentq(
                    lambda d: scan.tagged_difference(d, sideband),
                    lo,
                    hi,
                    xtol=1e-14 * omega_t,
                )
            )
            gap_min = min(gap_min, scan.pair_gap(root, sideband))
    return gap_min


def _locate(
    scan: _DetuningScan, sideband: SidebandId, window: float | None = None
) -> tuple[float, float, str]:
    """Locate the resonance: returns (delta_star, minimal gap, method)."""
    params = scan.params
    omega_t = params.omega_t
    _, delta0 = crossing_point(sideband, params)
    gap_estimate = params.rabi * chi_magnitude(sideband.n_g, sideband.n_e, params.eta)
    half = window if window is not None else max(
        WINDOW_GAP_MULTIPLE * gap_estimate, WINDOW_FRACTION * omega_t
    )
    shrink_floor = max(10.0 * gap_estimate, 1e-6 * omega_t)

    escalations = shrinks = 0
    while True:
        grid = np.linspace(delta0 - half, delta0 + half, COARSE_POINTS)
        levels = np.array([scan.pair_levels(d, sideband) for d in grid])
        low, gaps = levels[:, 0], levels[:, 1] - levels[:, 0]

        i_max = int(np.argmax(low))
        if i_max in (0, COARSE_POINTS - 1):
            if escalations >= MAX_WINDOW_ESCALATIONS:
                raise ResonanceWindowError(
                    f"no interior extremum for {sideband} within "
                    f"[{delta0 - half!r}, {delta0 + half!r}] after escalation"
                )
            escalations += 1
            half *= 2.0
            continue

        minima = _local_minima(gaps)
        if len(minima) > 1 and shrinks < MAX_WINDOW_SHRINKS and half * 0.5 > shrink_floor:
            shrinks += 1
            half *= 0.5
            continue
        break

    if minima:
        i_gap = min(minima, key=lambda i: abs(grid[i] - delta0))
    else:
        i_gap = int(np.argmin(gaps))
    g_lo, g_hi = grid[max(i_gap - 1, 0)], grid[min(i_gap + 1, COARSE_POINTS - 1)]
    gap_min = _min_pair_gap(scan, sideband, g_lo, g_hi)

    if gap_min < GAP_FLOOR_FRACTION * omega_t:
        lo, hi = delta0 - half, delta0 + half
        f_lo = scan.tagged_difference(lo, sideband)
        f_hi = scan.tagged_difference(hi, sideband)
        for _ in range(MAX_WINDOW_ESCALATIONS):
            if f_lo * f_hi < 0:
                break
            lo, hi = delta0 - 2 * (delta0 - lo), delta0 + 2 * (hi - delta0)
            f_lo = scan.tagged_difference(lo, sideband)
            f_hi = scan.tagged_difference(hi, sideband)
        if f_lo * f_hi >= 0:
            raise ResonanceWindowError(
                f"tagged branches of {sideband} do not intersect inside "
                f"[{lo!r}, {hi!r}]"
            )
        delta_star = float(
            brentq(
                lambda d: scan.tagged_difference(d, sideband),
                lo,
                hi,
                xtol=1e-14 * omega_t,
            )
        )
        gap_at = scan.pair_gap(delta_star, sideband)
        return delta_star, float(min(gap_min, gap_at)), "intersection"

    lo, hi = grid[i_max - 1], grid[i_max + 1]
    delta_star = _refine_maximum(
        lambda d: scan.pair_low(d, sideband), lo, hi, omega_t
    )
    return delta_star, gap_min, "extremum"


def find_resonance(
    sideband: SidebandId,
    params: TrapParams,
    n_max: int | None = None,
    verify_convergence: bool = True,
) -> ShiftReport:
    """Locate one sideband resonance from the exact spectrum.

    Scans the branch that enters the target anti-crossing from |g, n_g>,
    refines its extremum (or, for decoupled pairs, the branch intersection)
    and reports delta_omega = delta_star - delta0.  Carriers are unshifted by
    symmetry and short-circuit analytically.
    """
    if sideband.is_carrier:
        n_used = n_max if n_max is not None else default_n_max(sideband, params.eta)
        gap = params.rabi * chi_magnitude(sideband.n_g, sideband.n_e, params.eta)
        return ShiftReport(
            sideband=sideband,
            delta0=0.0,
            delta_star=0.0,
            delta_omega=0.0,
            gap=gap,
            method="carrier",
            n_max_used=n_used,
            converged=True,
        )
    if params.rabi <= 0:
        raise ValueError("find_resonance requires rabi > 0 for non-carrier sidebands")
    n_used = n_max if n_max is not None else default_n_max(sideband, params.eta)
    base = max(sideband.n_g, sideband.n_e)
    if n_used <= base:
        raise ValueError(f"n_max must exceed max(n_g, n_e) = {base}, got {n_used!r}")

    _, delta0 = crossing_point(sideband, params)
    delta_star, gap, method = _locate(_DetuningScan(params, n_used), sideband)

    converged = True
    if verify_convergence:
        n_doubled = base + 2 * (n_used - base)
        star2, _, _ = _locate(_DetuningScan(params, n_doubled), sideband)
        shift, shift2 = delta_star - delta0, star2 - delta0
        converged = abs(shift2 - shift) <= max(
            CONVERGENCE_RELATIVE * abs(shift2), CONVERGENCE_ABSOLUTE * params.omega_t
        )

    return ShiftReport(
        sideband=sideband,
        delta0=delta0,
        delta_star=delta_star,
        delta_omega=delta_star - delta0,
        gap=gap,
        method=method,
        n_max_used=n_used,
        converged=converged,
    )


def measure_splitting(
    sideband: SidebandId, params: TrapParams, n_max: int | None = None
) -> float:
    """Minimal measured separation of the sideband pair over the scan window.

    For a resolved anti-crossing this approaches |Omega_{n_g,n_e}| (twice the
    |R_ge| convention); for decoupled pairs it collapses to zero.
    """
    if params.rabi < 0:
        raise ValueError("rabi must be nonnegative")
    n_used = n_max if n_max is not None else default_n_max(sideband, params.eta)
    scan = _DetuningScan(params, n_used)
    _, delta0 = crossing_point(sideband, params)
    gap_estimate = params.rabi * chi_magnitude(sideband.n_g, sideband.n_e, params.eta)
    half = max(WINDOW_GAP_MULTIPLE * gap_estimate, WINDOW_FRACTION * params.omega_t)
    grid = np.linspace(delta0 - half, delta0 + half, COARSE_POINTS)
    gaps = np.array([scan.pair_gap(d, sideband) for d in grid])
    i = int(np.argmin(gaps))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, COARSE_POINTS - 1)]
    return _min_pair_gap(scan, sideband, lo, hi)


def convergence(
    sideband: SidebandId, params: TrapParams, n_max_start: int | None = None
) -> tuple[int, float, bool]:
    """Double the basis margin until the located shift stabilizes.

    Returns (n_max_final, delta_omega, converged); converged is False when the
    dimension cap 2 * (n_max_start + 240) is reached without stabilizing.
    """
    start = n_max_start if n_max_start is not None else default_n_max(sideband, params.eta)
    if sideband.is_carrier:
        return start, 0.0, True
    base = max(sideband.n_g, sideband.n_e)
    margin = max(start - base, 1)
    cap = start + CONVERGENCE_CAP_MARGIN
    _, delta0 = crossing_point(sideband, params)

    star, _, _ = _locate(_DetuningScan(params, base + margin), sideband)
    prev = star - delta0
    while True:
        margin *= 2
        n_next = min(base + margin, cap)
        star, _, _ = _locate(_DetuningScan(params, n_next), sideband)
        current = star - delta0
        if abs(current - prev) <= max(
            CONVERGENCE_RELATIVE * abs(current), CONVERGENCE_ABSOLUTE * params.omega_t
        ):
            return n_next, current, True
        if n_next >= cap:
            return n_next, current, False
        prev = current


def _assign(prev_vectors: np.ndarray, vectors: np.ndarray) -> tuple[np.ndarray, float]:
    """Permutation matching previous eigenvectors to new ones by overlap."""
    overlap = np.abs(prev_vectors.T @ vectors)
    rows, cols = linear_sum_assignment(-(overlap**2))
    perm = np.empty(len(rows), dtype=int)
    perm[rows] = cols
    matched = overlap[rows, cols]
    return perm, float(np.min(matched))


def _step_permutation(
    scan: _DetuningScan,
    d_from: float,
    v_from: np.ndarray,
    d_to: float,
    v_to: np.ndarray,
    depth: int = 0,
) -> np.ndarray:
    perm, worst = _assign(v_from, v_to)
    if worst >= TRACK_OVERLAP_MIN:
        return perm
    if depth >= MAX_BISECTION_LEVELS:
        raise TrackingAmbiguityError(
            f"branch continuation ambiguous between delta = {d_from!r} and {d_to!r} "
            f"after {MAX_BISECTION_LEVELS} bisection levels (best overlap {worst:.3f})",
            window=(d_from, d_to),
        )
    d_mid = 0.5 * (d_from + d_to)
    _, v_mid = scan.eigen(d_mid)
    first = _step_permutation(scan, d_from, v_from, d_mid, v_mid, depth + 1)
    second = _step_permutation(scan, d_mid, v_mid, d_to, v_to, depth + 1)
    return second[first]


def sweep_spectrum(
    params: TrapParams,
    deltas: np.ndarray,
    n_max: int,
    tags: list[tuple[str, int]] | None = None,
) -> DressedSpectrum:
    """Track dressed branches across a detuning grid by eigenvector continuity.

    Consecutive eigenbases are matched with an optimal assignment on overlap
    magnitudes; intervals whose assignment is uncertain (overlap below 0.5)
    are bisected internally, up to ``MAX_BISECTION_LEVELS``, without changing
    the output grid.  The union of all branches at each grid point is exactly
    a permutation of the raw eigenvalues.
    """
    deltas = np.asarray(deltas, dtype=float)
    if deltas.ndim != 1 or len(deltas) < 2:
        raise ValueError("deltas must be a 1-D grid with at least two points")
    scan = _DetuningScan(params, n_max)
    nb = n_max + 1
    if tags is None:
        tags = [("g", n) for n in range(nb)] + [("e", n) for n in range(nb)]
    bare_index = {("g", n): n for n in range(nb)} | {("e", n): nb + n for n in range(nb)}
    for tag in tags:
        if tag not in bare_index:
            raise ValueError(f"unknown branch tag {tag!r} for n_max = {n_max}")

    values, vectors = scan.eigen(deltas[0])
    # Identify eigenvectors with bare states at the first grid point.
    perm, _ = _assign(np.eye(2 * nb), vectors)

    energy = {tag: np.empty(len(deltas)) for tag in tags}
    weight = {tag: np.empty(len(deltas)) for tag in tags}
    for tag in tags:
        col = perm[bare_index[tag]]
        energy[tag][0] = values[col]
        weight[tag][0] = vectors[bare_index[tag], col] ** 2

    prev_vectors = vectors
    for j in range(1, len(deltas)):
        values, vectors = scan.eigen(deltas[j])
        step = _step_permutation(scan, deltas[j - 1], prev_vectors, deltas[j], vectors)
        perm = step[perm]
        for tag in tags:
            col = perm[bare_index[tag]]
            energy[tag][j] = values[col]
            weight[tag][j] = vectors[bare_index[tag], col] ** 2
        prev_vectors = vectors

    return DressedSpectrum(grid=deltas, branches=energy, overlaps=weight, n_max=n_max)


def track_branch(
    params: TrapParams,
    deltas: np.ndarray,
    tag: tuple[str, int],
    n_max: int,
) -> DressedSpectrum:
    """Single-branch continuity tracking; see ``sweep_spectrum``.

    Raises ``TrackingAmbiguityError`` when two continuation candidates stay
    within ``TRACK_AMBIGUITY_GAP`` of each other at the finest refinement.
    """
    deltas = np.asarray(deltas, dtype=float)
    if deltas.ndim != 1 or len(deltas) < 2:
        raise ValueError("deltas must be a 1-D grid with at least two points")
    scan = _DetuningScan(params, n_max)
    nb = n_max + 1
    state, n = tag
    if state not in ("g", "e") or not 0 <= n <= n_max:
        raise ValueError(f"unknown branch tag {tag!r} for n_max = {n_max}")
    row = n if state == "g" else nb + n

    def continue_to(d_from, vec, d_to, depth=0):
        values, vectors = scan.eigen(d_to)
        overlaps = np.abs(vectors.T @ vec)
        order = np.argsort(overlaps)
        best, second = order[-1], order[-2]
        if overlaps[best] >= TRACK_OVERLAP_MIN and (
            overlaps[best] - overlaps[second] > TRACK_AMBIGUITY_GAP
        ):
            return values, vectors, int(best)
        if depth >= MAX_BISECTION_LEVELS:
            raise TrackingAmbiguityError(
                f"branch {tag} ambiguous between delta = {d_from!r} and {d_to!r}: "
                f"candidate overlaps {overlaps[best]:.3f} / {overlaps[second]:.3f}",
                window=(d_from, d_to),
            )
        d_mid = 0.5 * (d_from + d_to)
        _, mid_vectors, col = continue_to(d_from, vec, d_mid, depth + 1)
        return continue_to(d_mid, mid_vectors[:, col], d_to, depth + 1)

    values, vectors = scan.eigen(deltas[0])
    col = int(np.argmax(vectors[row, :] ** 2))
    energy = np.empty(len(deltas))
    weight = np.empty(len(deltas))
    energy[0] = values[col]
    weight[0] = vectors[row, col] ** 2
    vec = vectors[:, col]
    for j in range(1, len(deltas)):
        values, vectors, col = continue_to(deltas[j - 1], vec, deltas[j])
        energy[j] = values[col]
        weight[j] = vectors[row, col] ** 2
        vec = vectors[:, col]

    return DressedSpectrum(
        grid=deltas, branches={tag: energy}, overlaps={tag: weight}, n_max=n_max
    )
