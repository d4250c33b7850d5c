"""Command-line front end: unit handling, figure-data generation, reports.

Subcommands::

    shift      resonance shift of one sideband, all pipelines side by side
    sweep      dressed/bare level curves over a detuning window
    scan-eta   shift vs Lamb-Dicke parameter for one sideband
    sidebands  shift table for the first few red/blue sidebands
    check      self-test battery (exit 0 iff all checks pass)

Frequencies are written ``2pi*<value><unit>`` (angular) or ``<value><unit>``
(ordinary); bare numbers are dimensionless multiples of the trap frequency.
All computation is done with omega_t = 1; physical units only scale inputs
and outputs here.  Exit codes: 0 ok, 2 invalid configuration, 3 numeric
failure or non-convergence, 4 failed self-check.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np
from scipy.constants import hbar as HBAR
from scipy.constants import physical_constants

from . import __version__
from .errors import TrapshiftError
from .fock import chi_magnitude, coupling_table, displacement_oracle
from .hamiltonian import bare_energy
from .params import SidebandId, TrapParams
from .resolvent import bs_shift, bs_shift_literature, eta_zero_shift
from .spectrum import find_resonance, sweep_spectrum

ATOMIC_MASS = physical_constants["atomic mass constant"][0]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CHECK = 4

_FREQ_RE = re.compile(r"^\s*(?P<twopi>2pi\*)?\s*(?P<value>[^a-df-zA-DF-Z\s]+)\s*(?P<unit>GHz|MHz|kHz|Hz)?\s*$")
_UNIT_SCALE = {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9}

# Defaults that reproduce the standard figure datasets.
SWEEP_DEFAULTS = {"eta": 0.4, "rabi": "0.3", "delta_min": -2.5, "delta_max": 2.5, "points": 101, "levels": 4}
SCAN_DEFAULTS = {"rabi": "0.01", "eta_min": 0.0, "eta_max": 0.5, "points": 26, "ng": 1, "ne": 0}
SIDEBAND_DEFAULTS = {"trap_freq": "2pi*1.36MHz", "rabi": "2pi*53kHz", "eta": 0.083, "max_order": 2, "max_n": 3}


class ConfigError(ValueError):
    """Invalid command-line or config-file input."""


def parse_frequency(text: str) -> tuple[float, bool]:
    """Parse a frequency string to (angular value, carries-physical-unit).

    With a unit the stored angular frequency is 2*pi*value*unit regardless of
    the ``2pi*`` prefix (the prefix marks the notation, not a different
    quantity); without a unit the value is a dimensionless multiple of
    omega_t and must not carry the prefix.
    """
    m = _FREQ_RE.match(text)
    if not m:
        raise ConfigError(f"cannot parse frequency {text!r}")
    try:
        value = float(m.group("value"))
    except ValueError as exc:
        raise ConfigError(f"cannot parse frequency {text!r}") from exc
    unit = m.group("unit")
    if unit is None:
        if m.group("twopi"):
            raise ConfigError(f"{text!r}: the 2pi* prefix requires an explicit unit")
        return value, False
    return 2.0 * math.pi * value * _UNIT_SCALE[unit], True


def serialize_frequency(angular: float) -> str:
    """Canonical round-trippable form of an angular frequency."""
    return f"2pi*{angular / (2.0 * math.pi)!r}Hz"


def parse_mass(text: str) -> float:
    """Mass in kg; accepts plain kg values or atomic-mass-unit suffixes u/amu."""
    t = text.strip()
    for suffix in ("amu", "u"):
        if t.endswith(suffix):
            try:
                return float(t[: -len(suffix)]) * ATOMIC_MASS
            except ValueError as exc:
                raise ConfigError(f"cannot parse mass {text!r}") from exc
    try:
        return float(t)
    except ValueError as exc:
        raise ConfigError(f"cannot parse mass {text!r}") from exc


def lamb_dicke_from_physical(k_laser: float, mass: float, omega_t: float) -> float:
    """eta = k_L * x0 with x0 = sqrt(hbar / (2 m omega_t)) the ground-state extent."""
    if mass <= 0 or omega_t <= 0:
        raise ConfigError("mass and trap frequency must be positive to derive eta")
    return k_laser * math.sqrt(HBAR / (2.0 * mass * omega_t))


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_output(config: dict, columns: list[str], rows: list[list], fmt: str, out: str | None) -> None:
    """Emit one table as CSV (LF, '.' decimal) or as a single JSON object."""
    if fmt == "csv":
        lines = [",".join(columns)]
        lines += [",".join(_format_cell(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps({"config": config, "columns": columns, "rows": rows}, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


class Resolved:
    """Effective configuration: command defaults < config file < flags."""

    def __init__(self, args: argparse.Namespace, defaults: dict | None = None):
        merged = dict(defaults or {})
        explicit: set[str] = set()
        if getattr(args, "config", None):
            try:
                loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config file {args.config!r}: {exc}") from exc
            if not isinstance(loaded, dict):
                raise ConfigError("config file must hold a JSON object")
            merged.update(loaded)
            explicit.update(loaded)
        for key, value in vars(args).items():
            if key != "config" and value is not None:
                merged[key] = value
                explicit.add(key)
        self._data = merged
        self._explicit = explicit

    def get(self, key, fallback=None):
        return self._data.get(key, fallback)

    def is_explicit(self, key) -> bool:
        """True when the value came from a flag or the config file, not a default."""
        return key in self._explicit

    def require(self, key):
        value = self._data.get(key)
        if value is None:
            raise ConfigError(f"missing required option --{key.replace('_', '-')}")
        return value

    def as_dict(self) -> dict:
        return dict(self._data)


def _resolve_physics(cfg: Resolved) -> tuple[TrapParams, float | None, dict]:
    """Build dimensionless TrapParams plus the physical omega_t when units are given."""
    trap_text = cfg.get("trap_freq")
    rabi_text = cfg.require("rabi")

    omega_phys = None
    if trap_text is not None:
        omega_value, omega_unit = parse_frequency(str(trap_text))
        if omega_unit:
            omega_phys = omega_value
        elif omega_value != 1.0:
            raise ConfigError("a dimensionless trap frequency must be 1 (it sets the unit)")

    rabi_value, rabi_unit = parse_frequency(str(rabi_text))
    if rabi_unit:
        if omega_phys is None:
            raise ConfigError("a unit-bearing --rabi requires a unit-bearing --trap-freq")
        rabi = rabi_value / omega_phys
    else:
        rabi = rabi_value

    eta = cfg.get("eta")
    k_laser = cfg.get("k_laser")
    mass = cfg.get("mass")
    if k_laser is not None or mass is not None:
        if cfg.is_explicit("eta"):
            raise ConfigError("give either --eta or the pair --k-laser/--mass, not both")
        eta = None  # a command-default eta yields to an explicit derivation pair
    if eta is None:
        if k_laser is None or mass is None:
            raise ConfigError("eta is undefined: give --eta or both --k-laser and --mass")
        if omega_phys is None:
            raise ConfigError("deriving eta from --k-laser/--mass requires a physical --trap-freq")
        eta = lamb_dicke_from_physical(float(k_laser), parse_mass(str(mass)), omega_phys)
    eta = float(eta)

    units = cfg.get("units")
    if units is None:
        units = "physical" if omega_phys is not None else "dimensionless"
    if units not in ("dimensionless", "physical"):
        raise ConfigError(f"unknown units mode {units!r}")
    if units == "physical" and omega_phys is None:
        raise ConfigError("--units physical requires a unit-bearing --trap-freq")

    try:
        params = TrapParams(rabi=rabi, eta=eta)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    meta = {
        "trap_freq": serialize_frequency(omega_phys) if omega_phys else "1",
        "rabi_over_omega_t": rabi,
        "eta": eta,
        "units": units,
    }
    return params, omega_phys, meta


def _sideband(cfg: Resolved, default_ng=None, default_ne=None) -> SidebandId:
    ng = cfg.get("ng", default_ng)
    ne = cfg.get("ne", default_ne)
    if ng is None or ne is None:
        raise ConfigError("sideband is undefined: give --ng and --ne")
    try:
        return SidebandId(int(ng), int(ne))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _hz(value_dimensionless: float | None, omega_phys: float | None) -> float | None:
    if value_dimensionless is None or omega_phys is None:
        return None
    return value_dimensionless * omega_phys / (2.0 * math.pi)


# ----------------------------------------------------------------- commands


def cmd_shift(cfg: Resolved) -> int:
    params, omega_phys, meta = _resolve_physics(cfg)
    sideband = _sideband(cfg)
    want_ld = bool(cfg.get("ld", False))
    if want_ld and sideband.is_carrier:
        raise ConfigError("--ld requested for a carrier: the Lamb-Dicke expansion needs n_g != n_e")

    n_max = cfg.get("nmax")
    k_max = cfg.get("kmax")
    pert = bs_shift(sideband, params, k_max=int(k_max) if k_max is not None else None)
    report = find_resonance(sideband, params, n_max=int(n_max) if n_max is not None else None)
    gap_expected = params.rabi * chi_magnitude(sideband.n_g, sideband.n_e, params.eta)
    shift_eta0 = None if sideband.is_carrier else eta_zero_shift(sideband, params)

    columns = [
        "n_g", "n_e", "delta0", "shift_full", "carrier_term", "sideband_term",
        "shift_ld", "shift_lit", "shift_eta0", "shift_exact", "delta_star",
        "gap", "gap_half", "gap_coupling", "method", "n_max_used", "converged",
        "well_isolated",
    ]
    row = [
        sideband.n_g, sideband.n_e, report.delta0, pert.delta_omega_full,
        pert.carrier_term, pert.sideband_term, pert.delta_omega_ld,
        pert.delta_omega_lit, shift_eta0, report.delta_omega, report.delta_star,
        report.gap, 0.5 * report.gap, gap_expected, report.method,
        report.n_max_used, report.converged, pert.well_isolated,
    ]
    if meta["units"] == "physical":
        columns += ["shift_full_hz", "shift_exact_hz", "gap_hz"]
        row += [
            _hz(pert.delta_omega_full, omega_phys),
            _hz(report.delta_omega, omega_phys),
            _hz(report.gap, omega_phys),
        ]
    config = {"command": "shift", **meta, "n_g": sideband.n_g, "n_e": sideband.n_e}
    write_output(config, columns, [row], cfg.get("format", "csv"), cfg.get("out"))
    return EXIT_OK


def cmd_sweep(cfg: Resolved) -> int:
    params, omega_phys, meta = _resolve_physics(cfg)
    lo = float(cfg.get("delta_min", SWEEP_DEFAULTS["delta_min"]))
    hi = float(cfg.get("delta_max", SWEEP_DEFAULTS["delta_max"]))
    points = int(cfg.get("points", SWEEP_DEFAULTS["points"]))
    levels = int(cfg.get("levels", SWEEP_DEFAULTS["levels"]))
    if not (hi > lo and points >= 2 and levels >= 1):
        raise ConfigError("sweep needs delta_max > delta_min, points >= 2, levels >= 1")
    n_max = cfg.get("nmax")
    n_max = int(n_max) if n_max is not None else (levels - 1) + 15 + math.ceil(25.0 * params.eta**2)
    if levels > n_max + 1:
        raise ConfigError(f"--levels {levels} exceeds the basis size n_max + 1 = {n_max + 1}")

    grid = np.linspace(lo, hi, points)
    tags = [("g", n) for n in range(levels)] + [("e", n) for n in range(levels)]
    spectrum = sweep_spectrum(params, grid, n_max, tags=tags)

    include_bare = bool(cfg.get("bare", False))
    columns = ["delta", "branch_id", "energy", "overlap_tag"]
    rows: list[list] = []
    for j, delta in enumerate(grid):
        for tag in tags:
            rows.append([
                float(delta), f"{tag[0]}{tag[1]}",
                float(spectrum.branches[tag][j]), float(spectrum.overlaps[tag][j]),
            ])
        if include_bare:
            at = params.with_delta(float(delta))
            for tag in tags:
                rows.append([
                    float(delta), f"bare_{tag[0]}{tag[1]}",
                    bare_energy(tag[0], tag[1], at), None,
                ])
    config = {
        "command": "sweep", **meta, "delta_min": lo, "delta_max": hi,
        "points": points, "levels": levels, "n_max": n_max, "bare": include_bare,
    }
    write_output(config, columns, rows, cfg.get("format", "csv"), cfg.get("out"))
    return EXIT_OK


def cmd_scan_eta(cfg: Resolved) -> int:
    cfg_eta = cfg.get("eta")
    if cfg_eta is not None:
        raise ConfigError("scan-eta sweeps eta; use --eta-min/--eta-max instead of --eta")
    lo = float(cfg.get("eta_min", SCAN_DEFAULTS["eta_min"]))
    hi = float(cfg.get("eta_max", SCAN_DEFAULTS["eta_max"]))
    points = int(cfg.get("points", SCAN_DEFAULTS["points"]))
    if not (hi > lo >= 0 and points >= 2):
        raise ConfigError("scan-eta needs eta_max > eta_min >= 0 and points >= 2")
    sideband = _sideband(cfg, SCAN_DEFAULTS["ng"], SCAN_DEFAULTS["ne"])
    if sideband.is_carrier:
        raise ConfigError("scan-eta requires a sideband with n_g != n_e")

    rabi_text = str(cfg.get("rabi", SCAN_DEFAULTS["rabi"]))
    rabi_value, rabi_unit = parse_frequency(rabi_text)
    if rabi_unit:
        raise ConfigError("scan-eta runs dimensionless; give --rabi as a ratio of omega_t")
    n_max_opt = cfg.get("nmax")
    k_max = cfg.get("kmax")
    k_max = int(k_max) if k_max is not None else None

    is_first_red = (sideband.n_g, sideband.n_e) == (1, 0)
    columns = ["eta", "shift_exact", "shift_full", "shift_ld", "shift_lit"]
    rows: list[list] = []
    for eta in np.linspace(lo, hi, points):
        params = TrapParams(rabi=rabi_value, eta=float(eta))
        pert = bs_shift(sideband, params, k_max=k_max)
        n_max = int(n_max_opt) if n_max_opt is not None else None
        report = find_resonance(sideband, params, n_max=n_max)
        rows.append([
            float(eta), report.delta_omega, pert.delta_omega_full,
            pert.delta_omega_ld,
            bs_shift_literature(params) if is_first_red else None,
        ])
    config = {
        "command": "scan-eta", "rabi_over_omega_t": rabi_value,
        "n_g": sideband.n_g, "n_e": sideband.n_e,
        "eta_min": lo, "eta_max": hi, "points": points, "units": "dimensionless",
    }
    write_output(config, columns, rows, cfg.get("format", "csv"), cfg.get("out"))
    return EXIT_OK


def cmd_sidebands(cfg: Resolved) -> int:
    params, omega_phys, meta = _resolve_physics(cfg)
    max_order = int(cfg.get("max_order", SIDEBAND_DEFAULTS["max_order"]))
    max_n = int(cfg.get("max_n", SIDEBAND_DEFAULTS["max_n"]))
    if max_order < 1 or max_n < 0:
        raise ConfigError("sidebands needs max_order >= 1 and max_n >= 0")
    k_max = cfg.get("kmax")
    k_max = int(k_max) if k_max is not None else None

    columns = ["sideband", "order", "n", "n_g", "n_e", "shift", "shift_hz"]
    rows: list[list] = []
    for signed_order in range(-max_order, max_order + 1):
        for n in range(max_n + 1):
            if signed_order < 0:  # red: n labels the lower level n_e
                ng, ne = n - signed_order, n
                kind = "red"
            elif signed_order > 0:  # blue: n labels the lower level n_g
                ng, ne = n, n + signed_order
                kind = "blue"
            else:
                ng = ne = n
                kind = "carrier"
            shift = bs_shift(SidebandId(ng, ne), params, k_max=k_max).delta_omega_full
            rows.append([
                kind, abs(signed_order), n, ng, ne, shift, _hz(shift, omega_phys),
            ])
    config = {
        "command": "sidebands", **meta, "max_order": max_order, "max_n": max_n,
    }
    write_output(config, columns, rows, cfg.get("format", "csv"), cfg.get("out"))
    return EXIT_OK


def run_checks(tol_scale: float = 1.0) -> list[tuple[str, float, float, bool]]:
    """The self-test battery behind ``trapshift check``.

    Each entry is (name, measured, threshold, passed); thresholds scale with
    ``tol_scale`` so margins can be probed.
    """
    results: list[tuple[str, float, float, bool]] = []

    def record(name: str, measured: float, threshold: float) -> None:
        threshold *= tol_scale
        results.append((name, measured, threshold, measured <= threshold))

    table = coupling_table(0.4, 12)
    oracle = displacement_oracle(0.4, 12)
    record("bch_oracle_max_diff", float(np.abs(table.entries - oracle.entries).max()), 1e-8)

    wide = coupling_table(0.3, 60)
    record(
        "unitarity_row_norm_err",
        max(abs(wide.row_norm(n) - 1.0) for n in range(11)),
        1e-10,
    )

    params = TrapParams(rabi=0.01, eta=0.3)
    record(
        "carrier_null_max",
        max(abs(bs_shift(SidebandId(n, n), params).delta_omega_full) for n in range(4)),
        1e-15,
    )

    worst = 0.0
    for a in range(4):
        for b in range(a + 1, 4):
            fwd = bs_shift(SidebandId(a, b), params).delta_omega_full
            rev = bs_shift(SidebandId(b, a), params).delta_omega_full
            worst = max(worst, abs(fwd + rev) / max(abs(fwd), 1e-300))
    record("swap_antisymmetry_rel", worst, 1e-15)

    small = TrapParams(rabi=1e-3, eta=0.0)
    closed = eta_zero_shift(SidebandId(0, 1), small)
    record(
        "eta_zero_perturbative",
        abs(bs_shift(SidebandId(0, 1), small).delta_omega_full - closed),
        1e-12,
    )
    report = find_resonance(SidebandId(0, 1), small)
    record("eta_zero_numeric", abs(report.delta_omega - closed), 1e-12)
    record("eta_zero_crossing_gap", report.gap, 1e-10)

    params = TrapParams(rabi=0.01, eta=0.1)
    pert = bs_shift(SidebandId(0, 1), params).delta_omega_full
    exact = find_resonance(SidebandId(0, 1), params).delta_omega
    record(
        "perturbative_vs_exact",
        abs(exact - pert),
        max(0.01 * abs(pert), 1e-9),
    )
    return results


def cmd_check(cfg: Resolved) -> int:
    tol_scale = float(cfg.get("tol_scale", 1.0))
    if tol_scale <= 0:
        raise ConfigError("--tol-scale must be positive")
    results = run_checks(tol_scale)
    columns = ["check", "measured", "threshold", "status"]
    rows = [
        [name, measured, threshold, "pass" if ok else "FAIL"]
        for name, measured, threshold, ok in results
    ]
    config = {"command": "check", "tol_scale": tol_scale}
    write_output(config, columns, rows, cfg.get("format", "csv"), cfg.get("out"))
    failed = [name for name, _, _, ok in results if not ok]
    if failed:
        print(f"check failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


# ------------------------------------------------------------------- parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with option defaults; flags win on conflict")
    p.add_argument("--trap-freq", dest="trap_freq", help="trap frequency, e.g. 2pi*1.36MHz")
    p.add_argument("--rabi", help="Rabi frequency, e.g. 2pi*53kHz or a ratio like 0.01")
    p.add_argument("--eta", type=float, help="Lamb-Dicke parameter")
    p.add_argument("--k-laser", dest="k_laser", type=float, help="laser wavenumber in rad/m (with --mass)")
    p.add_argument("--mass", help="ion mass: kg, or with u/amu suffix, e.g. 40u")
    p.add_argument("--nmax", type=int, help="Fock-basis truncation for diagonalization")
    p.add_argument("--kmax", type=int, help="summation truncation for the closed-form shift")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--units", choices=("dimensionless", "physical"), help="reporting mode")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trapshift",
        description="Sideband resonance shifts of laser-driven trapped ions",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("shift", help="resonance shift of one sideband")
    _add_common(p)
    p.add_argument("--ng", type=int, help="ground-state vibrational number n_g")
    p.add_argument("--ne", type=int, help="excited-state vibrational number n_e")
    p.add_argument("--ld", action="store_true", default=None, help="require the Lamb-Dicke expansion value")
    p.set_defaults(run=cmd_shift)

    p = sub.add_parser("sweep", help="dressed level curves over a detuning window")
    _add_common(p)
    p.add_argument("--delta-min", dest="delta_min", type=float, help="window start in omega_t units")
    p.add_argument("--delta-max", dest="delta_max", type=float, help="window end in omega_t units")
    p.add_argument("--points", type=int, help="grid points")
    p.add_argument("--levels", type=int, help="Fock levels per sector to emit")
    p.add_argument("--bare", action="store_true", default=None, help="also emit the uncoupled lines")
    p.set_defaults(run=cmd_sweep, _defaults={"eta": SWEEP_DEFAULTS["eta"], "rabi": SWEEP_DEFAULTS["rabi"]})

    p = sub.add_parser("scan-eta", help="shift vs Lamb-Dicke parameter")
    _add_common(p)
    p.add_argument("--ng", type=int, help="ground-state vibrational number n_g")
    p.add_argument("--ne", type=int, help="excited-state vibrational number n_e")
    p.add_argument("--eta-min", dest="eta_min", type=float, help="scan start")
    p.add_argument("--eta-max", dest="eta_max", type=float, help="scan end")
    p.add_argument("--points", type=int, help="grid points")
    p.set_defaults(run=cmd_scan_eta)

    p = sub.add_parser("sidebands", help="shift table for the first few sidebands")
    _add_common(p)
    p.add_argument("--max-order", dest="max_order", type=int, help="highest sideband order")
    p.add_argument("--max-n", dest="max_n", type=int, help="highest vibrational level")
    p.set_defaults(
        run=cmd_sidebands,
        _defaults={
            "trap_freq": SIDEBAND_DEFAULTS["trap_freq"],
            "rabi": SIDEBAND_DEFAULTS["rabi"],
            "eta": SIDEBAND_DEFAULTS["eta"],
        },
    )

    p = sub.add_parser("check", help="run the self-test battery")
    _add_common(p)
    p.add_argument("--tol-scale", dest="tol_scale", type=float, help="scale all check thresholds")
    p.set_defaults(run=cmd_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    defaults = getattr(args, "_defaults", None)
    try:
        cfg = Resolved(args, defaults)
        return args.run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TrapshiftError,) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
