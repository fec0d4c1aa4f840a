"""Declarative run descriptions: config files, presets, point evaluation.

A scenario bundles a transition, a list of plane waves (or a named preset
that generates them), optional frame weights, a scan request and solver
options.  The command line reads scenarios from INI files; everything here
is also usable directly from Python.  All numbers are in decay-rate units
(gamma = 1) and wavenumbers in units of a user-declared reference k0, so
forces come out in hbar k0 gamma.

Velocity never appears as a coordinate: a moving atom sees Doppler-shifted
detunings (``field_config.doppler_shift``) and spatial phases folded into
the complex Rabi amplitudes, which is how scans over velocity and over the
standing-wave relative phase are realized.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass

import numpy as np

from .angular import HalfInt
from .errors import ObeForceError
from .field_config import FieldSet, PlaneWave, doppler_shift
from .floquet_solver import SolverOptions, solve_periodic
from .obe_matrices import ObeMatrices
from .regimes import common_pure_polarization, pure_polarization_reduced
from .state_layout import AtomicTransition, build_layout

__all__ = [
    "ScanSpec",
    "Scenario",
    "PointResult",
    "bichromatic_waves",
    "relative_phase_grid",
    "load_scenario",
    "parse_scenario",
    "evaluate_point",
    "run_scan",
]

_AXES = {
    "x": np.array([1.0, 0.0, 0.0]),
    "y": np.array([0.0, 1.0, 0.0]),
    "z": np.array([0.0, 0.0, 1.0]),
}

SCAN_VARIABLES = ("velocity", "detuning", "rabi", "j_g")


def _parse_axis(text):
    token = text.strip().lower().lstrip("+")
    if token in _AXES:
        return _AXES[token].copy()
    if token.startswith("-") and token[1:] in _AXES:
        return -_AXES[token[1:]]
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"direction must be an axis token or three numbers, got {text!r}")
    v = np.array(parts)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("direction vector must be nonzero")
    return v / n


def _parse_pol(text):
    token = text.strip()
    if "," not in token:
        return token  # named token, validated by PlaneWave
    parts = [complex(p.strip().replace(" ", "")) for p in token.split(",")]
    if len(parts) != 3:
        raise ValueError(f"polarization needs three spherical components, got {text!r}")
    return tuple(parts)


def _parse_float_list(text):
    return tuple(float(p) for p in text.split(","))


@dataclass(frozen=True)
class ScanSpec:
    """One scanned variable and the values it takes.

    ``velocity`` moves the atom along ``axis`` (Doppler shifts only),
    ``detuning`` adds a common offset to every wave, ``rabi`` multiplies
    every Rabi amplitude by the value, and ``j_g`` swaps the ground momentum
    while keeping J_e - J_g fixed.
    """

    variable: str
    values: tuple
    axis: np.ndarray = None

    def __post_init__(self):
        if self.variable not in SCAN_VARIABLES:
            raise ValueError(f"scan variable must be one of {SCAN_VARIABLES}")
        if self.variable == "j_g":
            vals = tuple(HalfInt(v) for v in self.values)
        else:
            vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        axis = _AXES["x"].copy() if self.axis is None else np.asarray(self.axis, float)
        object.__setattr__(self, "axis", axis / np.linalg.norm(axis))


@dataclass(frozen=True)
class Scenario:
    """Everything needed to run one configuration or one scan."""

    transition: AtomicTransition
    waves: tuple
    kappa: tuple = None
    scan: ScanSpec = None
    solver: SolverOptions = SolverOptions()
    average_phase: bool = False
    phase_points: int = 16
    phase_axis: np.ndarray = None
    harmonic_span: int = 0
    field_tol: float = 1e-9
    max_denominator: int = 64

    def __post_init__(self):
        object.__setattr__(self, "waves", tuple(self.waves))
        if not self.waves:
            raise ValueError("scenario needs at least one wave")
        if self.phase_points < 1:
            raise ValueError("phase_points must be positive")
        axis = self.phase_axis
        if axis is None:
            axis = self.scan.axis if self.scan is not None else _AXES["x"].copy()
        axis = np.asarray(axis, float)
        object.__setattr__(self, "phase_axis", axis / np.linalg.norm(axis))

    def transition_at(self, value):
        if self.scan is not None and self.scan.variable == "j_g":
            dj = self.transition.j_e - self.transition.j_g
            return AtomicTransition(value, value + dj, self.transition.gamma)
        return self.transition

    def waves_at(self, value):
        """Base waves with a detuning or rabi scan value applied."""
        if self.scan is None or value is None:
            return self.waves
        var = self.scan.variable
        if var == "detuning":
            return tuple(w.with_detuning(w.detuning + value) for w in self.waves)
        if var == "rabi":
            return tuple(PlaneWave(w.rabi * value, w.detuning, w.k_dir, w.k_mag, w.pol)
                         for w in self.waves)
        return self.waves

    def fieldset_at(self, value=None, relative_phase=0.0):
        """The drive an atom sees at one scan value and standing-wave phase.

        The relative phase is a displacement along ``phase_axis``: waves
        propagating with the axis pick up ``+phase/2``, waves against it
        ``-phase/2``, so counterpropagating pairs differ by ``phase``.
        """
        waves = self.waves_at(value)
        if relative_phase:
            shifted = []
            for w in waves:
                proj = float(np.dot(w.k_dir, self.phase_axis))
                factor = np.exp(0.5j * relative_phase * np.sign(proj)) if abs(proj) > 1e-12 else 1.0
                shifted.append(PlaneWave(w.rabi * factor, w.detuning, w.k_dir, w.k_mag, w.pol))
            waves = tuple(shifted)
        fs = FieldSet.build(waves, self.kappa, self.field_tol, self.max_denominator)
        if self.scan is not None and self.scan.variable == "velocity" and value is not None:
            fs = doppler_shift(fs, value * self.scan.axis)
        return fs

    def phases(self):
        if self.average_phase:
            return relative_phase_grid(self.phase_points)
        return np.array([0.0])


def relative_phase_grid(n):
    """Uniform n-point grid over the 2 pi range of the relative phase."""
    return 2.0 * math.pi * np.arange(n) / n


def bichromatic_waves(detuning=10.0, rabi=None, phase_shift=math.pi / 2, pol="pi"):
    """Four traveling waves forming two counterpropagating two-tone pairs.

    Each pair carries the tones at +-detuning around the carrier with equal
    Rabi amplitude (default sqrt(3/2) * detuning); the upper tone of the
    reflected pair is offset by ``phase_shift``.  Propagation is along +-x
    and the k magnitude is 1, so the standing-wave relative phase maps to
    atom displacement via phase = 2 k0 x.
    """
    if rabi is None:
        rabi = math.sqrt(1.5) * detuning
    plus, minus = _AXES["x"], -_AXES["x"]
    return (
        PlaneWave(rabi, +detuning, plus, 1.0, pol),
        PlaneWave(rabi, -detuning, plus, 1.0, pol),
        PlaneWave(rabi * np.exp(1j * phase_shift), +detuning, minus, 1.0, pol),
        PlaneWave(rabi, -detuning, minus, 1.0, pol),
    )


# -- INI scenario files ------------------------------------------------------

def parse_scenario(parser):
    """Build a Scenario from a parsed config (see load_scenario for grammar)."""
    known = {"transition", "field", "scan", "solver", "output"}
    for section in parser.sections():
        if section not in known and not section.startswith("wave."):
            raise ValueError(f"unknown config section [{section}]")

    if not parser.has_section("transition"):
        raise ValueError("config needs a [transition] section")
    tr_sec = parser["transition"]
    if tr_sec.getboolean("two_level", fallback=False):
        transition = AtomicTransition(0, 0, two_level_override=True)
    else:
        transition = AtomicTransition(HalfInt(tr_sec.get("j_g")), HalfInt(tr_sec.get("j_e")))

    field_sec = parser["field"] if parser.has_section("field") else {}
    wave_sections = sorted(
        (s for s in parser.sections() if s.startswith("wave.")),
        key=lambda s: int(s.split(".", 1)[1]))
    preset = field_sec.get("preset", "").strip() if field_sec else ""
    if preset and wave_sections:
        raise ValueError("give either a field preset or [wave.N] sections, not both")
    if preset:
        if preset != "bichromatic":
            raise ValueError(f"unknown field preset {preset!r}")
        det = float(field_sec.get("detuning", "10.0"))
        rabi_text = field_sec.get("rabi", "").strip()
        shift_text = field_sec.get("phase_shift", "").strip()
        waves = bichromatic_waves(
            det,
            float(rabi_text) if rabi_text else None,
            float(shift_text) if shift_text else math.pi / 2,
            _parse_pol(field_sec.get("pol", "pi")),
        )
    else:
        if not wave_sections:
            raise ValueError("config needs [wave.N] sections or a field preset")
        waves = []
        for name in wave_sections:
            sec = parser[name]
            mag = float(sec.get("rabi"))
            phase = float(sec.get("phase", "0"))
            waves.append(PlaneWave(
                mag * np.exp(1j * phase),
                float(sec.get("detuning", "0")),
                _parse_axis(sec.get("direction", "z")),
                float(sec.get("k", "1")),
                _parse_pol(sec.get("pol", "pi")),
            ))
        waves = tuple(waves)

    kappa = None
    average = False
    phase_points = 16
    field_tol = 1e-9
    max_den = 64
    if field_sec:
        if field_sec.get("kappa", "").strip():
            kappa = _parse_float_list(field_sec.get("kappa"))
        average = field_sec.getboolean("average_relative_phase", fallback=False)
        phase_points = int(field_sec.get("phase_points", "16"))
        field_tol = float(field_sec.get("tol", "1e-9"))
        max_den = int(field_sec.get("max_denominator", "64"))

    scan = None
    if parser.has_section("scan"):
        sec = parser["scan"]
        variable = sec.get("variable", "").strip()
        values_text = sec.get("values", "").strip()
        if values_text:
            raw = [p.strip() for p in values_text.split(",")]
            values = tuple(raw) if variable == "j_g" else tuple(float(p) for p in raw)
        else:
            start = float(sec.get("start"))
            stop = float(sec.get("stop"))
            points = int(sec.get("points"))
            if points < 1:
                raise ValueError("scan needs at least one point")
            values = tuple(np.linspace(start, stop, points))
        axis = _parse_axis(sec.get("axis", "x"))
        scan = ScanSpec(variable, values, axis)

    solver = SolverOptions()
    if parser.has_section("solver"):
        sec = parser["solver"]
        solver = SolverOptions(
            tol=float(sec.get("tol", str(solver.tol))),
            tol_zero=float(sec.get("tol_zero", str(solver.tol_zero))),
            tol_parallel=float(sec.get("tol_parallel", str(solver.tol_parallel))),
            n_blocks_init=int(sec.get("n_blocks_init", str(solver.n_blocks_init))),
            n_blocks_cap=int(sec.get("n_blocks_cap", str(solver.n_blocks_cap))),
            cond_threshold=float(sec.get("cond_threshold", str(solver.cond_threshold))),
            rate_harmonic_span=int(sec.get("rate_harmonic_span", str(solver.rate_harmonic_span))),
        )

    span = 0
    if parser.has_section("output"):
        span = int(parser["output"].get("harmonics", "0"))

    return Scenario(
        transition=transition, waves=waves, kappa=kappa, scan=scan,
        solver=solver, average_phase=average, phase_points=phase_points,
        harmonic_span=span, field_tol=field_tol, max_denominator=max_den,
    )


def load_scenario(path):
    """Read a scenario from an INI file.

    Sections: [transition] (j_g, j_e as integers or fractions like 3/2, or
    two_level = true); [wave.N] (rabi, phase, detuning, direction, k, pol)
    numbered from 1; [field] (preset, detuning, rabi, phase_shift, pol,
    kappa, average_relative_phase, phase_points, tol, max_denominator);
    [scan] (variable, start/stop/points or values, axis); [solver]
    (tolerances and caps); [output] (harmonics).
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ValueError(f"cannot read config file {path}")
    return parse_scenario(parser)


# -- point evaluation --------------------------------------------------------

@dataclass
class PointResult:
    """Phase-averaged observables at one scan value."""

    value: object
    rbar: np.ndarray = None          # mean absorption rate per wave
    force: np.ndarray = None         # total mean force, units hbar k0 gamma
    force_per_wave: np.ndarray = None
    rate_harmonics: dict = None      # (j, n) -> complex R_j^(n), averaged
    n_blocks: int = 0
    error: str = ""

    @property
    def ok(self):
        return not self.error


def _solve(fieldset, matrices, options):
    if common_pure_polarization(fieldset) is not None:
        return pure_polarization_reduced(fieldset, matrices, options)
    return solve_periodic(fieldset, matrices, options)


def evaluate_point(scenario, value=None, matrices=None, harmonic_span=None,
                   strict=False):
    """Solve one scan point, averaging over the relative-phase grid.

    Failures are captured in the result's ``error`` field instead of
    propagating (unless ``strict``), so a scan can keep going past a bad
    point.
    """
    span = scenario.harmonic_span if harmonic_span is None else harmonic_span
    tr = scenario.transition_at(value)
    if matrices is None or matrices.layout.transition != tr:
        matrices = ObeMatrices.build(build_layout(tr))
    phases = scenario.phases()
    n_waves = len(scenario.waves)
    rbar = np.zeros(n_waves)
    force = np.zeros(3)
    per_wave = np.zeros((n_waves, 3))
    harmonics = {(j, n): 0.0 + 0.0j
                 for j in range(n_waves) for n in range(-span, span + 1)}
    n_blocks = 0
    try:
        for phase in phases:
            fs = scenario.fieldset_at(value, phase)
            sol = _solve(fs, matrices, scenario.solver)
            rbar += sol.rbar
            per_wave += sol.mean_force
            force += sol.mean_force.sum(axis=0)
            for key in harmonics:
                harmonics[key] += sol.rate_harmonic(*key)
            n_blocks = max(n_blocks, sol.n_blocks)
    except (ObeForceError, ValueError) as exc:
        if strict:
            raise
        return PointResult(value, error=f"{type(exc).__name__}: {exc}")
    scale = 1.0 / len(phases)
    return PointResult(
        value, rbar * scale, force * scale, per_wave * scale,
        {k: v * scale for k, v in harmonics.items()}, n_blocks,
    )


def run_scan(scenario, threads=1):
    """Evaluate every scan value; failed points carry their error message."""
    if scenario.scan is None:
        return [evaluate_point(scenario)]
    values = scenario.scan.values
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda v: evaluate_point(scenario, v), values))
    matrices = None
    results = []
    for v in values:
        tr = scenario.transition_at(v)
        if matrices is None or matrices.layout.transition != tr:
            matrices = ObeMatrices.build(build_layout(tr))
        results.append(evaluate_point(scenario, v, matrices))
    return results
