"""Radiation-pressure forces on multilevel atoms in periodic drives.

Steady-state optical Bloch equations for a degenerate two-manifold atom
in an arbitrary set of quasi-resonant plane waves, solved exactly in a
harmonic basis (no time stepping), plus a time-domain integrator used as
an independent cross-check.  Everything is expressed in natural units:
rates carry Gamma, forces carry hbar * k0 * Gamma, detunings and Rabi
amplitudes are in Gamma, wavevectors in a user-chosen k0.

Typical use: describe the drive with `PlaneWave` / `FieldSet.build`,
the atom with `AtomicTransition` / `ObeMatrices.build`, then call
`solve_periodic`.  Config-file driven runs go through `load_scenario`
and `run_scan`; the `obeforce` command wraps those.
"""

from .angular import HalfInt, clebsch_gordan, wigner_D
from .checks import CheckReport, run_suite, run_suites
from .errors import (
    DegenerateRegime,
    DepthNotConverged,
    IncommensurableFrequencies,
    ObeForceError,
    PeriodMismatch,
    SingularContinuedFraction,
    SingularHarmonicMatrix,
    TruncationNotConverged,
    UnsupportedTransition,
)
from .field_config import FieldSet, PlaneWave, doppler_shift, elliptical_pol
from .floquet_solver import (
    PeriodicSolution,
    SolverOptions,
    absorption_vector,
    solve_periodic,
)
from .frame_rotation import (
    EulerAngles,
    rotate_absorption,
    rotate_field,
    rotate_vector,
    state_rotation_matrix,
)
from .obe_matrices import ObeMatrices, assemble_A
from .regimes import (
    gao_params,
    incoherent_sigma_pm,
    low_intensity_rate,
    n2_continued_fraction,
    pure_polarization_reduced,
    same_frequency_rate,
)
from .scenario import (
    PointResult,
    ScanSpec,
    Scenario,
    bichromatic_waves,
    evaluate_point,
    load_scenario,
    run_scan,
)
from .state_layout import AtomicTransition, StateLayout, build_layout
from .time_oracle import (
    fourier_extract,
    integrate,
    mean_rates,
    monodromy,
    rate_timeseries,
    settle_to_periodic,
)

__all__ = [
    "AtomicTransition",
    "CheckReport",
    "DegenerateRegime",
    "DepthNotConverged",
    "EulerAngles",
    "FieldSet",
    "HalfInt",
    "IncommensurableFrequencies",
    "ObeForceError",
    "ObeMatrices",
    "PeriodMismatch",
    "PeriodicSolution",
    "PlaneWave",
    "PointResult",
    "ScanSpec",
    "Scenario",
    "SingularContinuedFraction",
    "SingularHarmonicMatrix",
    "SolverOptions",
    "StateLayout",
    "TruncationNotConverged",
    "UnsupportedTransition",
    "absorption_vector",
    "assemble_A",
    "bichromatic_waves",
    "build_layout",
    "clebsch_gordan",
    "doppler_shift",
    "elliptical_pol",
    "evaluate_point",
    "fourier_extract",
    "gao_params",
    "incoherent_sigma_pm",
    "integrate",
    "low_intensity_rate",
    "mean_rates",
    "monodromy",
    "n2_continued_fraction",
    "pure_polarization_reduced",
    "rate_timeseries",
    "rotate_absorption",
    "rotate_field",
    "rotate_vector",
    "run_scan",
    "run_suite",
    "run_suites",
    "same_frequency_rate",
    "settle_to_periodic",
    "solve_periodic",
    "state_rotation_matrix",
    "wigner_D",
]
