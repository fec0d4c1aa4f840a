"""Built-in verification suites.

Each suite exercises one family of exact statements the solver must satisfy
(known closed forms, frame covariance, structural identities of the coupling
matrices) on randomized or enumerated inputs and reports the worst residual.
The command line exposes them through the ``check`` subcommand; the test
suite runs them as well, so a shipped binary can re-verify itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angular import HalfInt
from .field_config import FieldSet, PlaneWave
from .floquet_solver import absorption_vector, solve_periodic
from .frame_rotation import (
    EulerAngles,
    rotate_absorption,
    rotate_field,
    rotate_vector,
    state_rotation_matrix,
)
from .obe_matrices import (
    ObeMatrices,
    assemble_A,
    build_C_xixi,
    closed_form_c_xixi,
)
from .state_layout import AtomicTransition, build_layout

__all__ = ["CheckReport", "SUITES", "run_suite", "run_suites",
           "two_level_limit", "rotation_covariance", "structural"]


@dataclass
class CheckReport:
    name: str
    passed: bool
    residual: float
    threshold: float
    detail: str = ""
    extras: dict = None


def _random_direction(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def _random_pol(rng):
    c = rng.normal(size=3) + 1j * rng.normal(size=3)
    return c / np.linalg.norm(c)


def two_level_limit(seed=0, n_configs=20):
    """Mean rate of a driven two-level atom against the saturation formula.

    For one wave the mean absorption rate must equal (1/2) s / (1 + s) with
    s = |Omega|^2 / 2 / (1/4 + delta^2), and the force must point along k.
    """
    rng = np.random.default_rng(seed)
    tr = AtomicTransition(0, 0, two_level_override=True)
    matrices = ObeMatrices.build(build_layout(tr))
    worst = 0.0
    for _ in range(n_configs):
        mag = 10.0 ** rng.uniform(-1.0, 0.7)
        rabi = mag * np.exp(1j * rng.uniform(0, 2 * np.pi))
        delta = rng.uniform(-10.0, 10.0)
        k_dir = _random_direction(rng)
        fs = FieldSet.build([PlaneWave(rabi, delta, k_dir, 1.0, "pi")])
        sol = solve_periodic(fs, matrices)
        s = (mag ** 2 / 2.0) / (0.25 + delta ** 2)
        ref = 0.5 * s / (1.0 + s)
        worst = max(worst, abs(sol.rbar[0] - ref) / ref)
        force_err = np.max(np.abs(sol.mean_force[0] - ref * k_dir))
        worst = max(worst, force_err / ref)
    return CheckReport("two-level-limit", worst < 1e-9, worst, 1e-9,
                       f"{n_configs} random single-wave configs")


_COVARIANCE_TRANSITIONS = (
    AtomicTransition("1/2", "3/2"),
    AtomicTransition(1, 1),
    AtomicTransition(1, 2),
    AtomicTransition("3/2", "3/2"),
    AtomicTransition("1/2", "1/2"),
)


def rotation_covariance(seed=0, n_pairs=25):
    """Frame covariance of the generator, source, rates and absorption.

    For each randomized (drive, Euler angles) pair the suite checks that the
    generator built from the rotated drive equals T A T^-1, that the source
    vector is invariant, that per-wave mean rates match, and that the
    absorption harmonics transform with the conjugated rank-1 rotation.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_pairs):
        tr = _COVARIANCE_TRANSITIONS[i % len(_COVARIANCE_TRANSITIONS)]
        layout = build_layout(tr)
        matrices = ObeMatrices.build(layout)
        waves = tuple(
            PlaneWave(rng.uniform(0.3, 2.0) * np.exp(1j * rng.uniform(0, 2 * np.pi)),
                      det, _random_direction(rng), 1.0, _random_pol(rng))
            for det in (3.0, -1.0))
        fs = FieldSet.build(waves)
        angles = EulerAngles.random(rng)
        fs_rot = rotate_field(fs, angles)
        t_mat = state_rotation_matrix(layout, angles)

        mats_d = matrices.with_deltabar(fs.deltabar)
        for t in (0.0, 0.37, 1.91):
            a_orig = assemble_A(mats_d, fs.omega_q(t))
            a_rot = assemble_A(mats_d, fs_rot.omega_q(t))
            resid = np.max(np.abs(a_rot @ t_mat - t_mat @ a_orig))
            worst = max(worst, resid)
        worst = max(worst, float(np.max(np.abs(t_mat @ matrices.b - matrices.b))))

        sol = solve_periodic(fs, matrices)
        sol_rot = solve_periodic(fs_rot, matrices)
        worst = max(worst, float(np.max(np.abs(sol_rot.rbar - sol.rbar))))
        force = sol.mean_force.sum(axis=0)
        force_rot = sol_rot.mean_force.sum(axis=0)
        worst = max(worst, float(np.max(np.abs(force_rot - rotate_vector(force, angles)))))
        for n in sol.x_o:
            chi = absorption_vector(sol.x_o_at(n), layout)
            chi_rot = absorption_vector(sol_rot.x_o_at(n), layout)
            worst = max(worst, float(np.max(np.abs(chi_rot - rotate_absorption(chi, angles)))))
    return CheckReport("rotation-covariance", worst < 1e-9, worst, 1e-9,
                       f"{n_pairs} randomized (drive, angles) pairs")


def structural(max_jg=2):
    """Structural identities of the second-order coupling blocks.

    Sweeps every dipole transition with J_g up to ``max_jg``: the
    closed-form per-element blocks must equal the factored products, the
    Zeeman-Zeeman blocks must be mutually adjoint in (q, q'), the summed
    diagonal must be real and the diagonal population-Zeeman blocks empty.
    """
    worst_closed = 0.0
    worst_sym = 0.0
    count = 0
    for twice_jg in range(0, 2 * max_jg + 1):
        for dj in (-1, 0, 1):
            twice_je = twice_jg + 2 * dj
            if twice_je < 0 or (twice_jg == 0 and twice_je == 0):
                continue
            tr = AtomicTransition(HalfInt.from_twice(twice_jg), HalfInt.from_twice(twice_je))
            layout = build_layout(tr)
            npop = layout.n_j - 1
            total = np.zeros((layout.dim_xi, layout.dim_xi), dtype=complex)
            blocks = {}
            for q in (1, 0, -1):
                for qp in (1, 0, -1):
                    direct = build_C_xixi(layout, q, qp)
                    closed = closed_form_c_xixi(layout, q, qp)
                    worst_closed = max(worst_closed, float(np.max(np.abs(direct - closed))))
                    blocks[(q, qp)] = direct
            for q in (1, 0, -1):
                cqq = blocks[(q, q)]
                total += cqq
                worst_sym = max(worst_sym, float(np.max(np.abs(cqq[:npop, npop:]))),
                                float(np.max(np.abs(cqq[npop:, :npop]))))
                for qp in (1, 0, -1):
                    zz = blocks[(q, qp)][npop:, npop:]
                    zz_swap = blocks[(qp, q)][npop:, npop:]
                    worst_sym = max(worst_sym, float(np.max(np.abs(zz - zz_swap.conj().T))))
            worst_sym = max(worst_sym, float(np.max(np.abs(total.imag))))
            count += 1
    passed = worst_closed < 1e-14 and worst_sym < 1e-13
    return CheckReport("structural", passed, max(worst_closed, worst_sym), 1e-13,
                       f"{count} transitions up to J_g = {max_jg}",
                       extras={"closed_form": worst_closed, "symmetry": worst_sym})


SUITES = {
    "two-level-limit": two_level_limit,
    "rotation-covariance": rotation_covariance,
    "structural": structural,
}


def run_suite(name, seed=0):
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown check suite {name!r}; "
                         f"choose from {', '.join(sorted(SUITES))}") from None
    if name == "structural":
        return fn()
    return fn(seed=seed)


def run_suites(names=None, seed=0):
    names = list(names) if names else sorted(SUITES)
    return [run_suite(n, seed) for n in names]
