"""Quantization-frame changes for states, drives and observables.

A z-y-z rotation R = exp(-i alpha Jz) exp(-i beta Jy) exp(-i gamma Jz) of the
reference frame conjugates the density matrix with the direct sum of the two
manifold rotation matrices.  On the real state vector that conjugation acts
as a real matrix T, assembled here in closed form from products of reduced
rotation elements; having T explicitly turns covariance of the equations of
motion into a handful of matrix residuals instead of a statement about
trajectories.

Component conventions: the stored drive components (the ones paired with the
lowering coupling, ordered q = +1, 0, -1) mix through the transposed spin-1
rotation matrix, the absorption vector through its conjugate transpose, and
plain geometric vectors (propagation direction, velocity, force) pick up the
transposed Cartesian rotation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .angular import half_int_range, wigner_D, wigner_small_d
from .field_config import FieldSet, PlaneWave

__all__ = [
    "EulerAngles",
    "manifold_rotation",
    "spin1_rotation",
    "cartesian_rotation",
    "state_rotation_matrix",
    "rotate_field",
    "rotate_absorption",
    "rotate_vector",
]

LEVELS = ("e", "g")


@dataclass(frozen=True)
class EulerAngles:
    """z-y-z Euler angles (radians) taking the frame S to the rotated frame."""

    alpha: float
    beta: float
    gamma: float

    @property
    def inverse(self):
        return EulerAngles(-self.gamma, -self.beta, -self.alpha)

    @classmethod
    def random(cls, rng):
        """Angles of a rotation drawn uniformly over orientations."""
        return cls(
            alpha=float(rng.uniform(0.0, 2.0 * math.pi)),
            beta=float(np.arccos(rng.uniform(-1.0, 1.0))),
            gamma=float(rng.uniform(0.0, 2.0 * math.pi)),
        )


def manifold_rotation(layout, angles):
    """Block-diagonal unitary D rotating the level basis, in rho index order.

    The density matrix seen from the rotated frame is D^dagger rho D.
    """
    tr = layout.transition
    n = layout.n_j
    d = np.zeros((n, n), dtype=complex)
    for level in LEVELS:
        j = tr.j_of(level)
        for m in half_int_range(-j, j):
            for mp in half_int_range(-j, j):
                d[layout.rho_index(level, m), layout.rho_index(level, mp)] = wigner_D(
                    j, m, mp, angles.alpha, angles.beta, angles.gamma)
    return d


def spin1_rotation(angles):
    """Spin-1 rotation matrix on spherical components ordered (+1, 0, -1)."""
    qs = (1, 0, -1)
    return np.array([
        [wigner_D(1, a, b, angles.alpha, angles.beta, angles.gamma) for b in qs]
        for a in qs
    ])


def cartesian_rotation(angles):
    """The 3x3 rotation Rz(alpha) Ry(beta) Rz(gamma) on Cartesian vectors."""

    def rz(a):
        c, s = math.cos(a), math.sin(a)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    def ry(b):
        c, s = math.cos(b), math.sin(b)
        return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])

    return rz(angles.alpha) @ ry(angles.beta) @ rz(angles.gamma)


def rotate_vector(vec, angles):
    """Components of a fixed Cartesian vector as seen from the rotated frame."""
    return cartesian_rotation(angles).T @ np.asarray(vec, dtype=float)


def rotate_absorption(chi, angles):
    """Absorption components (+1, 0, -1) as seen from the rotated frame."""
    return spin1_rotation(angles).conj().T @ np.asarray(chi)


def rotate_field(fieldset, angles):
    """The same physical drive with its geometry re-expressed in the rotated frame.

    Detunings, amplitudes and relative phases are scalars and stay put; the
    polarization components rotate with the transposed spin-1 matrix and the
    propagation directions with the transposed Cartesian rotation.
    """
    d1t = spin1_rotation(angles).T
    rt = cartesian_rotation(angles).T
    waves = tuple(
        PlaneWave(w.rabi, w.detuning, rt @ w.k_dir, w.k_mag, d1t @ w.pol)
        for w in fieldset.waves
    )
    return FieldSet.build(waves, fieldset.kappa, fieldset.tol, fieldset.max_denominator)


def _d_table(j, beta):
    ms = half_int_range(-j, j)
    table = {
        (a.twice, b.twice): wigner_small_d(j, a, b, beta) for a in ms for b in ms
    }
    return lambda a, b: table[(a.twice, b.twice)]


def state_rotation_matrix(layout, angles):
    """Real matrix T mapping the state vector into the rotated frame.

    T is the closed-form image of the conjugation D^dagger rho D on the
    packed vector: pack(D^dagger unpack(x) D) = T x for every real x.  The
    reduced rotation elements enter in products of two, one per manifold
    index, and the alpha/gamma phases appear as 2x2 rotation-like blocks on
    each (real, imaginary) coherence pair.  Population rows carry the extra
    terms that restore the ground population eliminated by the trace.
    """
    tr = layout.transition
    al, ga = angles.alpha, angles.gamma
    jg = tr.j_g
    d_g = _d_table(tr.j_g, angles.beta)
    d_e = _d_table(tr.j_e, angles.beta)
    t = np.zeros((layout.dim_x, layout.dim_x))

    # optical-optical: amp * [[cos, sin], [-sin, cos]] on each (u, v) pair
    for dm_r, m_r in layout.optical_pairs():
        i = layout.o_u(dm_r, m_r)
        for dm_c, m_c in layout.optical_pairs():
            j = layout.o_u(dm_c, m_c)
            amp = d_g(m_c, m_r) * d_e(m_c + dm_c, m_r + dm_r)
            ang = dm_c * al + dm_r * ga
            c, s = math.cos(ang), math.sin(ang)
            t[i, j] = amp * c
            t[i, j + 1] = amp * s
            t[i + 1, j] = -amp * s
            t[i + 1, j + 1] = amp * c

    # population-population
    for lv_r in LEVELS:
        for m_r in layout.pop_ms[lv_r]:
            i = layout.pop_x(lv_r, m_r)
            for lv_c in LEVELS:
                for m_c in layout.pop_ms[lv_c]:
                    j = layout.pop_x(lv_c, m_c)
                    if lv_r == "e":
                        val = d_e(m_c, m_r) ** 2 if lv_c == "e" else 0.0
                    elif lv_c == "e":
                        val = -d_g(-jg, m_r) ** 2
                    else:
                        val = d_g(m_c, m_r) ** 2 - d_g(-jg, m_r) ** 2
                    t[i, j] = val

    # Zeeman-population: amp * (cos, -sin) of the row coherence step
    for lv_r in LEVELS:
        for dm_r, m_r in layout.zeeman_pairs(lv_r):
            i = layout.z_u_x(lv_r, dm_r, m_r)
            cr, sr = math.cos(dm_r * ga), math.sin(dm_r * ga)
            for lv_c in LEVELS:
                for m_c in layout.pop_ms[lv_c]:
                    j = layout.pop_x(lv_c, m_c)
                    if lv_r == "e":
                        amp = d_e(m_c, m_r) * d_e(m_c, m_r + dm_r) if lv_c == "e" else 0.0
                    elif lv_c == "e":
                        amp = -d_g(-jg, m_r) * d_g(-jg, m_r + dm_r)
                    else:
                        amp = (d_g(m_c, m_r) * d_g(m_c, m_r + dm_r)
                               - d_g(-jg, m_r) * d_g(-jg, m_r + dm_r))
                    t[i, j] = amp * cr
                    t[i + 1, j] = -amp * sr

    # population-Zeeman: amp * (cos, sin) of the column coherence step
    for level in LEVELS:
        d_k = d_e if level == "e" else d_g
        for m_r in layout.pop_ms[level]:
            i = layout.pop_x(level, m_r)
            for dm_c, m_c in layout.zeeman_pairs(level):
                j = layout.z_u_x(level, dm_c, m_c)
                amp = 2.0 * d_k(m_c, m_r) * d_k(m_c + dm_c, m_r)
                t[i, j] = amp * math.cos(dm_c * al)
                t[i, j + 1] = amp * math.sin(dm_c * al)

    # Zeeman-Zeeman: two terms, one rotation-like and one reflection-like
    for level in LEVELS:
        d_k = d_e if level == "e" else d_g
        for dm_r, m_r in layout.zeeman_pairs(level):
            i = layout.z_u_x(level, dm_r, m_r)
            for dm_c, m_c in layout.zeeman_pairs(level):
                j = layout.z_u_x(level, dm_c, m_c)
                tp = d_k(m_c, m_r) * d_k(m_c + dm_c, m_r + dm_r)
                tm = d_k(m_c + dm_c, m_r) * d_k(m_c, m_r + dm_r)
                cp, sp = math.cos(dm_c * al + dm_r * ga), math.sin(dm_c * al + dm_r * ga)
                cm, sm = math.cos(dm_c * al - dm_r * ga), math.sin(dm_c * al - dm_r * ga)
                t[i, j] = tp * cp + tm * cm
                t[i, j + 1] = tp * sp + tm * sm
                t[i + 1, j] = -tp * sp + tm * sm
                t[i + 1, j + 1] = tp * cp - tm * cm
    return t
