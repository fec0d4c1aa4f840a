"""Plane-wave drive configurations.

A drive is a set of plane waves, each carrying a complex Rabi amplitude (in
units of the decay rate), a detuning, a propagation direction and a spherical
polarization vector (components ordered q = +1, 0, -1).  The weighted mean
detuning defines the rotating frame; the offsets from it must share a common
divisor omega_c for the drive to be time-periodic, in which case each wave
sits on an integer harmonic m_j of omega_c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import IncommensurableFrequencies

__all__ = [
    "POL_TOKENS",
    "elliptical_pol",
    "PlaneWave",
    "FieldSet",
    "analyze_commensurability",
    "doppler_shift",
]

# spherical unit polarizations, components (eps_+1, eps_0, eps_-1)
POL_TOKENS = {
    "sigma+": (1.0, 0.0, 0.0),
    "pi": (0.0, 1.0, 0.0),
    "sigma-": (0.0, 0.0, 1.0),
}

_Q_INDEX = {1: 0, 0: 1, -1: 2}


def elliptical_pol(theta, phi):
    """cos(theta/2) sigma+ + e^{i phi} sin(theta/2) sigma- (no pi component)."""
    return (math.cos(theta / 2), 0.0, math.sin(theta / 2) * np.exp(1j * phi))


@dataclass(frozen=True, eq=False)
class PlaneWave:
    """One plane wave: complex Rabi amplitude, detuning, geometry, polarization.

    ``rabi`` absorbs the field amplitude, the reduced dipole element and any
    fixed phase (including the spatial phase at the atom's reference position)
    into a single complex number in units of the decay rate.  ``k_mag`` only
    scales the momentum-kick output and defaults to 1.
    """

    rabi: complex
    detuning: float
    k_dir: np.ndarray = None
    k_mag: float = 1.0
    pol: np.ndarray = "pi"

    def __post_init__(self):
        object.__setattr__(self, "rabi", complex(self.rabi))
        object.__setattr__(self, "detuning", float(self.detuning))
        k = np.array([0.0, 0.0, 1.0]) if self.k_dir is None else np.asarray(self.k_dir, dtype=float)
        if k.shape != (3,):
            raise ValueError("k_dir must be a 3-vector")
        norm = np.linalg.norm(k)
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"k_dir must be a unit vector, |k_dir| = {norm}")
        object.__setattr__(self, "k_dir", k / norm)
        if self.k_mag <= 0:
            raise ValueError("k_mag must be positive")
        pol = self.pol
        if isinstance(pol, str):
            try:
                pol = POL_TOKENS[pol]
            except KeyError:
                raise ValueError(f"unknown polarization token {pol!r}") from None
        pol = np.asarray(pol, dtype=complex)
        if pol.shape != (3,):
            raise ValueError("pol must be a spherical 3-vector (q = +1, 0, -1)")
        norm2 = float(np.sum(np.abs(pol) ** 2))
        if abs(norm2 - 1.0) > 1e-6:
            raise ValueError(f"polarization not normalized: sum |eps_q|^2 = {norm2}")
        object.__setattr__(self, "pol", pol / math.sqrt(norm2))

    def pol_component(self, q):
        return self.pol[_Q_INDEX[q]]

    def with_detuning(self, detuning):
        return PlaneWave(self.rabi, detuning, self.k_dir, self.k_mag, self.pol)


def analyze_commensurability(detunings, kappa, tol=1e-9, max_denominator=64):
    """Common harmonic structure of the detuning offsets from the mean.

    Returns (deltabar, omega_c, m) with every detuning equal to
    deltabar + m_j * omega_c within tol and gcd over nonzero |m_j| equal to 1.
    The all-equal case returns omega_c = 0 and m_j = 0: the drive is then
    stationary in the rotating frame.
    """
    detunings = [float(d) for d in detunings]
    kappa = [float(k) for k in kappa]
    if len(detunings) != len(kappa) or not detunings:
        raise ValueError("need one weight per wave")
    if any(k < 0 for k in kappa) or abs(sum(kappa) - 1.0) > 1e-12:
        raise ValueError("weights must be nonnegative and sum to 1")
    deltabar = sum(k * d for k, d in zip(kappa, detunings))
    offsets = [d - deltabar for d in detunings]
    if all(abs(o) <= tol for o in offsets):
        return deltabar, 0.0, tuple(0 for _ in offsets)

    ref = max(offsets, key=abs)
    fracs = []
    for o in offsets:
        f = Fraction(o / ref).limit_denominator(max_denominator)
        if abs(o - float(f) * ref) > tol:
            raise IncommensurableFrequencies(
                f"offset {o} is not a rational multiple (<= {max_denominator}ths)"
                f" of {ref} within {tol}"
            )
        fracs.append(f)
    den = math.lcm(*(f.denominator for f in fracs))
    ints = [f.numerator * (den // f.denominator) for f in fracs]
    g = math.gcd(*(abs(i) for i in ints))
    omega_c = ref * g / den
    m = tuple(i // g for i in ints)
    if omega_c < 0:
        omega_c = -omega_c
        m = tuple(-i for i in m)
    for o, mj in zip(offsets, m):
        if abs(o - mj * omega_c) > tol:
            raise IncommensurableFrequencies(
                f"offset {o} does not sit on the harmonic grid {omega_c}"
            )
    return deltabar, omega_c, m


@dataclass(frozen=True, eq=False)
class FieldSet:
    """A commensurate set of plane waves in the mean-detuning rotating frame."""

    waves: tuple
    kappa: tuple
    deltabar: float
    omega_c: float
    m: tuple
    tol: float = 1e-9
    max_denominator: int = 64

    @classmethod
    def build(cls, waves, kappa=None, tol=1e-9, max_denominator=64):
        waves = tuple(waves)
        if not waves:
            raise ValueError("need at least one wave")
        if kappa is None:
            kappa = (1.0 / len(waves),) * len(waves)
        kappa = tuple(float(k) for k in kappa)
        deltabar, omega_c, m = analyze_commensurability(
            [w.detuning for w in waves], kappa, tol, max_denominator)
        return cls(waves, kappa, deltabar, omega_c, m, tol, max_denominator)

    @property
    def n_waves(self):
        return len(self.waves)

    @property
    def stationary(self):
        return self.omega_c == 0.0

    @property
    def period(self):
        if self.stationary:
            raise ValueError("stationary drive has no finite period")
        return 2.0 * math.pi / self.omega_c

    @property
    def m0(self):
        """Distinct nonzero harmonic differences m_l - m_j."""
        diffs = {ml - mj for ml in self.m for mj in self.m} - {0}
        return tuple(sorted(diffs))

    @property
    def n_s(self):
        """Two-tone harmonic gap n1 + n2 (only defined for two waves)."""
        if self.n_waves != 2 or self.stationary:
            raise ValueError("n_s is defined for a non-stationary two-wave set")
        return abs(self.m[0] - self.m[1])

    def detuning_of(self, j):
        """delta_j = deltabar + m_j omega_c (the commensurate grid value)."""
        return self.deltabar + self.m[j] * self.omega_c

    def rabi_component(self, j, q):
        """Omega_{j,q} = Omega_j eps_{j,q}."""
        return self.waves[j].rabi * self.waves[j].pol_component(q)

    def omega_q(self, t):
        """Instantaneous complex Rabi components, ordered (q = +1, 0, -1)."""
        out = np.zeros(3, dtype=complex)
        for j, w in enumerate(self.waves):
            phase = np.exp(1j * self.m[j] * self.omega_c * t) if self.m[j] else 1.0
            out += w.rabi * phase * w.pol
        return out


def doppler_shift(fieldset, velocity):
    """The drive seen by an atom moving at ``velocity`` (units Gamma/k_mag):
    each detuning picks up -k_j . v; commensurability is re-analyzed."""
    v = np.asarray(velocity, dtype=float)
    if v.shape != (3,):
        raise ValueError("velocity must be a 3-vector")
    waves = tuple(
        w.with_detuning(w.detuning - w.k_mag * float(np.dot(w.k_dir, v)))
        for w in fieldset.waves
    )
    return FieldSet.build(waves, fieldset.kappa, fieldset.tol, fieldset.max_denominator)
