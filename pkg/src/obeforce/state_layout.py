"""Real state-vector layout for a two-manifold atom.

The density matrix of a (J_g, J_e) pair is flattened to a real vector

    x = (x_o, x_p, x_Z)

with optical coherences first (interleaved real/imaginary pairs, grouped by
the coherence step dm = m_e - m_g), then populations (excited manifold
complete, ground manifold with m = -J_g removed through the trace), then
Zeeman coherences of each manifold (excited before ground, grouped by dm > 0,
again as interleaved pairs).  Populations are stored as offsets from the
maximally mixed state, w = rho_mm - 1/N, so the field-free equations are
homogeneous in x up to a constant source.

Optical pairs store u = Re(rho_ge exp(-i wbar t)), v = Im(...) in the frame
rotating at the reference frequency; ``pack``/``unpack`` expect density
matrices already expressed in that frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .angular import HalfInt, cg_transition, half_int_range

__all__ = [
    "AtomicTransition",
    "StateLayout",
    "build_layout",
    "pack",
    "unpack",
    "maximally_mixed",
]

LEVELS = ("e", "g")


@dataclass(frozen=True)
class AtomicTransition:
    """A ground manifold J_g coupled to an excited manifold J_e.

    gamma is the excited-state decay rate and fixes the unit system: all
    detunings, Rabi frequencies and rates elsewhere are in units of gamma.
    ``two_level_override`` turns the (dipole-forbidden) J_g = J_e = 0 pair
    into a textbook two-level atom by forcing the q = 0 coupling to 1.
    """

    j_g: HalfInt
    j_e: HalfInt
    gamma: float = 1.0
    two_level_override: bool = False

    def __post_init__(self):
        object.__setattr__(self, "j_g", HalfInt(self.j_g))
        object.__setattr__(self, "j_e", HalfInt(self.j_e))
        if self.j_g.twice < 0 or self.j_e.twice < 0:
            raise ValueError("angular momenta must be nonnegative")
        if self.delta_j not in (-1, 0, 1):
            raise ValueError(f"dipole transition needs |J_e - J_g| <= 1, got {self.j_g} -> {self.j_e}")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.two_level_override and (self.j_g.twice or self.j_e.twice):
            raise ValueError("two-level override is only defined for J_g = J_e = 0")
        if not self.two_level_override and self.j_g.twice == 0 and self.j_e.twice == 0:
            raise ValueError("J = 0 -> 0 carries no dipole coupling; use two_level_override")

    @property
    def delta_j(self):
        d = self.j_e - self.j_g
        return d.twice // 2 if d.twice % 2 == 0 else None

    @property
    def n_levels(self):
        return (self.j_e.twice + 1) + (self.j_g.twice + 1)

    def j_of(self, level):
        return self.j_e if level == "e" else self.j_g

    def cg(self, m, q):
        """Coupling coefficient of the |g, m> <-> |e, m+q> line."""
        return cg_transition(self.j_g, self.j_e, m, q, self.two_level_override)


@dataclass(frozen=True)
class StateLayout:
    """Index bookkeeping between density-matrix entries and the real vector."""

    transition: AtomicTransition
    o_blocks: tuple = field(repr=False)       # ((dm, (m, ...)), ...)
    pop_ms: dict = field(repr=False)          # level -> (m, ...)
    z_blocks: dict = field(repr=False)        # level -> ((dm, (m, ...)), ...)
    dim_o: int = 0
    dim_p: int = 0
    dim_z: int = 0
    _o_pair: dict = field(default_factory=dict, repr=False)
    _p_idx: dict = field(default_factory=dict, repr=False)
    _z_pair: dict = field(default_factory=dict, repr=False)
    _rho_idx: dict = field(default_factory=dict, repr=False)

    @property
    def n_j(self):
        return self.transition.n_levels

    @property
    def dim_xi(self):
        return self.dim_p + self.dim_z

    @property
    def dim_x(self):
        return self.dim_o + self.dim_p + self.dim_z

    # -- optical pairs ----------------------------------------------------
    def o_pair(self, dm, m):
        """Sequential pair number of the (dm, m) optical coherence."""
        return self._o_pair[(int(dm), HalfInt(m).twice)]

    def o_u(self, dm, m):
        """x-index of u for the (dm, m) optical coherence (v is +1)."""
        return 2 * self.o_pair(dm, m)

    def has_o(self, dm, m):
        return (int(dm), HalfInt(m).twice) in self._o_pair

    def optical_pairs(self):
        """All (dm, m) in storage order."""
        return [(dm, m) for dm, ms in self.o_blocks for m in ms]

    # -- populations and Zeeman coherences (xi-local indices) -------------
    def pop_xi(self, level, m):
        return self._p_idx[(level, HalfInt(m).twice)]

    def has_pop(self, level, m):
        return (level, HalfInt(m).twice) in self._p_idx

    def z_u_xi(self, level, dm, m):
        """xi-local index of u for the (level, dm, m) Zeeman coherence."""
        return self._z_pair[(level, int(dm), HalfInt(m).twice)]

    def has_z(self, level, dm, m):
        return (level, int(dm), HalfInt(m).twice) in self._z_pair

    def zeeman_pairs(self, level):
        return [(dm, m) for dm, ms in self.z_blocks[level] for m in ms]

    def pop_x(self, level, m):
        return self.dim_o + self.pop_xi(level, m)

    def z_u_x(self, level, dm, m):
        return self.dim_o + self.z_u_xi(level, dm, m)

    # -- density-matrix indices (excited manifold first) -------------------
    def rho_index(self, level, m):
        return self._rho_idx[(level, HalfInt(m).twice)]


def build_layout(transition):
    """Construct the ordered index maps for a transition."""
    j_g, j_e = transition.j_g, transition.j_e
    dj = transition.delta_j

    o_blocks = []
    o_pair = {}
    pair = 0
    for dm in range(-(j_e.twice + j_g.twice) // 2, (j_e.twice + j_g.twice) // 2 + 1):
        hi = min(j_g.twice, j_e.twice - 2 * dm)
        lo = -min(j_g.twice, j_e.twice + 2 * dm)
        ms = [HalfInt.from_twice(t) for t in range(lo, hi + 1, 2)]
        if not ms:
            continue
        o_blocks.append((dm, tuple(ms)))
        for m in ms:
            o_pair[(dm, m.twice)] = pair
            pair += 1
    dim_o = 2 * pair
    assert dim_o == 2 * (j_g.twice + 1) * (j_e.twice + 1)

    pop_ms = {}
    p_idx = {}
    offset = 0
    for level in LEVELS:
        j = transition.j_of(level)
        lo = -j.twice + (2 if level == "g" else 0)
        ms = [HalfInt.from_twice(t) for t in range(lo, j.twice + 1, 2)]
        pop_ms[level] = tuple(ms)
        for m in ms:
            p_idx[(level, m.twice)] = offset
            offset += 1
    dim_p = offset
    assert dim_p == transition.n_levels - 1

    z_blocks = {}
    z_pair = {}
    for level in LEVELS:
        j = transition.j_of(level)
        blocks = []
        for dm in range(1, j.twice + 1):
            ms = [HalfInt.from_twice(t) for t in range(-j.twice, j.twice - 2 * dm + 1, 2)]
            blocks.append((dm, tuple(ms)))
            for m in ms:
                z_pair[(level, dm, m.twice)] = offset
                offset += 2
        z_blocks[level] = tuple(blocks)
    dim_z = offset - dim_p
    # dim of each Zeeman block family is 2 J (2J + 1) = t (t + 1) with t = 2J
    assert dim_z == j_e.twice * (j_e.twice + 1) + j_g.twice * (j_g.twice + 1)

    rho_idx = {}
    k = 0
    for level in LEVELS:
        for m in half_int_range(-transition.j_of(level), transition.j_of(level)):
            rho_idx[(level, m.twice)] = k
            k += 1

    layout = StateLayout(
        transition=transition,
        o_blocks=tuple(o_blocks),
        pop_ms=pop_ms,
        z_blocks=z_blocks,
        dim_o=dim_o,
        dim_p=dim_p,
        dim_z=dim_z,
        _o_pair=o_pair,
        _p_idx=p_idx,
        _z_pair=z_pair,
        _rho_idx=rho_idx,
    )
    n = transition.n_levels
    assert layout.dim_x == n * n - 1
    assert dj is not None
    return layout


def pack(rho, layout, tol=1e-10):
    """Flatten a rotating-frame density matrix into the real vector x.

    Validates hermiticity and unit trace to ``tol``.
    """
    rho = np.asarray(rho, dtype=complex)
    n = layout.n_j
    if rho.shape != (n, n):
        raise ValueError(f"density matrix must be {n}x{n}, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian within tolerance")
    if abs(np.trace(rho).real - 1.0) > tol or abs(np.trace(rho).imag) > tol:
        raise ValueError("density matrix trace differs from 1")

    tr = layout.transition
    x = np.zeros(layout.dim_x)
    for dm, m in layout.optical_pairs():
        val = rho[layout.rho_index("g", m), layout.rho_index("e", m + dm)]
        i = layout.o_u(dm, m)
        x[i] = val.real
        x[i + 1] = val.imag
    inv_n = 1.0 / layout.n_j
    for level in LEVELS:
        for m in layout.pop_ms[level]:
            k = layout.rho_index(level, m)
            x[layout.pop_x(level, m)] = rho[k, k].real - inv_n
    for level in LEVELS:
        for dm, m in layout.zeeman_pairs(level):
            val = rho[layout.rho_index(level, m), layout.rho_index(level, m + dm)]
            i = layout.z_u_x(level, dm, m)
            x[i] = val.real
            x[i + 1] = val.imag
    return x


def unpack(x, layout):
    """Rebuild the density matrix from x (inverse of ``pack``).

    For a real x the result is Hermitian with unit trace; the removed ground
    population w(g, -J_g) is restored from the trace constraint.  Complex
    input (a Fourier component of x) is accepted and produces the matching
    component of rho, which is not Hermitian on its own.
    """
    x = np.asarray(x)
    if x.shape != (layout.dim_x,):
        raise ValueError(f"state vector must have length {layout.dim_x}")
    n = layout.n_j
    rho = np.zeros((n, n), dtype=complex)

    inv_n = 1.0 / n
    w_sum = 0.0
    for level in LEVELS:
        for m in layout.pop_ms[level]:
            w = x[layout.pop_x(level, m)]
            w_sum += w
            k = layout.rho_index(level, m)
            rho[k, k] = w + inv_n
    k0 = layout.rho_index("g", -layout.transition.j_g)
    rho[k0, k0] = -w_sum + inv_n

    for dm, m in layout.optical_pairs():
        i = layout.o_u(dm, m)
        val = x[i] + 1j * x[i + 1]
        rho[layout.rho_index("g", m), layout.rho_index("e", m + dm)] = val
        rho[layout.rho_index("e", m + dm), layout.rho_index("g", m)] = np.conj(val)
    for level in LEVELS:
        for dm, m in layout.zeeman_pairs(level):
            i = layout.z_u_x(level, dm, m)
            val = x[i] + 1j * x[i + 1]
            rho[layout.rho_index(level, m), layout.rho_index(level, m + dm)] = val
            rho[layout.rho_index(level, m + dm), layout.rho_index(level, m)] = np.conj(val)
    return rho


def maximally_mixed(layout):
    """The x vector of the maximally mixed state (all components zero)."""
    return np.zeros(layout.dim_x)
