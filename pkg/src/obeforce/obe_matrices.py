"""Coefficient matrices of the optical Bloch equations in the real layout.

The equations of motion take the affine form

    dx/dt = A(t) x + b,      A(t) = -A0 + sum_q Im(Omega_q(t) C[q]),

written in units of the decay rate (gamma = 1): A0 carries relaxation and the
reference detuning, the three coupling matrices C[q] (one per spherical field
component q = +1, 0, -1) carry the Clebsch-Gordan structure of the transition,
and the constant source b restores the trace removed from the population
block.  The C[q] are complex; contraction with the complex Rabi components
through Im(.) produces the real generator acting on the interleaved (u, v)
pairs.

Second-order products C_xixi[(q, q')] = -C_xio[q] conj(C_oxi[q']) drive the
internal-state sector once the optical coherences are eliminated; they are
built here both directly from the rectangular factors and from closed-form
per-element expressions (``closed_form_c_xixi``), the latter existing purely
to cross-validate the former.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .state_layout import LEVELS

__all__ = [
    "build_A0",
    "build_A_xixi",
    "build_u_xi",
    "build_b",
    "build_C_oxi",
    "build_C_xio",
    "build_Cq",
    "build_C_xixi",
    "closed_form_c_xixi",
    "ObeMatrices",
    "assemble_A",
]


def _nk(level):
    # n = 1 on the excited manifold, 0 on the ground; nt = 2n - 1
    n = 1 if level == "e" else 0
    return n, 2 * n - 1


def _dm_span(layout):
    tr = layout.transition
    return (tr.j_e.twice + tr.j_g.twice) // 2


def _o_block_ms(layout, dm):
    for bdm, ms in layout.o_blocks:
        if bdm == dm:
            return ms
    return ()


def build_A0(layout, deltabar=0.0):
    """Relaxation and reference-detuning matrix (the -A0 part of A(t))."""
    a0 = np.zeros((layout.dim_x, layout.dim_x))
    for p in range(layout.dim_o // 2):
        i = 2 * p
        a0[i, i] = a0[i + 1, i + 1] = 0.5
        a0[i, i + 1] = -deltabar
        a0[i + 1, i] = deltabar
    a0[layout.dim_o:, layout.dim_o:] = build_A_xixi(layout)
    return a0


def build_A_xixi(layout):
    """Internal-state relaxation block: decay feeding populations and
    Zeeman coherences of the ground manifold from the excited one."""
    tr = layout.transition
    a = np.zeros((layout.dim_xi, layout.dim_xi))
    for m in layout.pop_ms["e"]:
        i = layout.pop_xi("e", m)
        a[i, i] = 1.0
    for mg in layout.pop_ms["g"]:
        for me in layout.pop_ms["e"]:
            q = me - mg
            if not q.is_integer or abs(q.twice) > 2:
                continue
            a[layout.pop_xi("g", mg), layout.pop_xi("e", me)] = -tr.cg(mg, int(q)) ** 2
    for dm, me in layout.zeeman_pairs("e"):
        i = layout.z_u_xi("e", dm, me)
        a[i, i] = a[i + 1, i + 1] = 1.0
    for dm, mg in layout.zeeman_pairs("g"):
        for dme, me in layout.zeeman_pairs("e"):
            if dme != dm:
                continue
            q = me - mg
            if not q.is_integer or abs(q.twice) > 2:
                continue
            val = -tr.cg(mg, int(q)) * tr.cg(mg + dm, int(q))
            if val:
                i = layout.z_u_xi("g", dm, mg)
                k = layout.z_u_xi("e", dm, me)
                a[i, k] = a[i + 1, k + 1] = val
    return a


def build_u_xi(layout):
    """Indicator vector of the excited populations (sums rho_ee)."""
    u = np.zeros(layout.dim_xi)
    for m in layout.pop_ms["e"]:
        u[layout.pop_xi("e", m)] = 1.0
    return u


def build_b(layout):
    """Constant source restoring the eliminated trace (gamma = 1 units)."""
    b = np.zeros(layout.dim_x)
    b[layout.dim_o:] = -(build_A_xixi(layout) @ build_u_xi(layout)) / layout.n_j
    return b


def _oz_entries(layout, q):
    """Yield (o_pair, z_u_col, eps, value) of the optical<->Zeeman coupling.

    value is the scalar in front of the (1, eps*i) tensor factor; the caller
    expands it onto the (u, v) column or row pair.
    """
    tr = layout.transition
    jg = tr.j_g
    span = _dm_span(layout)
    for level in LEVELS:
        n, nt = _nk(level)
        for dmk, ms_k in layout.z_blocks[level]:
            for eps in (1, -1):
                dm = q + eps * dmk
                if abs(dm) > span:
                    continue
                for m in _o_block_ms(layout, dm):
                    mk = m + n * q - (0 if eps == 1 else dmk)
                    if not layout.has_z(level, dmk, mk):
                        continue
                    cg_m = m + (eps * dmk if level == "g" else 0)
                    val = 0.5 * nt * tr.cg(cg_m, q)
                    if val:
                        yield layout.o_pair(dm, m), layout.z_u_xi(level, dmk, mk), eps, val


def build_C_oxi(layout, q):
    """Rectangular block coupling internal-state variables into the optical
    coherence pairs (rows are coherence pairs, not split into u, v)."""
    tr = layout.transition
    jg = tr.j_g
    c = np.zeros((layout.dim_o // 2, layout.dim_xi), dtype=complex)
    for m in _o_block_ms(layout, q):
        base = tr.cg(m, q)
        if not base:
            continue
        row = layout.o_pair(q, m)
        for level in LEVELS:
            n, nt = _nk(level)
            for mk in layout.pop_ms[level]:
                val = 0.0
                if m == -jg:
                    val += base
                if mk == m + n * q:
                    val += nt * base
                if val:
                    c[row, layout.pop_xi(level, mk)] = 0.5 * val
    for row, col, eps, val in _oz_entries(layout, q):
        c[row, col] += val
        c[row, col + 1] += val * eps * 1j
    return c


def build_C_xio(layout, q):
    """Rectangular block coupling optical coherence pairs back into the
    internal-state variables; the Zeeman part is minus the transpose of the
    corresponding ``build_C_oxi`` part."""
    tr = layout.transition
    c = np.zeros((layout.dim_xi, layout.dim_o // 2), dtype=complex)
    for level in LEVELS:
        n, nt = _nk(level)
        for mk in layout.pop_ms[level]:
            m = mk - n * q
            if not layout.has_o(q, m):
                continue
            val = -nt * tr.cg(m, q)
            if val:
                c[layout.pop_xi(level, mk), layout.o_pair(q, m)] = val
    for row, col, eps, val in _oz_entries(layout, q):
        c[col, row] -= val
        c[col + 1, row] -= val * eps * 1j
    return c


def build_Cq(layout, q):
    """Full coupling matrix C[q] on the complete state vector."""
    co = build_C_oxi(layout, q)
    cx = build_C_xio(layout, q)
    dim_o = layout.dim_o
    c = np.zeros((layout.dim_x, layout.dim_x), dtype=complex)
    c[0:dim_o:2, dim_o:] = co
    c[1:dim_o:2, dim_o:] = -1j * co
    c[dim_o:, 0:dim_o:2] = cx
    c[dim_o:, 1:dim_o:2] = -1j * cx
    return c


def build_C_xixi(layout, q, qp):
    """Second-order internal-state coupling, first index unconjugated."""
    return -build_C_xio(layout, q) @ np.conj(build_C_oxi(layout, qp))


# -- closed-form evaluation of the second-order blocks ----------------------

def _in_o_block(layout, q, m):
    return layout.has_o(q, m)


def closed_form_c_xixi(layout, q, qp):
    """Per-element closed forms of ``build_C_xixi`` (validation only).

    Assembled subblock by subblock from explicit Kronecker-delta expressions
    instead of the rectangular matrix product; the two constructions must
    agree to rounding error.
    """
    tr = layout.transition
    jg = tr.j_g
    cg = tr.cg
    dq = qp - q
    sgn = 1 if dq > 0 else -1
    c = np.zeros((layout.dim_xi, layout.dim_xi), dtype=complex)

    # population x population, diagonal in q
    if q == qp:
        for k in LEVELS:
            n_k, nt_k = _nk(k)
            for m in layout.pop_ms[k]:
                if not _in_o_block(layout, q, m - n_k * q):
                    continue
                base = nt_k * cg(m - n_k * q, q) ** 2
                for l in LEVELS:
                    n_l, nt_l = _nk(l)
                    for mp in layout.pop_ms[l]:
                        val = 0.0
                        if m == -jg + n_k * q:
                            val += base
                        if mp == m + (n_l - n_k) * q:
                            val += nt_l * base
                        if val:
                            c[layout.pop_xi(k, m), layout.pop_xi(l, mp)] += 0.5 * val

    # population x Zeeman and Zeeman x population, |dq| = 1 or 2
    if dq != 0:
        j = abs(dq)
        for k in LEVELS:
            n_k, nt_k = _nk(k)
            for l in LEVELS:
                n_l, nt_l = _nk(l)
                # rows p_k, columns Z_l^(j)
                for m in layout.pop_ms[k]:
                    if not _in_o_block(layout, q, m - n_k * q):
                        continue
                    mp = m + ((nt_l * qp - nt_k * q - j) // 2)
                    if not layout.has_z(l, j, mp):
                        continue
                    val = 0.5 * nt_k * nt_l * cg(m - n_k * q, q) * cg(m - n_k * q + (n_l - 1) * dq, qp)
                    if val:
                        col = layout.z_u_xi(l, j, mp)
                        row = layout.pop_xi(k, m)
                        c[row, col] += val
                        c[row, col + 1] += val * sgn * 1j
                # rows Z_k^(j), columns p_l
                for dmk, m in layout.zeeman_pairs(k):
                    if dmk != j:
                        continue
                    if not _in_o_block(layout, qp, m - n_k * q - (1 - sgn) * dq // 2):
                        continue
                    row = layout.z_u_xi(k, j, m)
                    for mp in layout.pop_ms[l]:
                        val = 0.0
                        if m == -jg + ((qp + nt_k * q - j) // 2):
                            val += nt_k * cg(-jg, qp) * cg(-jg - (n_k - 1) * dq, q)
                        if mp == m + ((nt_l * qp - nt_k * q + j) // 2):
                            val += nt_k * nt_l * cg(mp - n_l * qp, qp) * cg(mp - n_l * qp - (n_k - 1) * dq, q)
                        if val:
                            val *= 0.25
                            col = layout.pop_xi(l, mp)
                            c[row, col] += val
                            c[row + 1, col] += val * sgn * 1j

    # Zeeman x Zeeman: two circular parts plus a q' = -q extra term
    span = _dm_span(layout)
    for k in LEVELS:
        n_k, nt_k = _nk(k)
        j_k = tr.j_of(k)
        for l in LEVELS:
            n_l, nt_l = _nk(l)
            for eps in (1, -1):
                for dm, m in layout.zeeman_pairs(k):
                    # intermediate optical block q + eps*dm must exist
                    if dm + eps * q > span:
                        continue
                    dml = dm - eps * dq
                    mu = m + ((nt_l * qp - nt_k * q + eps * dq) // 2)
                    if not layout.has_z(l, dml, mu):
                        continue
                    c1 = cg(m - ((1 + nt_k) * q - (1 - eps * nt_k) * dm) // 2, q)
                    c2 = cg(m + ((1 - eps * nt_l) * dm - (nt_k * q - nt_l * dq + qp)) // 2, qp)
                    val = 0.25 * nt_k * nt_l * c1 * c2
                    if not val:
                        continue
                    row = layout.z_u_xi(k, dm, m)
                    col = layout.z_u_xi(l, dml, mu)
                    c[row, col] += val
                    c[row, col + 1] += -eps * 1j * val
                    c[row + 1, col] += eps * 1j * val
                    c[row + 1, col + 1] += val
            if qp == -q and q != 0:
                for dmk, m in layout.zeeman_pairs(k):
                    if dmk != 1:
                        continue
                    mp = m - (nt_k + nt_l) * q // 2
                    if not layout.has_z(l, 1, mp):
                        continue
                    val = 0.25 * nt_k * nt_l * cg(m + (1 - q) // 2, q) * cg(mp + (1 + q) // 2, -q)
                    if not val:
                        continue
                    row = layout.z_u_xi(k, 1, m)
                    col = layout.z_u_xi(l, 1, mp)
                    c[row, col] += val
                    c[row, col + 1] += -q * 1j * val
                    c[row + 1, col] += -q * 1j * val
                    c[row + 1, col + 1] += -val
    return c


@dataclass
class ObeMatrices:
    """All time-independent matrices for one transition and reference detuning."""

    layout: object
    deltabar: float
    a0: np.ndarray
    a_xixi: np.ndarray
    cq: dict
    c_oxi: dict
    c_xio: dict
    c_xixi: dict
    b: np.ndarray
    u_xi: np.ndarray

    @classmethod
    def build(cls, layout, deltabar=0.0):
        c_oxi = {q: build_C_oxi(layout, q) for q in (1, 0, -1)}
        c_xio = {q: build_C_xio(layout, q) for q in (1, 0, -1)}
        c_xixi = {
            (q, qp): -c_xio[q] @ np.conj(c_oxi[qp])
            for q in (1, 0, -1)
            for qp in (1, 0, -1)
        }
        return cls(
            layout=layout,
            deltabar=float(deltabar),
            a0=build_A0(layout, deltabar),
            a_xixi=build_A_xixi(layout),
            cq={q: build_Cq(layout, q) for q in (1, 0, -1)},
            c_oxi=c_oxi,
            c_xio=c_xio,
            c_xixi=c_xixi,
            b=build_b(layout),
            u_xi=build_u_xi(layout),
        )

    def with_deltabar(self, deltabar):
        """Copy with the reference detuning replaced (only A0 changes)."""
        if deltabar == self.deltabar:
            return self
        return ObeMatrices(
            layout=self.layout,
            deltabar=float(deltabar),
            a0=build_A0(self.layout, deltabar),
            a_xixi=self.a_xixi,
            cq=self.cq,
            c_oxi=self.c_oxi,
            c_xio=self.c_xio,
            c_xixi=self.c_xixi,
            b=self.b,
            u_xi=self.u_xi,
        )


def assemble_A(matrices, omega_q):
    """Real generator A for given instantaneous Rabi components (q = +1, 0, -1)."""
    a = -matrices.a0.copy()
    for qi, q in enumerate((1, 0, -1)):
        w = omega_q[qi]
        if w != 0.0:
            a += (w * matrices.cq[q]).imag
    return a
