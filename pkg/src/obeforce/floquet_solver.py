"""Periodic steady state of the driven system by harmonic balance.

With a commensurate drive the generator is periodic and the steady state has
a discrete spectrum: eliminating the optical coherences harmonic by harmonic
leaves a block-coupled linear system for the internal-state Fourier vectors,

    x_xi^(n) + sum_{m in M0} W^(n,m) x_xi^(n+m) = d_xi delta_{n,0},

which is truncated, solved sparsely and checked for convergence by doubling
the truncation.  From the solved harmonics come the mapping matrices Q^(n),
the generalized saturation matrices and the absorption-rate components
R_j^(n) that give the mean radiation force of each wave.

Everything is expressed in decay-rate units (gamma = 1): detunings and omega_c
are per gamma, rates come out in gamma, forces in hbar k gamma.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import SingularHarmonicMatrix, TruncationNotConverged
from .state_layout import unpack

__all__ = [
    "SolverOptions",
    "XiView",
    "HarmonicBlocks",
    "q_matrix_for",
    "q_matrices",
    "saturation_matrices",
    "absorption_vector",
    "PeriodicSolution",
    "solve_periodic",
]

_QS = (1, 0, -1)


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-10
    tol_zero: float = 1e-12
    tol_parallel: float = 1e-10
    n_blocks_init: int = 0          # 0 means: derived from max |m_j|
    n_blocks_cap: int = 512
    cond_threshold: float = 1e12
    rate_harmonic_span: int = 3     # store R_j^(n) for |n| <= span * lattice step


class XiView:
    """Internal-state workspace, possibly restricted to a subset of rows.

    The restriction is used for pure-polarization drives where the Zeeman
    sector decouples with trivial solution; the solver then runs on the
    population block only and the result is embedded back with zeros.
    """

    def __init__(self, matrices, idx=None):
        self.matrices = matrices
        self.layout = matrices.layout
        full = np.arange(self.layout.dim_xi)
        self.idx = full if idx is None else np.asarray(idx, dtype=int)
        self.reduced = idx is not None
        sel = np.ix_(self.idx, self.idx)
        self.a_xixi = matrices.a_xixi[sel]
        self.u_xi = matrices.u_xi[self.idx]
        self.c_xixi = {key: val[sel] for key, val in matrices.c_xixi.items()}
        self.dim = len(self.idx)

    @classmethod
    def full(cls, matrices):
        return cls(matrices)

    @classmethod
    def populations(cls, matrices):
        n_pop = matrices.layout.n_j - 1
        return cls(matrices, idx=np.arange(n_pop))

    def embed(self, vec):
        if not self.reduced:
            return vec
        out = np.zeros(self.matrices.layout.dim_xi, dtype=vec.dtype)
        out[self.idx] = vec
        return out


class HarmonicBlocks:
    """Lazy store of the Fourier-space building blocks for one configuration.

    All matrices live in the (possibly restricted) xi view.  Diagonal blocks
    A^(n) + B^(n,0) are LU-factored once and reused for every W^(n,m); a
    condition-number estimate guards against the non-unique-regime case where
    the formalism breaks down.
    """

    def __init__(self, fieldset, matrices, view=None, cond_threshold=1e12):
        if abs(matrices.deltabar - fieldset.deltabar) > 1e-12:
            matrices = matrices.with_deltabar(fieldset.deltabar)
        self.field = fieldset
        self.matrices = matrices
        self.view = view if view is not None else XiView.full(matrices)
        self.cond_threshold = cond_threshold
        self.omega_c = fieldset.omega_c
        self.deltabar = fieldset.deltabar
        self.m = fieldset.m
        self.m0 = fieldset.m0
        # G1[j][l] = sum_{q,q'} Omega_{j,q} Omega*_{l,q'} (C_xixi)^q_{q'}
        # G2[j][l] = sum_{q,q'} Omega_{j,q} Omega*_{l,q'} conj((C_xixi)^{q'}_q)
        n = fieldset.n_waves
        dim = self.view.dim
        self._g1 = np.zeros((n, n, dim, dim), dtype=complex)
        self._g2 = np.zeros((n, n, dim, dim), dtype=complex)
        for j in range(n):
            for l in range(n):
                for q in _QS:
                    wq = fieldset.rabi_component(j, q)
                    if not wq:
                        continue
                    for qp in _QS:
                        ww = wq * np.conj(fieldset.rabi_component(l, qp))
                        if not ww:
                            continue
                        self._g1[j, l] += ww * self.view.c_xixi[(q, qp)]
                        self._g2[j, l] += ww * np.conj(self.view.c_xixi[(qp, q)])
        self._b_cache = {}
        self._lu_cache = {}
        self._w_cache = {}
        self._d_xi = None

    def tau(self, sign, n):
        return 1.0 / (1.0 + 2j * (n * self.omega_c + sign * self.deltabar))

    def a_n(self, n):
        a = self.view.a_xixi.astype(complex)
        if n:
            a = a + (1j * n * self.omega_c) * np.eye(self.view.dim)
        return a

    def b(self, n, m):
        key = (n, m)
        if key not in self._b_cache:
            dim = self.view.dim
            out = np.zeros((dim, dim), dtype=complex)
            mj = self.m
            for j in range(self.field.n_waves):
                for l in range(self.field.n_waves):
                    if mj[l] - mj[j] != m:
                        continue
                    out += self.tau(-1, n - mj[j]) * self._g1[j, l]
                    out += self.tau(+1, n + mj[l]) * self._g2[j, l]
            self._b_cache[key] = out
        return self._b_cache[key]

    def diagonal_lu(self, n):
        """LU factors of A^(n) + B^(n,0), with a singularity guard."""
        if n not in self._lu_cache:
            d = self.a_n(n) + self.b(n, 0)
            cond = np.linalg.cond(d)
            if not np.isfinite(cond) or cond > self.cond_threshold:
                raise SingularHarmonicMatrix(
                    f"harmonic block n={n} is singular (cond ~ {cond:.3g}); "
                    "the periodic regime is not unique")
            self._lu_cache[n] = scipy.linalg.lu_factor(d)
        return self._lu_cache[n]

    def w(self, n, m):
        key = (n, m)
        if key not in self._w_cache:
            self._w_cache[key] = scipy.linalg.lu_solve(self.diagonal_lu(n), self.b(n, m))
        return self._w_cache[key]

    @property
    def d_xi(self):
        if self._d_xi is None:
            rhs = self.view.a_xixi @ self.view.u_xi
            self._d_xi = -scipy.linalg.lu_solve(self.diagonal_lu(0), rhs.astype(complex)) \
                / self.view.layout.n_j
        return self._d_xi

    def s_tilde_j(self, j):
        acc = np.zeros((self.view.dim, self.view.dim), dtype=complex)
        for l in range(self.field.n_waves):
            if self.m[l] == self.m[j]:
                acc += self._g1[j, l]
        delta_j = self.field.detuning_of(j)
        return (acc / (0.5 - 1j * delta_j)).real

    @property
    def s_tilde(self):
        return sum(self.s_tilde_j(j) for j in range(self.field.n_waves))


def q_matrix_for(x0, xn, tol_zero=1e-12, tol_parallel=1e-10):
    """Matrix mapping x0 onto xn: zero, scalar multiple, or scaled Householder."""
    n0 = np.linalg.norm(x0)
    nn = np.linalg.norm(xn)
    dim = len(x0)
    if nn < tol_zero * n0:
        return np.zeros((dim, dim), dtype=complex)
    dot = np.vdot(x0, xn)
    phi = cmath.phase(dot) if dot else 0.0
    if np.linalg.norm(xn / nn - np.exp(1j * phi) * x0 / n0) < tol_parallel:
        return (np.exp(1j * phi) * nn / n0) * np.eye(dim, dtype=complex)
    z = np.exp(1j * phi) * x0 - (n0 / nn) * xn
    v = np.eye(dim, dtype=complex) - (2.0 / np.vdot(z, z).real) * np.outer(z, z.conj())
    return (nn / n0) * np.exp(1j * phi) * v


def q_matrices(x_xi, tol_zero=1e-12, tol_parallel=1e-10):
    """Q^(n) for every stored harmonic (Q beyond the stored set is zero)."""
    x0 = x_xi[0]
    return {n: q_matrix_for(x0, xn, tol_zero, tol_parallel) for n, xn in x_xi.items()}


def saturation_matrices(blocks, q_by_n, n_values):
    """Generalized saturation matrices from the Q maps.

    Returns (s_j list, s_jn dict): s_j is the entrywise-real stationary matrix
    of wave j; s_jn[(j, n)] = (sigma_j^(n) + conj(sigma_j^(-n)))/2 enters the
    rate component R_j^(n).
    """
    fieldset = blocks.field
    dim = blocks.view.dim
    mj = blocks.m

    def sigma(j, n):
        acc = np.zeros((dim, dim), dtype=complex)
        for l in range(fieldset.n_waves):
            qn = q_by_n.get(n + mj[l] - mj[j])
            if qn is not None:
                acc += blocks._g1[j, l] @ qn
        return acc / (0.5 + 1j * (n * blocks.omega_c - fieldset.detuning_of(j)))

    s_j = [sigma(j, 0).real for j in range(fieldset.n_waves)]
    s_jn = {}
    for j in range(fieldset.n_waves):
        for n in n_values:
            s_jn[(j, n)] = 0.5 * (sigma(j, n) + np.conj(sigma(j, -n)))
    return s_j, s_jn


def absorption_vector(x_o, layout):
    """Contravariant spherical components (q = +1, 0, -1) of the absorption
    vector: chi^(q) = -sum_m C_m^(q) (u - i v) over the dm = q optical block."""
    chi = np.zeros(3, dtype=complex)
    tr = layout.transition
    for qi, q in enumerate(_QS):
        acc = 0.0 + 0.0j
        for dm, m in layout.optical_pairs():
            if dm != q:
                continue
            i = layout.o_u(dm, m)
            acc += tr.cg(m, q) * (x_o[i] - 1j * x_o[i + 1])
        chi[qi] = -acc
    return chi


@dataclass
class PeriodicSolution:
    """Solved periodic regime: harmonics, Q maps, saturation data and rates."""

    field: object
    layout: object
    options: SolverOptions
    lattice_step: int
    x_xi: dict
    x_o: dict
    q_by_n: dict
    s_j: list
    s_jn: dict
    rates: dict
    rbar: np.ndarray
    mean_force: np.ndarray
    n_blocks: int
    residual: float
    x0_selfcheck: float
    blocks: object = dataclass_field(repr=False, default=None)

    @property
    def harmonics(self):
        return sorted(self.x_xi)

    def x_xi_at(self, n):
        vec = self.x_xi.get(n)
        if vec is None:
            vec = np.zeros(self.layout.dim_xi, dtype=complex)
        return vec

    def x_o_at(self, n):
        vec = self.x_o.get(n)
        if vec is None:
            vec = np.zeros(self.layout.dim_o, dtype=complex)
        return vec

    def rate_harmonic(self, j, n):
        """R_j^(n), computed on demand outside the precomputed span."""
        key = (j, n)
        if key not in self.rates:
            s_j, s_jn = saturation_matrices(self.blocks, self.q_by_n, [n])
            u = self.blocks.view.u_xi
            x0 = self.x_xi[0][self.blocks.view.idx]
            self.rates[key] = -complex(u @ s_jn[(j, n)] @ x0)
        return self.rates[key]

    def state_at(self, t):
        """Real state vector x(t) reconstructed from the stored harmonics
        (n and -n are both stored, so the plain sum is already real)."""
        x = np.zeros(self.layout.dim_x)
        o, xi = self.layout.dim_o, self.layout.dim_xi
        wc = self.field.omega_c
        x[o:] = sum(
            (vec * np.exp(1j * n * wc * t) for n, vec in self.x_xi.items()),
            np.zeros(xi, dtype=complex),
        ).real
        x[:o] = sum(
            (vec * np.exp(1j * n * wc * t) for n, vec in self.x_o.items()),
            np.zeros(o, dtype=complex),
        ).real
        return x

    def rho_at(self, t):
        return unpack(self.state_at(t), self.layout)

    def rate_at(self, j, t):
        wc = self.field.omega_c
        ns = {n for (jj, n) in self.rates if jj == j}
        return sum(self.rates[(j, n)] * np.exp(1j * n * wc * t) for n in ns).real


def _solve_truncated(blocks, k_max, step):
    """Solve the truncated block system on the lattice {-k_max..k_max} * step."""
    dim = blocks.view.dim
    nblk = 2 * k_max + 1
    size = nblk * dim
    # assemble in raw COO form; bmat over thousands of small dense blocks
    # dominates the runtime otherwise
    bi, bj = np.divmod(np.arange(dim * dim), dim)
    eye = np.arange(size)
    rows = [eye]
    cols = [eye]
    data = [np.ones(size, dtype=complex)]
    for ki in range(nblk):
        n = (ki - k_max) * step
        for m in blocks.m0:
            kj = ki + m // step
            if 0 <= kj < nblk:
                rows.append(ki * dim + bi)
                cols.append(kj * dim + bj)
                data.append(blocks.w(n, m).ravel())
    big = scipy.sparse.csc_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size))
    c = np.zeros(size, dtype=complex)
    c[k_max * dim:(k_max + 1) * dim] = blocks.d_xi
    y = scipy.sparse.linalg.splu(big).solve(c)
    residual = float(np.max(np.abs(big @ y - c)))
    x = {(ki - k_max) * step: y[ki * dim:(ki + 1) * dim] for ki in range(nblk)}
    return x, residual


def solve_periodic(fieldset, matrices, options=None, view=None):
    """Compute the unique periodic steady state for a commensurate drive."""
    options = options or SolverOptions()
    blocks = HarmonicBlocks(fieldset, matrices, view=view,
                            cond_threshold=options.cond_threshold)
    view = blocks.view
    layout = view.layout

    if fieldset.stationary or not fieldset.m0:
        x_red = {0: blocks.d_xi.copy()}
        residual = 0.0
        k_max = 0
        step = 1
    else:
        step = math.gcd(*(abs(m) for m in fieldset.m0))
        max_m = max(abs(m) for m in fieldset.m0) // step
        k_max = options.n_blocks_init or max(4 * max_m, 8)
        x_red = None
        prev_x0 = None
        while True:
            x_red, residual = _solve_truncated(blocks, k_max, step)
            x0 = x_red[0]
            norm0 = np.linalg.norm(x0)
            edge = max(np.linalg.norm(x_red[k * step])
                       for k in (k_max, k_max - 1, -k_max, -k_max + 1))
            x0_stable = (prev_x0 is not None
                         and np.max(np.abs(x0 - prev_x0)) <= options.tol * max(1.0, norm0))
            if edge <= options.tol * norm0 and x0_stable and residual <= options.tol:
                break
            prev_x0 = x0
            if 2 * k_max > options.n_blocks_cap:
                raise TruncationNotConverged(
                    f"no convergence with {k_max} harmonic blocks "
                    f"(edge {edge:.2e}, residual {residual:.2e})")
            k_max *= 2

    # drop numerically empty harmonics, embed into the full xi space
    norm0 = np.linalg.norm(x_red[0])
    x_xi = {n: view.embed(v) for n, v in x_red.items()
            if n == 0 or np.linalg.norm(v) > 1e-300}

    # optical harmonics from the eliminated equations
    x_o = _optical_harmonics(blocks, x_xi)

    q_by_n = q_matrices({n: x_red[n] for n in x_red},
                        options.tol_zero, options.tol_parallel)

    span = options.rate_harmonic_span
    rate_ns = sorted({k * step for k in range(-span, span + 1)}
                     | {n for n in x_red if abs(n) <= span})
    s_j, s_jn = saturation_matrices(blocks, q_by_n, rate_ns)

    # closed form for x^(0), as a self-consistency check on Q and s
    a_plus_s = view.a_xixi + sum(s_j)
    x0_closed = -np.linalg.solve(a_plus_s, view.a_xixi @ view.u_xi) / layout.n_j
    x0_selfcheck = float(np.max(np.abs(x0_closed - x_red[0])))

    rates = {}
    u = view.u_xi
    x0 = x_red[0]
    for (j, n), s in s_jn.items():
        rates[(j, n)] = -complex(u @ s @ x0)
    rbar = np.array([rates[(j, 0)].real for j in range(fieldset.n_waves)])
    # cross-check against the other closed form of the mean rate
    rbar_alt = np.array([
        float(u @ s_j[jj] @ np.linalg.solve(a_plus_s, view.a_xixi @ u)) / layout.n_j
        for jj in range(fieldset.n_waves)
    ])
    if np.max(np.abs(rbar - rbar_alt)) > 1e3 * options.tol * max(1.0, np.max(np.abs(rbar))):
        raise TruncationNotConverged(
            f"mean-rate forms disagree: {np.max(np.abs(rbar - rbar_alt)):.2e}")

    mean_force = np.array([
        rbar[j] * fieldset.waves[j].k_mag * fieldset.waves[j].k_dir
        for j in range(fieldset.n_waves)
    ])

    return PeriodicSolution(
        field=fieldset, layout=layout, options=options, lattice_step=step,
        x_xi=x_xi, x_o=x_o, q_by_n=q_by_n, s_j=s_j, s_jn=s_jn, rates=rates,
        rbar=rbar, mean_force=mean_force, n_blocks=k_max, residual=residual,
        x0_selfcheck=x0_selfcheck, blocks=blocks,
    )


def _optical_harmonics(blocks, x_xi):
    """x_o^(n) = A_oo^(n) sum_{q,j} (conj(C)_oxi Omega* x^(n+m_j)
    - C_oxi Omega x^(n-m_j)), evaluated pairwise without forming A_oo."""
    fieldset = blocks.field
    matrices = blocks.matrices
    layout = matrices.layout
    dim_o = layout.dim_o
    wc = blocks.omega_c

    needed = set()
    for n in x_xi:
        for mj in blocks.m:
            needed.add(n + mj)
            needed.add(n - mj)
    out = {}
    for n in sorted(needed):
        r_plus = np.zeros(dim_o // 2, dtype=complex)   # conj-coupling part
        r_minus = np.zeros(dim_o // 2, dtype=complex)
        for j in range(fieldset.n_waves):
            xp = x_xi.get(n + blocks.m[j])
            xm = x_xi.get(n - blocks.m[j])
            for q in _QS:
                w = fieldset.rabi_component(j, q)
                if not w:
                    continue
                if xp is not None:
                    r_plus += np.conj(w) * (np.conj(matrices.c_oxi[q]) @ xp)
                if xm is not None:
                    r_minus -= w * (matrices.c_oxi[q] @ xm)
        if not (r_plus.any() or r_minus.any()):
            continue
        tau_m = blocks.tau(-1, n)
        tau_p = blocks.tau(+1, n)
        vec = np.zeros(dim_o, dtype=complex)
        vec[0::2] = 1j * (tau_m * r_plus + tau_p * r_minus)
        vec[1::2] = -tau_m * r_plus + tau_p * r_minus
        out[n] = vec
    return out
