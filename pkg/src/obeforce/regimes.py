"""Special drive regimes where the general solver collapses to closed forms.

Each function here computes the mean absorption rates without touching the
truncated harmonic system (or touching only a reduced block of it), and is
tested against the general solver on its domain of validity:

- low intensity with distinct frequencies: the harmonic mixing is negligible
  and each wave contributes through its own saturation matrix;
- the incoherent sigma+/sigma- pair: phase-averaged rates from the
  population block alone;
- equal frequencies: the regime is strictly stationary and one linear solve
  suffices;
- equal frequency and common pure polarization: rates collapse to the
  two-parameter law (gamma/2) s_j a / (b + s);
- common pure polarization, any frequencies: the Zeeman sector carries the
  trivial solution and only the population block needs solving;
- two waves: the harmonic maps satisfy a matrix continued fraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateRegime,
    DepthNotConverged,
    SingularContinuedFraction,
    UnsupportedTransition,
)
from .floquet_solver import HarmonicBlocks, SolverOptions, XiView, solve_periodic
from .obe_matrices import ObeMatrices
from .state_layout import build_layout

__all__ = [
    "low_intensity_check",
    "low_intensity_rate",
    "incoherent_sigma_pm",
    "same_frequency_rate",
    "GaoParams",
    "gao_params",
    "common_pure_polarization",
    "pure_polarization_reduced",
    "ContinuedFractionResult",
    "n2_continued_fraction",
]

_QS = (1, 0, -1)


def _solve_guarded(mat, rhs, cond_threshold=1e12):
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > cond_threshold:
        raise DegenerateRegime(
            f"saturated decay matrix is singular (cond ~ {cond:.3g})")
    return np.linalg.solve(mat, rhs)


def low_intensity_check(fieldset, matrices, threshold=0.1):
    """Decide whether harmonic mixing is negligible.

    Two conditions: the summed Rabi moduli stay below threshold (in decay
    units), and every absolute row sum of the W blocks, accumulated over the
    coupling offsets, stays below threshold/sqrt(dim).  The row sums are
    probed on a finite window of harmonics around the resonant indices; W
    decays as 1/n beyond it.
    """
    rabi_sum = sum(abs(w.rabi) for w in fieldset.waves)
    dim = matrices.layout.dim_xi
    limit = threshold / np.sqrt(dim)
    max_row = 0.0
    probed = []
    if fieldset.m0:
        blocks = HarmonicBlocks(fieldset, matrices)
        reach = max(abs(m) for m in fieldset.m)
        if fieldset.omega_c:
            reach += int(np.ceil(abs(fieldset.deltabar) / fieldset.omega_c))
        n_probe = min(max(2 * reach, 8), 128)
        probed = [n for n in range(-n_probe, n_probe + 1) if n]
        for n in probed:
            rows = np.zeros(dim)
            for m in fieldset.m0:
                rows += np.sum(np.abs(blocks.w(n, m)), axis=1)
            max_row = max(max_row, float(rows.max()))
    ok = rabi_sum < threshold and max_row < limit
    return ok, {
        "rabi_sum": rabi_sum,
        "rabi_limit": threshold,
        "max_row_sum": max_row,
        "row_sum_limit": limit,
        "probed_harmonics": len(probed),
    }


def low_intensity_rate(fieldset, matrices, j):
    """Mean absorption rate of wave j, neglecting all harmonic mixing.

    Valid with all frequencies distinct and low_intensity_check passing;
    each wave then enters only through its own stationary saturation matrix.
    """
    if len(set(fieldset.m)) != fieldset.n_waves:
        raise ValueError("low-intensity closed form needs all distinct frequencies")
    blocks = HarmonicBlocks(fieldset, matrices)
    view = blocks.view
    s_tot = blocks.s_tilde
    au = view.a_xixi @ view.u_xi
    x = _solve_guarded(view.a_xixi + s_tot, au)
    return float(view.u_xi @ blocks.s_tilde_j(j) @ x) / matrices.layout.n_j


def incoherent_sigma_pm(fieldset, matrices):
    """Phase-averaged low-intensity rates for a sigma+/sigma- wave pair.

    Averaging over the relative phase kills every cross term, and what
    remains involves only the (real) population blocks of the coupling
    matrices.  Returns the two mean rates.
    """
    if fieldset.n_waves != 2:
        raise ValueError("this closed form is for exactly two waves")
    qs = []
    for w in fieldset.waves:
        comp = [w.pol_component(q) for q in _QS]
        live = [qi for qi, c in enumerate(comp) if abs(c) > 1e-12]
        if len(live) != 1 or abs(abs(comp[live[0]]) - 1) > 1e-12:
            raise ValueError("waves must carry pure spherical polarizations")
        qs.append(_QS[live[0]])
    if sorted(qs) != [-1, 1]:
        raise ValueError("expected one sigma+ and one sigma- wave")

    layout = matrices.layout
    dim_p = layout.dim_p
    a_pp = matrices.a_xixi[:dim_p, :dim_p]
    u_p = matrices.u_xi[:dim_p]
    c_pp = {q: matrices.c_xixi[(q, q)][:dim_p, :dim_p].real for q in (1, -1)}
    s = [
        (abs(w.rabi) ** 2 / 2) / (0.25 + w.detuning ** 2)
        for w in fieldset.waves
    ]
    pumped = a_pp + s[0] * c_pp[qs[0]] + s[1] * c_pp[qs[1]]
    core = _solve_guarded(pumped, a_pp @ u_p)
    return np.array([
        s[j] * float(u_p @ c_pp[qs[j]] @ core) / layout.n_j
        for j in range(2)
    ])


def same_frequency_rate(fieldset, matrices):
    """Exact mean rates when every wave has the same frequency.

    The periodic regime is strictly stationary, so the rates follow from a
    single linear solve with the summed-field saturation matrices.
    """
    if not fieldset.stationary:
        raise ValueError("waves must all share one frequency")
    blocks = HarmonicBlocks(fieldset, matrices)
    view = blocks.view
    x = _solve_guarded(view.a_xixi + blocks.s_tilde, view.a_xixi @ view.u_xi)
    return np.array([
        float(view.u_xi @ blocks.s_tilde_j(j) @ x) / matrices.layout.n_j
        for j in range(fieldset.n_waves)
    ])


@dataclass(frozen=True)
class GaoParams:
    """Coefficients of the rate law (gamma/2) s_j a / (b + s) for equal
    frequency and a common pure polarization q."""

    a: float
    b: float
    delta_j: int
    j_g: object
    q: int


def gao_params(transition, q):
    """Closed-form (a, b) for a transition driven with pure polarization q."""
    if q not in (-1, 0, 1):
        raise ValueError("q must be a spherical index")
    dj = transition.delta_j
    if dj == -1:
        raise UnsupportedTransition(
            "a common pure polarization leaves dark states for J_e = J_g - 1")
    integer_jg = transition.j_g.twice % 2 == 0
    if dj == 0 and (q != 0 or integer_jg):
        return GaoParams(a=0.0, b=0.0, delta_j=dj, j_g=transition.j_g, q=q)

    layout = build_layout(transition)
    matrices = ObeMatrices.build(layout)
    dim_p = layout.dim_p
    a_pp = matrices.a_xixi[:dim_p, :dim_p]
    c_pp = matrices.c_xixi[(q, q)][:dim_p, :dim_p]
    if np.max(np.abs(c_pp.imag)) > 1e-12:
        raise AssertionError("population coupling block should be real")
    c_pp = c_pp.real
    sign = 1.0 if integer_jg else -1.0
    det_plus = np.linalg.det(a_pp + c_pp)
    det_minus = np.linalg.det(a_pp - c_pp)
    b = (det_plus + sign * det_minus) / (det_plus - sign * det_minus)
    return GaoParams(a=1.0, b=float(b), delta_j=dj, j_g=transition.j_g, q=q)


def common_pure_polarization(fieldset):
    """The shared spherical index q of the wave set, or None."""
    qs = set()
    for w in fieldset.waves:
        comp = [w.pol_component(q) for q in _QS]
        live = [qi for qi, c in enumerate(comp) if abs(c) > 1e-12]
        if len(live) != 1:
            return None
        qs.add(_QS[live[0]])
    return qs.pop() if len(qs) == 1 else None


def pure_polarization_reduced(fieldset, matrices, options=None):
    """Periodic solution through the population block only.

    With a common pure polarization the Zeeman harmonics satisfy a
    homogeneous system and vanish, so the truncated solve runs at dimension
    dim_p and the result is embedded back with an empty Zeeman sector.
    """
    if common_pure_polarization(fieldset) is None:
        raise ValueError("waves must share one pure spherical polarization")
    return solve_periodic(fieldset, matrices, options,
                          view=XiView.populations(matrices))


@dataclass
class ContinuedFractionResult:
    """Harmonic maps of a two-wave drive from the continued fraction."""

    n_s: int
    q_ns: np.ndarray
    depth_used: int
    higher_q: list


def n2_continued_fraction(fieldset, matrices, tol=1e-10, depth_init=8,
                          depth_cap=65536, k_higher=4, view=None):
    """Q^(n_s) for a two-frequency drive, by matrix continued fraction.

    The harmonic couplings reduce to nearest neighbors on the n_s lattice.
    Writing S_k for the map from x^(k n_s) to x^((k+1) n_s), the system
    gives the descending relation

        S_{k-1} = -[1 + W^(k n_s, n_s) S_k]^{-1} W^(k n_s, -n_s),

    evaluated bottom-up from a zero tail (the matrix continued fraction)
    and deepened until Q^(n_s) = S_0 is stable.  Higher maps are chained
    step products Q^(k n_s) = S_{k-1} ... S_0; the W blocks themselves are
    rank-deficient in general, so they are never inverted.
    """
    if fieldset.n_waves != 2:
        raise ValueError("continued fraction applies to exactly two waves")
    n_s = fieldset.n_s
    blocks = HarmonicBlocks(fieldset, matrices, view=view)
    dim = blocks.view.dim
    eye = np.eye(dim, dtype=complex)

    def evaluate(depth, keep):
        s = np.zeros((dim, dim), dtype=complex)
        kept = {}
        try:
            for k in range(depth, 0, -1):
                s = -np.linalg.solve(eye + blocks.w(k * n_s, n_s) @ s,
                                     blocks.w(k * n_s, -n_s))
                if k <= keep:
                    kept[k - 1] = s
        except np.linalg.LinAlgError as exc:
            raise SingularContinuedFraction(str(exc)) from exc
        return s, kept

    depth = depth_init
    q_ns, _ = evaluate(depth, 0)
    while True:
        depth *= 2
        if depth > depth_cap:
            raise DepthNotConverged(f"no convergence at depth {depth // 2}")
        nxt, kept = evaluate(depth, k_higher)
        if np.max(np.abs(nxt - q_ns)) < tol:
            q_ns = nxt
            break
        q_ns = nxt

    higher = []
    acc = eye
    for k in range(k_higher):
        acc = kept[k] @ acc
        higher.append(acc)

    return ContinuedFractionResult(n_s=n_s, q_ns=q_ns, depth_used=depth,
                                   higher_q=higher)
