"""Brute-force time-domain reference for the harmonic-balance solver.

Everything here goes through direct numerical integration of the real
first-order system x' = A(t) x + b, with no knowledge of the Fourier
machinery: settle to the periodic regime by integrating, read harmonics
off an FFT of sampled data, get stability exponents from the monodromy
matrix.  Slower than the solver by design; used as ground truth in tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import PeriodMismatch
from .floquet_solver import absorption_vector
from .obe_matrices import assemble_A

__all__ = [
    "integrate",
    "settle_to_periodic",
    "SettledTrajectory",
    "fourier_extract",
    "monodromy",
    "FloquetSpectrum",
    "rate_timeseries",
    "mean_rates",
]

_QS = (1, 0, -1)


def _check_period(fieldset, period):
    if period is not None:
        return float(period)
    if fieldset.stationary:
        # any window works for a constant generator
        return 1.0
    return fieldset.period


def integrate(fieldset, matrices, t_final, x0=None, t0=0.0,
              rtol=1e-10, atol=1e-12):
    """Integrate the driven system; returns the scipy result with dense output.

    The default initial state is the maximally mixed atom (the zero vector).
    """
    if abs(matrices.deltabar - fieldset.deltabar) > 1e-12:
        matrices = matrices.with_deltabar(fieldset.deltabar)
    if x0 is None:
        x0 = np.zeros(matrices.layout.dim_x)

    def rhs(t, x):
        return assemble_A(matrices, fieldset.omega_q(t)) @ x + matrices.b

    res = solve_ivp(rhs, (t0, t_final), np.asarray(x0, dtype=float),
                    method="DOP853", rtol=rtol, atol=atol, dense_output=True)
    if not res.success:
        raise RuntimeError(f"integration failed: {res.message}")
    return res


@dataclass
class SettledTrajectory:
    """Dense solution over (at least) one period of the settled regime."""

    fieldset: object
    matrices: object
    t0: float
    period: float
    sol: object

    def __call__(self, t):
        return self.sol(t)


def settle_to_periodic(fieldset, matrices, x0=None, settle_tol=1e-8,
                       rtol=1e-10, atol=1e-12, t_max=2.0e4):
    """Integrate from x0 until x(t) - x(t - T) falls below settle_tol.

    The settling horizon doubles until the periodicity defect is small;
    raises PeriodMismatch if t_max is exhausted first (slow pumping or a
    non-unique regime).
    """
    period = _check_period(fieldset, None)
    t_probe = max(10.0, 4.0 * period)
    t_start = 0.0
    state = x0
    while True:
        res = integrate(fieldset, matrices, t_start + t_probe + period,
                        x0=state, t0=t_start, rtol=rtol, atol=atol)
        t1 = t_start + t_probe
        defect = np.max(np.abs(res.sol(t1 + period) - res.sol(t1)))
        if defect < settle_tol:
            return SettledTrajectory(fieldset, matrices, t1, period, res.sol)
        if t1 + t_probe > t_max:
            raise PeriodMismatch(
                f"state not periodic after t = {t1:.0f} (defect {defect:.2e})")
        state = res.y[:, -1]
        t_start = t_start + t_probe + period
        t_probe *= 2


def fourier_extract(x_of_t, period, n_max, t0=0.0, n_samples=256,
                    tol=1e-9, period_tol=1e-6):
    """Harmonic components x^(n), |n| <= n_max, of a periodic vector signal.

    Uniform sampling plus FFT, doubling the grid until the requested
    coefficients stabilize; raises PeriodMismatch when the signal fails
    x(t0 + T) = x(t0) at the period_tol level.
    """
    mismatch = np.max(np.abs(np.asarray(x_of_t(t0 + period)) - np.asarray(x_of_t(t0))))
    if mismatch > period_tol:
        raise PeriodMismatch(f"x(t0+T) - x(t0) = {mismatch:.2e} exceeds {period_tol:.0e}")

    def coeffs(n):
        ts = t0 + period * np.arange(n) / n
        samples = np.array([x_of_t(t) for t in ts])
        spec = np.fft.fft(samples, axis=0) / n
        # rephase so coefficients multiply e^(i n omega t) in absolute time
        return {k: spec[k % n] * np.exp(-2j * np.pi * k * t0 / period)
                for k in range(-n_max, n_max + 1)}

    n = max(n_samples, 4 * n_max + 4)
    prev = coeffs(n)
    while True:
        n *= 2
        cur = coeffs(n)
        change = max(np.max(np.abs(cur[k] - prev[k])) for k in cur)
        if change < tol:
            return cur
        if n > 1 << 16:
            raise PeriodMismatch(f"Fourier coefficients not converging (change {change:.2e})")
        prev = cur


@dataclass
class FloquetSpectrum:
    """Eigendata of the one-period propagator of the homogeneous system."""

    period: float
    multipliers: np.ndarray
    exponents: np.ndarray      # principal branch of log(multiplier)/period

    @property
    def lambda_max(self):
        return float(np.max(self.exponents.real))


def monodromy(fieldset, matrices, period=None, rtol=1e-10, atol=1e-12):
    """Propagate a full basis over one period of x' = A(t) x."""
    if abs(matrices.deltabar - fieldset.deltabar) > 1e-12:
        matrices = matrices.with_deltabar(fieldset.deltabar)
    period = _check_period(fieldset, period)
    dim = matrices.layout.dim_x

    def rhs(t, y):
        a = assemble_A(matrices, fieldset.omega_q(t))
        return (a @ y.reshape(dim, dim)).reshape(-1)

    res = solve_ivp(rhs, (0.0, period), np.eye(dim).reshape(-1),
                    method="DOP853", rtol=rtol, atol=atol)
    if not res.success:
        raise RuntimeError(f"integration failed: {res.message}")
    prop = res.y[:, -1].reshape(dim, dim)
    mult = np.linalg.eigvals(prop)
    return FloquetSpectrum(period=period, multipliers=mult,
                           exponents=np.log(mult) / period)


def rate_timeseries(fieldset, layout, x_of_t, times):
    """Photon absorption rate of each wave along a trajectory.

    R_j(t) = Im sum_q Omega_{j,q} e^(i m_j omega_c t) chi^(q)(t), with the
    absorption vector read off the optical block of the state.
    """
    out = np.zeros((fieldset.n_waves, len(times)))
    for ti, t in enumerate(times):
        x = np.asarray(x_of_t(t))
        chi = absorption_vector(x[:layout.dim_o], layout)
        for j in range(fieldset.n_waves):
            phase = np.exp(1j * fieldset.m[j] * fieldset.omega_c * t)
            out[j, ti] = sum(
                (fieldset.rabi_component(j, q) * phase * chi[qi]).imag
                for qi, q in enumerate(_QS))
    return out


def mean_rates(settled, n_grid=2048):
    """Period average of each wave's absorption rate on the settled regime."""
    fs = settled.fieldset
    layout = settled.matrices.layout
    ts = settled.t0 + settled.period * np.arange(n_grid + 1) / n_grid
    series = rate_timeseries(fs, layout, settled.sol, ts)
    return np.trapezoid(series, ts, axis=1) / settled.period
