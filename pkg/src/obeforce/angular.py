"""Angular momentum bookkeeping: half-integers, Clebsch-Gordan, Wigner rotations.

Quantum numbers are represented exactly (doubled integers), coupling
coefficients are evaluated with exact integer arithmetic and rounded to float
once at the end, and the small Wigner d-functions use the Jacobi-polynomial
form with a three-term recurrence in cos(beta).  Conventions are
Condon-Shortley throughout, with rotations

    D[j](m, m'; alpha, beta, gamma) = <j m| exp(-i alpha Jz) exp(-i beta Jy)
                                           exp(-i gamma Jz) |j m'>
                                    = exp(-i (m alpha + m' gamma)) d[j](m, m').
"""

from __future__ import annotations

import math
import numbers
from fractions import Fraction
from functools import lru_cache, total_ordering

__all__ = [
    "HalfInt",
    "half_int_range",
    "clebsch_gordan",
    "cg_transition",
    "wigner_small_d",
    "wigner_D",
]


@total_ordering
class HalfInt:
    """An exact integer or half-integer, stored as its doubled value.

    Supports arithmetic with other ``HalfInt`` and with plain integers, exact
    comparison and hashing (consistent with the equal float), and conversion
    to float.  Construction accepts integers, exactly representable floats
    (1.5, -3.0), strings ("3/2", "2"), or another ``HalfInt``.
    """

    __slots__ = ("twice",)

    def __init__(self, value):
        if isinstance(value, HalfInt):
            self.twice = value.twice
        elif isinstance(value, numbers.Integral):
            self.twice = 2 * int(value)
        elif isinstance(value, str):
            text = value.strip()
            if "/" in text:
                num, den = text.split("/")
                if int(den) != 2:
                    raise ValueError(f"not a half-integer: {value!r}")
                self.twice = int(num)
            else:
                self.twice = HalfInt(float(text)).twice
        elif isinstance(value, numbers.Real):
            doubled = 2 * float(value)
            if doubled != round(doubled):
                raise ValueError(f"not a half-integer: {value!r}")
            self.twice = int(round(doubled))
        else:
            raise TypeError(f"cannot interpret {value!r} as a half-integer")

    @classmethod
    def from_twice(cls, twice):
        obj = cls.__new__(cls)
        obj.twice = int(twice)
        return obj

    @property
    def is_integer(self):
        return self.twice % 2 == 0

    def __float__(self):
        return self.twice / 2

    def __int__(self):
        if not self.is_integer:
            raise ValueError(f"{self} is not an integer")
        return self.twice // 2

    def _twice_of(self, other):
        if isinstance(other, HalfInt):
            return other.twice
        if isinstance(other, numbers.Integral):
            return 2 * int(other)
        if isinstance(other, numbers.Real):
            return 2 * float(other)
        return NotImplemented

    def __add__(self, other):
        t = self._twice_of(other)
        if t is NotImplemented or isinstance(t, float):
            return NotImplemented
        return HalfInt.from_twice(self.twice + t)

    __radd__ = __add__

    def __sub__(self, other):
        t = self._twice_of(other)
        if t is NotImplemented or isinstance(t, float):
            return NotImplemented
        return HalfInt.from_twice(self.twice - t)

    def __rsub__(self, other):
        t = self._twice_of(other)
        if t is NotImplemented or isinstance(t, float):
            return NotImplemented
        return HalfInt.from_twice(t - self.twice)

    def __neg__(self):
        return HalfInt.from_twice(-self.twice)

    def __abs__(self):
        return HalfInt.from_twice(abs(self.twice))

    def __eq__(self, other):
        t = self._twice_of(other)
        if t is NotImplemented:
            return NotImplemented
        return self.twice == t

    def __lt__(self, other):
        t = self._twice_of(other)
        if t is NotImplemented:
            return NotImplemented
        return self.twice < t

    def __hash__(self):
        return hash(self.twice / 2)

    def __str__(self):
        if self.is_integer:
            return str(self.twice // 2)
        return f"{self.twice}/2"

    def __repr__(self):
        return f"HalfInt({self})"


def half_int_range(lo, hi):
    """Inclusive list of half-integers from lo to hi in unit steps."""
    lo, hi = HalfInt(lo), HalfInt(hi)
    if (hi.twice - lo.twice) % 2 != 0:
        raise ValueError(f"range endpoints {lo}, {hi} differ by a non-integer")
    return [HalfInt.from_twice(t) for t in range(lo.twice, hi.twice + 1, 2)]


def _fact(n):
    # n arrives as a Fraction or int that must be a nonnegative integer
    if n != int(n) or n < 0:
        raise ValueError(f"factorial of invalid argument {n}")
    return math.factorial(int(n))


@lru_cache(maxsize=None)
def _cg_cached(tj1, tm1, tj2, tm2, tJ, tM):
    # all arguments doubled; returns a float
    if tm1 + tm2 != tM:
        return 0.0
    if not (abs(tj1 - tj2) <= tJ <= tj1 + tj2):
        return 0.0
    if (tj1 + tj2 + tJ) % 2 != 0:
        return 0.0  # no integer-step coupling path

    j1, m1 = Fraction(tj1, 2), Fraction(tm1, 2)
    j2, m2 = Fraction(tj2, 2), Fraction(tm2, 2)
    J, M = Fraction(tJ, 2), Fraction(tM, 2)

    pref = (
        Fraction(tJ + 1)
        * Fraction(
            _fact(j1 + j2 - J) * _fact(j1 - j2 + J) * _fact(-j1 + j2 + J),
            _fact(j1 + j2 + J + 1),
        )
        * _fact(J + M) * _fact(J - M)
        * _fact(j1 + m1) * _fact(j1 - m1)
        * _fact(j2 + m2) * _fact(j2 - m2)
    )

    k_lo = int(max(0, j2 - J - m1, j1 + m2 - J))
    k_hi = int(min(j1 + j2 - J, j1 - m1, j2 + m2))
    total = Fraction(0)
    for k in range(k_lo, k_hi + 1):
        den = (
            _fact(k)
            * _fact(j1 + j2 - J - k)
            * _fact(j1 - m1 - k)
            * _fact(j2 + m2 - k)
            * _fact(J - j2 + m1 + k)
            * _fact(J - j1 - m2 + k)
        )
        total += Fraction((-1) ** k, den)
    if total == 0:
        return 0.0
    sign = 1.0 if total > 0 else -1.0
    return sign * math.sqrt(float(pref * total * total))


def clebsch_gordan(j1, m1, j2, m2, J, M):
    """Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> (Condon-Shortley).

    Evaluated by the Racah closed sum with exact rational arithmetic; the
    only rounding is the final square root, so the result is accurate to a
    few ulp.  Returns 0.0 for couplings forbidden by the selection rules.

    Raises ``ValueError`` if any (j, m) pair is malformed (negative j,
    |m| > j, or m not ranging in integer steps from -j).
    """
    j1, m1, j2, m2, J, M = (HalfInt(x) for x in (j1, m1, j2, m2, J, M))
    for j, m in ((j1, m1), (j2, m2), (J, M)):
        if j.twice < 0:
            raise ValueError(f"negative angular momentum {j}")
        if abs(m.twice) > j.twice or (j.twice - m.twice) % 2 != 0:
            raise ValueError(f"projection {m} invalid for j = {j}")
    return _cg_cached(j1.twice, m1.twice, j2.twice, m2.twice, J.twice, M.twice)


def cg_transition(j_g, j_e, m, q, two_level_override=False):
    """Dipole coupling coefficient <j_g m; 1 q | j_e m+q> of a g->e transition.

    Out-of-range projections yield 0.0 (convenient in matrix assembly).  With
    ``two_level_override`` and j_g = j_e = 0, the q = 0 coefficient is forced
    to 1 so the pair behaves as a textbook two-level system.
    """
    j_g, j_e, m = HalfInt(j_g), HalfInt(j_e), HalfInt(m)
    q = int(q)
    if two_level_override:
        if j_g.twice != 0 or j_e.twice != 0:
            raise ValueError("two-level override requires j_g = j_e = 0")
        return 1.0 if (q == 0 and m.twice == 0) else 0.0
    if abs(m.twice) > j_g.twice or abs(m.twice + 2 * q) > j_e.twice:
        return 0.0
    return _cg_cached(j_g.twice, m.twice, 2, 2 * q, j_e.twice, m.twice + 2 * q)


def _jacobi(n, a, b, z):
    # three-term recurrence; a, b nonnegative integers, n >= 0
    if n == 0:
        return 1.0
    p_prev = 1.0
    p = (a - b) / 2 + (1 + (a + b) / 2) * z
    for k in range(2, n + 1):
        s = 2 * k + a + b
        c1 = 2 * k * (k + a + b) * (s - 2)
        c2 = (s - 1) * (s * (s - 2) * z + a * a - b * b)
        c3 = 2 * (k + a - 1) * (k + b - 1) * s
        p, p_prev = (c2 * p - c3 * p_prev) / c1, p
    return p


def wigner_small_d(j, m, mp, beta):
    """Small Wigner rotation element d[j](m, m'; beta) = <j m|exp(-i beta Jy)|j m'>.

    Uses the Jacobi-polynomial closed form after mapping (m, m') by the
    standard symmetries onto a representative with m' >= |m|, which keeps the
    Jacobi parameters nonnegative.
    """
    j, m, mp = HalfInt(j), HalfInt(m), HalfInt(mp)
    if abs(m.twice) > j.twice or abs(mp.twice) > j.twice:
        raise ValueError(f"projections ({m}, {mp}) invalid for j = {j}")
    if (j.twice - m.twice) % 2 or (j.twice - mp.twice) % 2:
        raise ValueError(f"projections ({m}, {mp}) invalid for j = {j}")

    # d(m, m') = (-1)^(m - m') d(m', m) = d(-m', -m); pick the image with
    # col >= |row| so the Jacobi parameters come out nonnegative
    row, col, sign = m.twice, mp.twice, 1.0
    flip = -1.0 if (m.twice - mp.twice) % 4 else 1.0
    if col < abs(row):
        if row >= abs(col):
            row, col, sign = col, row, flip
        elif -row >= abs(col):
            row, col = -col, -row
        else:
            row, col, sign = -row, -col, flip

    a = (col - row) // 2
    b = (col + row) // 2
    n = (j.twice - col) // 2
    half = 0.5 * beta
    amp_sq = Fraction(
        _fact(Fraction(j.twice + col, 2)) * _fact(Fraction(j.twice - col, 2)),
        _fact(Fraction(j.twice + row, 2)) * _fact(Fraction(j.twice - row, 2)),
    )
    value = (
        math.sqrt(float(amp_sq))
        * math.sin(half) ** a
        * math.cos(half) ** b
        * _jacobi(n, a, b, math.cos(beta))
    )
    return sign * value


def wigner_D(j, m, mp, alpha, beta, gamma):
    """Full rotation element D[j](m, m') for Euler angles (alpha, beta, gamma)."""
    m, mp = HalfInt(m), HalfInt(mp)
    phase = -(float(m) * alpha + float(mp) * gamma)
    return complex(math.cos(phase), math.sin(phase)) * wigner_small_d(j, m, mp, beta)
