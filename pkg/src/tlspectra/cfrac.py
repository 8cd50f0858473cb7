r"""Continued fractions, convergents and digit-bounded decompositions.

Provides the Gauss expansion with exact integer convergents, the classical
two-sided limsup formula evaluated over windows, the correspondence between
convergents and words in the parabolic generators of SL(2,Z), and the
constructive splitting of a real into two continued fractions with digits
in {1,2,3,4} (the decomposition behind Hall rays).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from mpmath import floor, mpf, sqrt

from .errors import OutOfRange, PrecisionExhausted
from .precision import precision_bits, real, tolerance


@dataclass(frozen=True)
class Convergent:
    p: int
    q: int
    n: int

    def __post_init__(self):
        assert self.q >= 1 and gcd(self.p, self.q) == 1

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


class CFExpansion:
    """``a0 + [a1, a2, ...]`` with all partial quotients >= 1.

    Digits may come from a finite list (optionally flagged as terminated,
    for rationals) or from an infinite supplier called on demand.
    """

    def __init__(self, a0: int, digits, supplier=None, terminated: bool = False):
        self.a0 = int(a0)
        self._digits = [int(d) for d in digits]
        if any(d < 1 for d in self._digits):
            raise ValueError("partial quotients must be >= 1")
        self._supplier = supplier
        self.terminated = terminated

    @classmethod
    def periodic(cls, a0: int, period) -> "CFExpansion":
        period = [int(d) for d in period]
        state = {"i": 0}

        def supply():
            d = period[state["i"] % len(period)]
            state["i"] += 1
            return d

        cf = cls(a0, [], supplier=supply)
        return cf

    def available(self) -> int:
        return len(self._digits)

    def extend_to(self, n: int) -> int:
        """Ensure ``n`` digits are available; returns the usable count."""
        while len(self._digits) < n and self._supplier is not None:
            self._digits.append(int(self._supplier()))
        return min(n, len(self._digits))

    def digit(self, i: int) -> int:
        """1-based partial quotient ``a_i``."""
        if i < 1:
            raise IndexError("digits are 1-based")
        if self.extend_to(i) < i:
            raise IndexError("only %d digits available" % len(self._digits))
        return self._digits[i - 1]

    def digits(self, n: int) -> list:
        return [self.digit(i) for i in range(1, self.extend_to(n) + 1)]

    def convergent(self, n: int) -> Convergent:
        """``p_n/q_n = a0 + [a1..an]`` by the standard recurrences."""
        p_prev, q_prev = 1, 0
        p, q = self.a0, 1
        for i in range(1, n + 1):
            a = self.digit(i)
            p, p_prev = a * p + p_prev, p
            q, q_prev = a * q + q_prev, q
        return Convergent(p, q, n)

    def value(self, n: int) -> mpf:
        c = self.convergent(self.extend_to(n))
        return mpf(c.p) / c.q

    def __repr__(self):
        head = ",".join(str(d) for d in self._digits[:8])
        more = "..." if (self._supplier or len(self._digits) > 8) else ""
        return "CFExpansion(%d + [%s%s])" % (self.a0, head, more)


def expand(x, n: int) -> CFExpansion:
    """Gauss-map expansion of ``x`` to ``n`` partial quotients.

    Rational inputs (to working precision) terminate early and are flagged;
    PrecisionExhausted is raised when the remaining mantissa cannot support
    another digit.
    """
    x = real(x)
    tol = tolerance()
    a0 = int(floor(x))
    frac = x - a0
    digits = []
    for _ in range(n):
        if frac < tol:
            return CFExpansion(a0, digits, terminated=True)
        inv = 1 / frac
        if inv > 1 / tol:
            raise PrecisionExhausted("digit would exceed precision headroom")
        a = int(floor(inv))
        digits.append(a)
        frac = inv - a
    return CFExpansion(a0, digits)


def _backward_bracket(cf: CFExpansion, n: int, window: int) -> mpf:
    """``[a_n, a_{n-1}, ..., a_1]`` evaluated over the trailing window."""
    lo = max(1, n - window + 1)
    v = mpf(0)
    for k in range(lo, n + 1):
        v = 1 / (cf.digit(k) + v)
    return v


def _forward_bracket(cf: CFExpansion, n: int, window: int) -> mpf:
    """``[a_n, a_{n+1}, ...]`` using up to ``window`` digits."""
    hi = cf.extend_to(n + window - 1)
    if hi < n:
        return mpf(0)
    v = mpf(0)
    for k in range(hi, n - 1, -1):
        v = 1 / (cf.digit(k) + v)
    return v


def two_sided_value(cf: CFExpansion, n: int, window: int = 80) -> mpf:
    """``L(A, n) = [a_n..a_1] + a_{n+1} + [a_{n+2}, ...]``."""
    return (
        _backward_bracket(cf, n, window)
        + cf.digit(n + 1)
        + _forward_bracket(cf, n + 2, window)
    )


def perron_L(cf: CFExpansion, window, tail: int = 80) -> mpf:
    """Max of the two-sided value over ``n`` in ``window = (n0, n1)``.

    For bounded-type expansions this converges to the classical limsup as
    the window moves right.
    """
    n0, n1 = window
    if n0 < 1:
        raise ValueError("window must start at n >= 1")
    usable = cf.extend_to(n1 + 1)
    n1 = min(n1, usable - 1)
    if n1 < n0:
        raise ValueError("not enough digits for the requested window")
    return max(two_sided_value(cf, n, tail) for n in range(n0, n1 + 1))


T_MATRIX = ((1, 1), (0, 1))
V_MATRIX = ((1, 0), (1, 1))


def mat_mul(a, b):
    return (
        (a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
        (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]),
    )


def mat_pow(m, k: int):
    out = ((1, 0), (0, 1))
    for _ in range(k):
        out = mat_mul(out, m)
    return out


def mobius(m, slope):
    """Homographic action on co-slopes; ``None`` encodes infinity."""
    (a, b), (c, d) = m
    if slope is None:
        if c == 0:
            return None
        return Fraction(a, c)
    s = Fraction(slope)
    den = c * s + d
    if den == 0:
        return None
    return (a * s + b) / den


def gauss_word(cf: CFExpansion, n: int):
    """The alternating parabolic word with exponents ``a_0 .. a_n``.

    Returns ``(blocks, matrix)`` where blocks is the list of (generator,
    exponent) pairs; applying the matrix to co-slope 0 (n even) or infinity
    (n odd) yields the n-th convergent.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    blocks = [("T", cf.a0)]
    for i in range(1, n + 1):
        blocks.append(("V" if i % 2 == 1 else "T", cf.digit(i)))
    m = ((1, 0), (0, 1))
    for gen, e in blocks:
        m = mat_mul(m, mat_pow(T_MATRIX if gen == "T" else V_MATRIX, e))
    return blocks, m


def gauss_dirichlet_filter(alpha, p: int, q: int) -> bool:
    """True iff ``|q alpha - p| < 1/(2q)`` (forcing ``p/q`` convergent)."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return abs(q * real(alpha) - p) < mpf(1) / (2 * q)


# Extremes of the fractional parts with digits in {1,2,3,4}:
# min = [0;4,1,4,1,...], max = [0;1,4,1,4,...].
def _digit_set_extremes():
    smin = (sqrt(2) - 1) / 2
    smax = 2 * sqrt(2) - 2
    return smin, smax


class _PrefixInterval:
    """Attainable values of digit-bounded expansions with a fixed prefix."""

    __slots__ = ("digits", "p", "p_prev", "q", "q_prev", "lo", "hi")

    def __init__(self, digits=(), state=None):
        self.digits = list(digits)
        if state is not None:
            self.p, self.p_prev, self.q, self.q_prev = state
        else:
            self.p, self.p_prev, self.q, self.q_prev = 0, 1, 1, 0
            for d in digits:
                self._push(d)
        self._bounds()

    def _push(self, d: int):
        self.p, self.p_prev = d * self.p + self.p_prev, self.p
        self.q, self.q_prev = d * self.q + self.q_prev, self.q

    def _bounds(self):
        smin, smax = _digit_set_extremes()
        ylo, yhi = 1 + smin, 4 + smax
        a = (self.p * ylo + self.p_prev) / (self.q * ylo + self.q_prev)
        b = (self.p * yhi + self.p_prev) / (self.q * yhi + self.q_prev)
        self.lo, self.hi = (a, b) if a <= b else (b, a)

    def child(self, d: int) -> "_PrefixInterval":
        c = _PrefixInterval.__new__(_PrefixInterval)
        c.digits = self.digits + [d]
        c.p, c.p_prev, c.q, c.q_prev = self.p, self.p_prev, self.q, self.q_prev
        c._push(d)
        c._bounds()
        return c

    @property
    def width(self):
        return self.hi - self.lo


class HallDecomposition:
    """Lazy two-sided digit-bounded decomposition of a real ``x``.

    ``x = [a1, a2, ...] + x0 + [b1, b2, ...]`` with all digits in
    {1,2,3,4}.  Digits are produced by subdividing whichever side currently
    has the wider value interval, keeping the target inside the sum of the
    two intervals.
    """

    def __init__(self, x, x0: int):
        self.x = real(x)
        self.x0 = x0
        self._a = _PrefixInterval()
        self._b = _PrefixInterval()
        self._target = self.x - x0

    def _subdivide_once(self):
        wide, other = (self._a, self._b)
        if self._b.width > self._a.width:
            wide, other = (self._b, self._a)
        if wide.width < mpf(2) ** (-(precision_bits() - 16)):
            raise PrecisionExhausted("interval width below precision headroom")
        for d in (1, 2, 3, 4):
            c = wide.child(d)
            if c.lo + other.lo <= self._target <= c.hi + other.hi:
                if wide is self._a:
                    self._a = c
                else:
                    self._b = c
                return
        raise AssertionError("digit-bounded subdivision lost the target")

    def _extend(self, n_a: int, n_b: int):
        while len(self._a.digits) < n_a or len(self._b.digits) < n_b:
            self._subdivide_once()

    def a_digits(self, n: int) -> list:
        self._extend(n, 0)
        return list(self._a.digits[:n])

    def b_digits(self, n: int) -> list:
        self._extend(0, n)
        return list(self._b.digits[:n])

    def reconstruction(self, n: int) -> mpf:
        """``[a1..an] + x0 + [b1..bn]`` from the produced digits."""
        a = CFExpansion(0, self.a_digits(n))
        b = CFExpansion(0, self.b_digits(n))
        return a.value(n) + self.x0 + b.value(n)


def hall_decompose(x, x0: int | None = None) -> HallDecomposition:
    """Split ``x`` as two digit-bounded expansions around an integer.

    The fractional sum ranges over ``[2 smin, 2 smax]`` (an interval of
    length > 1), so any ``x >= 4`` admits an integer ``x0``; by default the
    largest admissible one is chosen.
    """
    x = real(x)
    smin, smax = _digit_set_extremes()
    if x0 is None:
        x0 = int(floor(x - 2 * smin))
    if not (2 * smin <= x - x0 <= 2 * smax):
        raise OutOfRange("x - x0 outside the attainable sum interval")
    if x0 < 1:
        raise OutOfRange("x too small for a digit-bounded splitting")
    return HallDecomposition(x, x0)
