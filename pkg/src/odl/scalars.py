"""Dual-representation scalars and exact quadratic irrationals.

A Scalar is either an exact arbitrary-precision Fraction or a finite float.
Conversions between the two are always explicit.  QuadSurd adds exact
arithmetic in a real quadratic field Q(sqrt(d)), which is what keeps deep
convergent constructions exact.
"""

from __future__ import annotations

import math
from fractions import Fraction
from math import isqrt

Scalar = Fraction | float

#: global tolerance for float equality of points
FLOAT_EQ_TOL = 1e-12

_SQRT_PREC_BITS = 128
_sqrt_cache: dict[int, Fraction] = {}


def is_exact(x) -> bool:
    return isinstance(x, (Fraction, int))


def as_exact(x) -> Fraction:
    """Exact value of x.  Floats are converted to the rational they denote."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite float {x!r}")
        return Fraction(x)
    raise TypeError(f"cannot make {type(x).__name__} exact")


def to_float(x) -> float:
    f = float(x)
    if not math.isfinite(f):
        raise ValueError(f"non-finite scalar {x!r}")
    return f


def check_scalar(x) -> Scalar:
    if isinstance(x, bool) or not isinstance(x, (Fraction, int, float)):
        raise TypeError(f"not a scalar: {x!r}")
    if isinstance(x, float) and not math.isfinite(x):
        raise ValueError(f"non-finite scalar {x!r}")
    return Fraction(x) if isinstance(x, int) else x


def mod1(x):
    """Reduce into [0, 1).  Exact for Fraction/QuadSurd, float otherwise."""
    if isinstance(x, QuadSurd):
        return x.frac()
    if isinstance(x, (Fraction, int)):
        return Fraction(x) % 1
    return x % 1.0


def circle_dist(x, y):
    """Arc distance on R/Z, in [0, 1/2].  Exact when both inputs are exact."""
    d = mod1(x - y)
    one = Fraction(1) if is_exact(d) else 1.0
    return min(d, one - d)


def scalar_kind(values) -> str:
    """'exact' | 'float' for a homogeneous collection; mix is an error."""
    kinds = {("exact" if is_exact(v) else "float") for v in values}
    if len(kinds) > 1:
        raise TypeError("mixed exact/float scalars; convert explicitly")
    return kinds.pop() if kinds else "exact"


def _sqrt_fraction(d: int) -> Fraction:
    """Rational approximation of sqrt(d) accurate to ~2^-128."""
    approx = _sqrt_cache.get(d)
    if approx is None:
        num = isqrt(d << (2 * _SQRT_PREC_BITS))
        approx = Fraction(num, 1 << _SQRT_PREC_BITS)
        _sqrt_cache[d] = approx
    return approx


class QuadSurd:
    """Exact element a + b*sqrt(d) of a real quadratic field, d squarefree > 1."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d: int):
        self.a = Fraction(a)
        self.b = Fraction(b)
        if not isinstance(d, int) or d <= 1 or isqrt(d) ** 2 == d:
            raise ValueError(f"d must be a non-square integer > 1, got {d!r}")
        self.d = d

    @classmethod
    def golden(cls) -> "QuadSurd":
        """(sqrt(5) - 1)/2, the golden rotation number."""
        return cls(Fraction(-1, 2), Fraction(1, 2), 5)

    @classmethod
    def silver(cls) -> "QuadSurd":
        """sqrt(2) - 1, the silver rotation number."""
        return cls(-1, 1, 2)

    def _coerce(self, other):
        if isinstance(other, QuadSurd):
            if other.d != self.d:
                raise ValueError("surds from different fields")
            return other
        if isinstance(other, (Fraction, int)):
            return QuadSurd(Fraction(other), 0, self.d)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadSurd(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadSurd(-self.a, -self.b, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadSurd(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadSurd(
            self.a * o.a + self.b * o.b * self.d,
            self.a * o.b + self.b * o.a,
            self.d,
        )

    __rmul__ = __mul__

    def reciprocal(self) -> "QuadSurd":
        norm = self.a * self.a - self.b * self.b * self.d
        if norm == 0:
            raise ZeroDivisionError("zero surd")
        return QuadSurd(self.a / norm, -self.b / norm, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.reciprocal()

    def sign(self) -> int:
        a, b = self.a, self.b
        if b == 0:
            return -1 if a < 0 else (0 if a == 0 else 1)
        if a == 0:
            return -1 if b < 0 else 1
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # opposite signs: compare a^2 against b^2 d
        lhs, rhs = a * a, b * b * self.d
        if a > 0:  # b < 0
            return 1 if lhs > rhs else (-1 if lhs < rhs else 0)
        return -1 if lhs > rhs else (1 if lhs < rhs else 0)

    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is None:
            raise TypeError(f"cannot compare QuadSurd with {type(other).__name__}")
        return (self - o).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if isinstance(other, (QuadSurd, Fraction, int)):
            try:
                return self._cmp(other) == 0
            except ValueError:
                return False
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __float__(self) -> float:
        return float(self.a + self.b * _sqrt_fraction(self.d))

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def floor(self) -> int:
        # integer-only: with self = (A + B*sqrt(d))/D, floor(B*sqrt(d)) = s
        # brackets the value in [(A+s)/D, (A+s+1)/D); fix up exactly after
        D = self.a.denominator * self.b.denominator // math.gcd(
            self.a.denominator, self.b.denominator
        )
        A = self.a.numerator * (D // self.a.denominator)
        B = self.b.numerator * (D // self.b.denominator)
        t = B * B * self.d
        s = isqrt(t) if B >= 0 else -isqrt(t) - (0 if isqrt(t) ** 2 == t else 1)
        guess = (A + s) // D
        while (self - (guess + 1)).sign() >= 0:
            guess += 1
        while (self - guess).sign() < 0:
            guess -= 1
        return guess

    def frac(self) -> "QuadSurd":
        return self - self.floor()

    def is_rational(self) -> bool:
        return self.b == 0

    def __repr__(self):
        return f"QuadSurd({self.a}, {self.b}, {self.d})"


def render_scalar(x) -> str:
    """CSV rendering: exact rationals as p/q, floats via repr."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    if isinstance(x, int):
        return str(x)
    return repr(float(x))
