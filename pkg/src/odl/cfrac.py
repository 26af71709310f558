"""Continued fractions, convergents, and rational-approximation searches.

Exact rational inputs expand by the Euclidean algorithm and reconstruct
exactly.  Quadratic irrationals take an exact recursion on surds, so deep
convergents stay exact.  Float inputs are expanded through the rational the
double denotes, with a hard depth wall of 40 coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .errors import DepthPrecisionExceededError
from .scalars import QuadSurd, Scalar, is_exact, render_scalar

FLOAT_DEPTH_LIMIT = 40
FLOAT_RESIDUAL_MIN = Fraction(1, 10**14)


@dataclass(frozen=True)
class ContinuedFraction:
    """Coefficients [a0; a1, a2, ...] with a_k >= 1 for k >= 1."""

    a0: int
    coeffs: tuple[int, ...]
    source: str  # rational | quadratic | float
    terminated: bool = False  # expansion is the complete (finite) one

    def __post_init__(self):
        if any(a < 1 for a in self.coeffs):
            raise ValueError("partial quotients must be >= 1")

    def value(self) -> Fraction:
        """Exact value of the finite expansion."""
        x = Fraction(0)
        for a in reversed(self.coeffs):
            x = 1 / (a + x)
        return self.a0 + x

    def __len__(self):
        return len(self.coeffs)


def _expand_fraction(x: Fraction, depth: int) -> tuple[int, list[int], bool]:
    a0 = x.numerator // x.denominator
    frac = x - a0
    coeffs: list[int] = []
    while frac != 0 and len(coeffs) < depth:
        inv = 1 / frac
        a = inv.numerator // inv.denominator
        coeffs.append(a)
        frac = inv - a
    # canonical form: never end in a trailing 1 (except [a0; 1] -> a0+1 handled
    # naturally by Euclid, which cannot produce a final 1 after the first step)
    return a0, coeffs, frac == 0


def _expand_surd(x: QuadSurd, depth: int) -> tuple[int, list[int]]:
    a0 = x.floor()
    y = x - a0
    coeffs: list[int] = []
    while len(coeffs) < depth:
        y = y.reciprocal()
        a = y.floor()
        coeffs.append(a)
        y = y - a
    return a0, coeffs


def expand(alpha, depth: int) -> ContinuedFraction:
    """Continued-fraction coefficients of alpha in (0,1), up to `depth`.

    Float inputs are limited to depth 40; the expansion also stops early once
    the residual of the denoted rational drops below 1e-14, past which
    coefficients would reflect float granularity rather than the number.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if isinstance(alpha, QuadSurd):
        if not (0 < alpha < 1):
            raise ValueError("alpha must lie in (0,1)")
        if alpha.is_rational():
            return expand(alpha.a, depth)
        a0, coeffs = _expand_surd(alpha, depth)
        return ContinuedFraction(a0, tuple(coeffs), "quadratic")
    if is_exact(alpha):
        x = Fraction(alpha)
        if not (0 < x < 1):
            raise ValueError("alpha must lie in (0,1)")
        a0, coeffs, done = _expand_fraction(x, depth)
        return ContinuedFraction(a0, tuple(coeffs), "rational", terminated=done)
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0,1)")
    if depth > FLOAT_DEPTH_LIMIT:
        raise DepthPrecisionExceededError(
            f"float expansion depth {depth} exceeds the precision wall {FLOAT_DEPTH_LIMIT}"
        )
    x = Fraction(alpha)
    a0 = 0
    frac = x
    coeffs: list[int] = []
    while frac != 0 and len(coeffs) < depth:
        if frac < FLOAT_RESIDUAL_MIN:
            break  # residual at float-noise scale; further a_k untrusted
        inv = 1 / frac
        a = inv.numerator // inv.denominator
        coeffs.append(a)
        frac = inv - a
    return ContinuedFraction(a0, tuple(coeffs), "float", terminated=frac == 0)


@dataclass(frozen=True)
class ConvergentRow:
    k: int
    p: int
    q: int
    dist: object  # ||q*alpha||: Fraction or QuadSurd

    def csv(self) -> str:
        return f"{self.k},{self.p},{self.q},{render_scalar(self.dist) if isinstance(self.dist, Fraction) else repr(float(self.dist))}"


def _dist_to_integers(x):
    """||x|| = dist(x, Z), exact for Fraction and QuadSurd."""
    if isinstance(x, QuadSurd):
        f = x.frac()
        return min(f, 1 - f)
    f = Fraction(x) % 1
    return min(f, 1 - f)


class ConvergentTable:
    """Convergents p_k/q_k of a continued fraction with exact ||q_k alpha||."""

    def __init__(self, cf: ContinuedFraction, alpha):
        exact_alpha = alpha if isinstance(alpha, QuadSurd) else Fraction(alpha)
        rows = []
        p_prev, q_prev = 1, 0
        p, q = cf.a0, 1
        rows.append(ConvergentRow(0, p, q, _dist_to_integers(exact_alpha * q - 0)))
        for k, a in enumerate(cf.coeffs, start=1):
            p, p_prev = a * p + p_prev, p
            q, q_prev = a * q + q_prev, q
            rows.append(ConvergentRow(k, p, q, _dist_to_integers(exact_alpha * q)))
        self.cf = cf
        self.alpha = exact_alpha
        self.rows = rows

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, k: int) -> ConvergentRow:
        return self.rows[k]

    def denominators(self) -> list[int]:
        return [r.q for r in self.rows]

    def to_csv_lines(self) -> list[str]:
        return ["k,p,q,dist"] + [r.csv() for r in self.rows]


def convergents(cf: ContinuedFraction, alpha) -> ConvergentTable:
    """Convergent table of cf against the (exactified) alpha it came from."""
    return ConvergentTable(cf, alpha)


def convergent_table(alpha, depth: int) -> ConvergentTable:
    """Shorthand: expand and tabulate in one step."""
    cf = expand(alpha, depth)
    return ConvergentTable(cf, alpha)


def approx_search(
    alpha,
    moduli: Sequence[int],
    bound_fn: Callable[[int], float],
) -> list[tuple[int, int]]:
    """All coprime pairs (p, q), q in moduli, with |alpha - p/q| <= bound_fn(q)/q."""
    from math import gcd

    if not moduli:
        raise ValueError("moduli must be nonempty")
    if list(moduli) != sorted(set(moduli)):
        raise ValueError("moduli must be strictly increasing")
    exact_alpha = alpha if isinstance(alpha, QuadSurd) else Fraction(alpha)
    out: list[tuple[int, int]] = []
    for q in moduli:
        if q < 1:
            raise ValueError("moduli must be positive")
        bound = Fraction(bound_fn(q)).limit_denominator(10**18) / q
        if bound <= 0:
            raise ValueError("bound_fn must be positive")
        center = exact_alpha * q
        lo = (center - bound * q).floor() if isinstance(center, QuadSurd) else (center - bound * q).__floor__()
        hi = (center + bound * q).floor() if isinstance(center, QuadSurd) else (center + bound * q).__floor__()
        for p in range(lo, hi + 2):
            if gcd(p, q) != 1:
                continue
            err = abs(exact_alpha - Fraction(p, q))
            if not err > bound:  # <= with exact comparison, surd-safe
                out.append((p, q))
    return out
