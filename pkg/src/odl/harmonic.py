"""Generalized Ramanujan sums, Jordan totients, bump functions, tail bounds.

The Ramanujan-type sum c_q(m) is evaluated two independent ways: the literal
exponential sum over primitive residue vectors (exact cyclotomic arithmetic
in one dimension, verified counting/DFT otherwise) and the multiplicative
prime-power formula.  Their agreement is one of the main verification gates.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd, isqrt
from typing import Optional, Sequence

import numpy as np

from .errors import (
    AliasingRiskError,
    BudgetExceededError,
    GridTooCoarseError,
    InadmissibleSequenceError,
    ZeroFrequencyError,
)

_EXACT_Q_LIMIT = 1000
_BRUTE_CELL_LIMIT = 20_000_000


@dataclass(frozen=True)
class FrequencyVector:
    """Integer frequency vector with the L1 norm |m| = sum |m_i|."""

    m: tuple[int, ...]

    def __post_init__(self):
        if not self.m:
            raise ValueError("empty frequency vector")

    @property
    def norm(self) -> int:
        return sum(abs(v) for v in self.m)

    @property
    def dim(self) -> int:
        return len(self.m)

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.m)

    def content(self) -> int:
        """gcd of the components (0 for the zero vector)."""
        g = 0
        for v in self.m:
            g = gcd(g, abs(v))
        return g


def _as_freq(m) -> FrequencyVector:
    if isinstance(m, FrequencyVector):
        return m
    if isinstance(m, int):
        return FrequencyVector((m,))
    return FrequencyVector(tuple(int(v) for v in m))


@lru_cache(maxsize=100_000)
def factorize(q: int) -> tuple[tuple[int, int], ...]:
    """Prime-power factorization by trial division (small q regime)."""
    if q < 1:
        raise ValueError("q must be >= 1")
    out = []
    for p in range(2, isqrt(q) + 1):
        if q % p == 0:
            r = 0
            while q % p == 0:
                q //= p
                r += 1
            out.append((p, r))
    if q > 1:
        out.append((q, 1))
    return tuple(out)


@lru_cache(maxsize=4096)
def _cyclotomic(q: int) -> tuple[int, ...]:
    """Coefficients (low to high) of the q-th cyclotomic polynomial."""
    # start from x^q - 1 and divide out Phi_d for proper divisors d
    poly = [-1] + [0] * (q - 1) + [1]
    for d in range(1, q):
        if q % d == 0:
            poly = _polydiv_exact(poly, list(_cyclotomic(d)))
    return tuple(poly)


def _polydiv_exact(num: list[int], den: list[int]) -> list[int]:
    """Exact division of integer polynomials; divisor monic up to sign."""
    num = list(num)
    dn = len(den) - 1
    lead = den[-1]
    out = [0] * (len(num) - dn)
    for i in range(len(num) - 1, dn - 1, -1):
        c = num[i]
        if c == 0:
            continue
        f = c // lead
        out[i - dn] = f
        for j, d in enumerate(den):
            num[i - dn + j] -= f * d
    if any(num):
        raise ArithmeticError("non-exact polynomial division")
    return out


def _primitive_counts_1d(m: int, q: int) -> list[int]:
    counts = [0] * q
    for k in range(1, q + 1):
        if gcd(k, q) == 1:
            counts[(m * k) % q] += 1
    return counts


def _reduce_mod_cyclotomic(counts: list[int], q: int) -> int:
    """Exact value of sum_t counts[t] zeta_q^t, provably an integer."""
    poly = list(counts)
    phi = list(_cyclotomic(q))
    dn = len(phi) - 1
    for i in range(len(poly) - 1, dn - 1, -1):
        c = poly[i]
        if c:
            for j, d in enumerate(phi):
                poly[i - dn + j] -= c * d
    if any(poly[1:dn]):
        raise ArithmeticError("cyclotomic reduction left a non-constant remainder")
    return poly[0]


def ramanujan_bruteforce(m, q: int):
    """The literal sum of e(<m,k>/q) over primitive residue vectors k.

    One-dimensional sums are evaluated in exact cyclotomic arithmetic for
    q <= 1000.  Higher dimensions accumulate exact phase counts and evaluate
    the resulting single-variable exponential sum in floats, returning the
    verified nearest integer when the residual is below 1e-6.
    """
    mv = _as_freq(m)
    n = mv.dim
    if q < 1:
        raise ValueError("q must be >= 1")
    if q**n > _BRUTE_CELL_LIMIT:
        raise BudgetExceededError(f"brute force over {q}^{n} vectors exceeds the cell limit")
    if n == 1 and q <= _EXACT_Q_LIMIT:
        return _reduce_mod_cyclotomic(_primitive_counts_1d(mv.m[0], q), q)
    counts = _phase_counts(mv.m, q)
    value = complex(np.sum(counts * np.exp(2j * np.pi * np.arange(q) / q)))
    if abs(value.imag) > 1e-9:
        raise ArithmeticError(f"sum is not real: {value!r}")
    nearest = round(value.real)
    if abs(value.real - nearest) < 1e-6:
        return int(nearest)
    return value.real


def _phase_counts(m: tuple[int, ...], q: int) -> np.ndarray:
    """Exact counts N_t = #{primitive k : <m,k> = t mod q}."""
    n = len(m)
    axes = [np.arange(1, q + 1, dtype=np.int64) for _ in range(n)]
    g = np.gcd(axes[0].reshape([-1] + [1] * (n - 1)), q)
    for i in range(1, n):
        shape = [1] * n
        shape[i] = -1
        g = np.gcd(g, np.gcd(axes[i].reshape(shape), q))
    mask = g == 1
    phase = np.zeros([q] * n, dtype=np.int64)
    for i, mi in enumerate(m):
        shape = [1] * n
        shape[i] = -1
        phase = phase + mi * axes[i].reshape(shape)
    phase %= q
    return np.bincount(phase[mask].ravel(), minlength=q)


def ramanujan_prime_power(m, p: int, r: int) -> int:
    """c_{p^r}(m) by content cases: the only surviving Mobius terms sit at
    divisors p^r and p^(r-1), giving p^{(r-1)n}(p^n - 1), -p^{(r-1)n}, or 0."""
    mv = _as_freq(m)
    if mv.is_zero():
        raise ZeroFrequencyError("prime-power formula needs m != 0")
    n, g = mv.dim, mv.content()
    if g % p**r == 0:
        return p ** ((r - 1) * n) * (p**n - 1)
    if g % p ** (r - 1) == 0:
        return -(p ** ((r - 1) * n))
    return 0


def ramanujan_formula(m, q: int) -> int:
    """Multiplicative evaluation c_q(m) = prod over p^r || q of c_{p^r}(m)."""
    mv = _as_freq(m)
    if mv.is_zero():
        raise ZeroFrequencyError("formula route needs m != 0; c_q(0) is the primitive count")
    if q < 1:
        raise ValueError("q must be >= 1")
    out = 1
    for p, r in factorize(q):
        out *= ramanujan_prime_power(mv, p, r)
        if out == 0:
            return 0
    return out


def ramanujan_dft_table(n: int, q: int) -> np.ndarray:
    """All c_q(m) for m in (Z/q)^n at once: the DFT of the primitive mask.

    This is the literal definition evaluated by linearity; entries are
    verified near-integers and returned rounded.
    """
    if q**n > _BRUTE_CELL_LIMIT:
        raise BudgetExceededError(f"{q}^{n} cells exceed the DFT limit")
    # residues 0..q-1 so array index equals the residue; k=0 stands for k=q
    # and has the same gcd with q
    axes = [np.arange(q, dtype=np.int64) for _ in range(n)]
    g = np.gcd(axes[0].reshape([-1] + [1] * (n - 1)), q)
    for i in range(1, n):
        shape = [1] * n
        shape[i] = -1
        g = np.gcd(g, np.gcd(axes[i].reshape(shape), q))
    mask = (g == 1).astype(np.float64)
    # fftn uses e^{-2pi i <m,k>/q}; the sum wants e^{+...}: index at -m
    table = np.fft.fftn(mask)
    vals = table.real
    if np.max(np.abs(table.imag)) > 1e-5 or np.max(np.abs(vals - np.round(vals))) > 1e-5:
        raise ArithmeticError("DFT table failed integrality verification")
    rounded = np.round(vals).astype(np.int64)
    idx = [np.arange(q) for _ in range(n)]
    neg = np.ix_(*[(q - a) % q for a in idx])
    return rounded[neg]


def jordan_count(n: int, q: int, verify: bool = False) -> int:
    """Number of primitive residue vectors: q^n prod_{p|q} (1 - p^-n).

    With verify=True the multiplicative value is cross-checked against the
    literal count (q <= 200 recommended).
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    out = q**n
    for p, _ in factorize(q):
        out = out // p**n * (p**n - 1)
    if verify:
        brute = jordan_count_bruteforce(n, q)
        if brute != out:
            raise ArithmeticError(f"jordan_count mismatch at n={n}, q={q}: {out} vs {brute}")
    return out


def jordan_count_bruteforce(n: int, q: int) -> int:
    if q**n > _BRUTE_CELL_LIMIT:
        raise BudgetExceededError("brute-force primitive count too large")
    axes = [np.arange(1, q + 1, dtype=np.int64) for _ in range(n)]
    g = np.gcd(axes[0].reshape([-1] + [1] * (n - 1)), q)
    for i in range(1, n):
        shape = [1] * n
        shape[i] = -1
        g = np.gcd(g, np.gcd(axes[i].reshape(shape), q))
    return int(np.count_nonzero(g == 1))


# ---------------------------------------------------------------------------
# bump functions

_MIN_SUPPORT_SAMPLES = 32


def _profile_1d(eps: float, grid: int) -> np.ndarray:
    """Smooth compactly supported profile on the circle, unit quadrature mass.

    exp(-1/(1-(2s/eps)^2)) on arc distance s < eps/2 from the identity; the
    support half-width eps/2 keeps the n-fold product inside the eps-ball.
    """
    x = np.arange(grid) / grid
    s = np.minimum(x, 1.0 - x)
    vals = np.zeros(grid)
    inside = s < eps / 2
    u = 2.0 * s[inside] / eps
    vals[inside] = np.exp(-1.0 / (1.0 - u * u))
    mass = vals.sum() / grid
    return vals / mass


@dataclass
class BumpFunction:
    """Sampled product bump on T^n with lazily cached Fourier coefficients."""

    eps: float
    dim: int
    grid: int
    axis_samples: np.ndarray
    samples: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def integral(self) -> float:
        return float(self.samples.sum() / self.grid**self.dim)

    def l2_mass(self) -> float:
        return float((self.samples**2).sum() / self.grid**self.dim)

    def value_at_index(self, idx: Sequence[int]) -> float:
        return float(self.samples[tuple(i % self.grid for i in idx)])

    def fourier(self, m) -> complex:
        """Quadrature coefficient integral of g(x) e(<m,x>); cached per m.

        Implemented as a direct sum over the full sample tensor (no fast
        transforms, no per-axis factoring), so the product structure of the
        bump is something the coefficients exhibit rather than assume.
        """
        mv = _as_freq(m)
        if mv.dim != self.dim:
            raise ValueError("frequency dimension mismatch")
        if self.grid < 4 * max((abs(v) for v in mv.m), default=0):
            raise AliasingRiskError(f"grid {self.grid} too coarse for |m|_inf = {max(map(abs, mv.m))}")
        key = mv.m
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        # single-writer initialization: compute outside the lock, publish inside
        acc = self.samples.astype(complex)
        for axis, mi in enumerate(mv.m):
            phase = np.exp(2j * np.pi * mi * np.arange(self.grid) / self.grid)
            shape = [1] * self.dim
            shape[axis] = -1
            acc = acc * phase.reshape(shape)
        val = complex(acc.sum() / self.grid**self.dim)
        with self._lock:
            self._cache[key] = val
        return val


def build_bump(eps: float, dim: int, grid: int) -> BumpFunction:
    """Product of 1-D bumps supported strictly inside the eps-ball of 0."""
    if not (0 < eps < 1):
        raise ValueError("eps must lie in (0,1)")
    if dim < 1:
        raise ValueError("dim must be >= 1")
    axis = _profile_1d(eps, grid)
    inside = int(np.count_nonzero(axis))
    if inside < _MIN_SUPPORT_SAMPLES:
        raise GridTooCoarseError(
            f"only {inside} samples inside the support; need >= {_MIN_SUPPORT_SAMPLES}"
        )
    samples = axis
    for _ in range(dim - 1):
        samples = np.multiply.outer(samples, axis)
    return BumpFunction(eps, dim, grid, axis, samples)


def fourier_coeff(g: BumpFunction, m) -> complex:
    return g.fourier(m)


def decay_ratio_table(g: BumpFunction, m_max: int) -> list[tuple[int, float, float]]:
    """(|m|, |g_hat(m)|, |g_hat(m)| e^{sqrt(eps |m|)}) for 1 <= m <= m_max (1-D)."""
    if g.dim != 1:
        raise ValueError("decay table is one-dimensional")
    out = []
    for m in range(1, m_max + 1):
        c = abs(g.fourier((m,)))
        out.append((m, c, c * float(np.exp(np.sqrt(g.eps * m)))))
    return out


# ---------------------------------------------------------------------------
# Abel-summation tail bound


@dataclass(frozen=True)
class AdmissibleSequence:
    """Nonnegative integers s_2..s_B with S_b <= min(k b^{n+1}, k^2)."""

    k: int
    n: int
    r: float
    s: tuple[int, ...]  # s[0] is s_2

    def __post_init__(self):
        if self.k < 1 or self.n < 1:
            raise ValueError("k and n must be >= 1")
        if self.r <= 1:
            raise InadmissibleSequenceError("need r > 1")
        total = 0
        for i, sb in enumerate(self.s):
            b = i + 2
            if sb < 0:
                raise InadmissibleSequenceError("sequence entries must be nonnegative")
            total += sb
            cap = min(self.k * b ** (self.n + 1), self.k**2)
            if total > cap:
                raise InadmissibleSequenceError(f"S_{b} = {total} exceeds cap {cap}")

    def partial_sums(self) -> list[int]:
        out = []
        t = 0
        for sb in self.s:
            t += sb
            out.append(t)
        return out


def _integer_root(k: int, e: int) -> int:
    """floor(k^(1/e)) without float edge cases."""
    t = int(round(k ** (1.0 / e)))
    while t**e > k:
        t -= 1
    while (t + 1) ** e <= k:
        t += 1
    return t


def abel_tail_bound(seq: AdmissibleSequence) -> tuple[float, float]:
    """(lhs, majorant): the weighted tail sum against its explicit majorant.

    lhs = sum s_b b^-r; majorant = sum_{b <= floor(k^{1/(n+1)})} k b^{n-r}
    + 2 k^{2 - r/(n+1)}, every term evaluated literally.
    """
    k, n, r = seq.k, seq.n, seq.r
    lhs = sum(sb * (i + 2) ** (-r) for i, sb in enumerate(seq.s))
    T = _integer_root(k, n + 1)
    head = sum(k * b ** (n - r) for b in range(2, T + 1))
    majorant = head + 2.0 * k ** (2.0 - r / (n + 1))
    return float(lhs), float(majorant)


def random_admissible(k: int, n: int, r: float, length: int, rng: np.random.Generator) -> AdmissibleSequence:
    """Benign random sequence: per-site mass uniform in [0, k], cap-clamped."""
    s = []
    total = 0
    for i in range(length):
        b = i + 2
        cap = min(k * b ** (n + 1), k**2)
        draw = int(rng.integers(0, k + 1))
        draw = min(draw, cap - total)
        s.append(draw)
        total += draw
    return AdmissibleSequence(k, n, r, tuple(s))
