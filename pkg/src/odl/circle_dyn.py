"""Circle rotations, dilations, orbit unions, and quantitative-density profiles.

The headline quantity is n * gap(union of the first n rotates of A): profiles
record it along a geometric schedule of n.  Dilation searches scan x -> m*x
mod 1 for the least m making a set epsilon-dense.  The counterexample builder
assembles the sparse convergent-scale sets whose orbit unions refuse to fill
the circle at rate 1/n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .cfrac import convergent_table, expand
from .errors import (
    DepthUnreachableError,
    EmptySetError,
    RequiresExactError,
    SizeBudgetExceededError,
    budget_bytes,
)
from .geometry import (
    Metric,
    PointSet,
    Space,
    SpaceKind,
    circle_gap,
    circle_gap_array,
    gap_from_circle_values,
    semimetric_gap_arrays,
)
from .scalars import QuadSurd, Scalar, is_exact, mod1, render_scalar, to_float

#: default ratio of the geometric profile schedule
SCHEDULE_RATIO = 1.25

#: above this many points, orbit unions switch from exact to float arithmetic
EXACT_ORBIT_CAP = 5000


@dataclass(frozen=True)
class Rotation:
    """The translation x -> x + alpha (mod 1)."""

    alpha: object  # Fraction | float | QuadSurd

    def apply(self, x):
        return mod1(x + self.alpha)

    @property
    def exact(self) -> bool:
        return is_exact(self.alpha) or isinstance(self.alpha, QuadSurd)


@dataclass(frozen=True)
class ProfileRecord:
    n: int
    gap: Scalar
    scaled: Scalar

    def csv(self) -> str:
        return f"{self.n},{render_scalar(self.gap)},{render_scalar(self.scaled)}"


@dataclass
class DensityProfile:
    """Records of (n, gap, n*gap) for an orbit-union experiment.

    For profiles against the full space the gap is non-increasing in n (the
    union only grows); `covering` marks profiles where that invariant is
    enforced.  Pair profiles measure one moving set against another and are
    not monotone in general.
    """

    records: list[ProfileRecord]
    meta: dict = field(default_factory=dict)
    covering: bool = True

    def __post_init__(self):
        if self.covering:
            gaps = [to_float(r.gap) for r in self.records]
            if any(b > a for a, b in zip(gaps, gaps[1:])):
                raise ValueError("covering profile has increasing gap")

    def min_scaled(self) -> Scalar:
        return min(r.scaled for r in self.records)

    def scaled_at(self, n: int) -> Scalar:
        for r in self.records:
            if r.n == n:
                return r.scaled
        raise KeyError(f"no record at n={n}")

    def to_csv_lines(self) -> list[str]:
        return ["n,gap,scaled"] + [r.csv() for r in self.records]


def geometric_schedule(n_max: int, ratio: float = SCHEDULE_RATIO, extra: Sequence[int] = ()) -> list[int]:
    """Increasing n-schedule ceil(ratio^j) capped at n_max, n_max included."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    out = {1, n_max}
    out.update(extra)
    x = 1.0
    while True:
        x *= ratio
        n = math.ceil(x)
        if n >= n_max:
            break
        out.add(n)
    return sorted(n for n in out if 1 <= n <= n_max)


def _check_budget(n_points: int):
    if n_points * 8 > budget_bytes():
        raise SizeBudgetExceededError(f"orbit union of {n_points} points exceeds budget")


def orbit_union(T: Rotation, A: PointSet, n: int, dedup: bool = True) -> PointSet:
    """The set {x + k*alpha mod 1 : x in A, 0 <= k < n}, deduplicated."""
    if A.space.kind is not SpaceKind.CIRCLE:
        raise ValueError("orbit_union needs a circle point set")
    if len(A) == 0:
        raise EmptySetError("orbit of empty set")
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_budget(len(A) * n)
    if T.exact and A.exact and not isinstance(T.alpha, QuadSurd) and len(A) * n <= EXACT_ORBIT_CAP:
        alpha = Fraction(T.alpha)
        vals = [mod1(x + k * alpha) for x in A.values() for k in range(n)]
        return PointSet.circle(vals, dedup=dedup)
    base = A.array()[:, 0]
    alpha = to_float(T.alpha)
    shifts = (np.arange(n) * alpha) % 1.0
    vals = (base[:, None] + shifts[None, :]).ravel() % 1.0
    return PointSet.circle(vals.tolist(), dedup=dedup)


def _orbit_gap_series(base: np.ndarray, alpha: float, schedule: Sequence[int]) -> list[float]:
    """Gap of the orbit union at each scheduled n, float fast path."""
    n_max = max(schedule)
    _check_budget(base.size * n_max)
    shifts = (np.arange(n_max) * alpha) % 1.0
    table = (base[:, None] + shifts[None, :]) % 1.0  # (k, n_max)
    return [circle_gap_array(table[:, :n].ravel()) for n in schedule]


def qd_profile(
    T: Rotation,
    A: PointSet,
    n_max: int,
    schedule: Optional[Sequence[int]] = None,
) -> DensityProfile:
    """Profile of (n, gap, n*gap) for the union of the first n rotates of A."""
    schedule = list(schedule) if schedule is not None else geometric_schedule(n_max)
    if any(n > n_max for n in schedule) or schedule != sorted(set(schedule)):
        raise ValueError("schedule must be increasing and bounded by n_max")
    exact_ok = (
        T.exact
        and A.exact
        and not isinstance(T.alpha, QuadSurd)
        and len(A) * max(schedule) <= EXACT_ORBIT_CAP
    )
    records = []
    if exact_ok:
        for n in schedule:
            g = circle_gap(orbit_union(T, A, n))
            records.append(ProfileRecord(n, g, n * g))
    else:
        gaps = _orbit_gap_series(A.array()[:, 0], to_float(T.alpha), schedule)
        records = [ProfileRecord(n, g, n * g) for n, g in zip(schedule, gaps)]
    meta = {"space": "circle", "map": f"rotation alpha={render_scalar_safe(T.alpha)}", "set_size": len(A)}
    return DensityProfile(records, meta)


def render_scalar_safe(x) -> str:
    if isinstance(x, QuadSurd):
        return f"({x.a})+({x.b})*sqrt({x.d})"
    return render_scalar(x)


def dilate(A: PointSet, m: int) -> PointSet:
    """{m*x mod 1 : x in A}; collisions are merged (sets, not multisets)."""
    if A.space.kind is not SpaceKind.CIRCLE:
        raise ValueError("dilate needs a circle point set")
    if m < 1:
        raise ValueError("m must be >= 1")
    return PointSet.circle([mod1(m * x) for x in A.values()], dedup=True)


@dataclass(frozen=True)
class DilationSearch:
    """Outcome of a minimal-dilation scan: the hit, or the best miss."""

    found: bool
    m: Optional[int]
    gap: float
    best_m: int
    best_gap: float


def glasner_min_dilation(A: PointSet, eps, n_max: int, chunk: int = 512) -> DilationSearch:
    """Least m <= n_max with circle_gap(dilate(A, m)) < eps, if any."""
    if len(A) < 2:
        raise ValueError("need at least two points")
    eps_f = to_float(eps)
    if eps_f <= 0:
        raise ValueError("eps must be positive")
    base = A.array()[:, 0]
    best_m, best_gap = 1, math.inf
    for start in range(1, n_max + 1, chunk):
        ms = np.arange(start, min(start + chunk, n_max + 1))
        tbl = np.sort((ms[:, None] * base[None, :]) % 1.0, axis=1)
        inner = np.diff(tbl, axis=1).max(axis=1) if tbl.shape[1] > 1 else np.zeros(len(ms))
        wrap = 1.0 - tbl[:, -1] + tbl[:, 0]
        gaps = np.maximum(inner, wrap) / 2
        i = int(np.argmin(gaps))
        if gaps[i] < best_gap:
            best_m, best_gap = int(ms[i]), float(gaps[i])
        hits = np.nonzero(gaps < eps_f)[0]
        if hits.size:
            j = int(hits[0])
            return DilationSearch(True, int(ms[j]), float(gaps[j]), best_m, best_gap)
    return DilationSearch(False, None, best_gap, best_m, best_gap)


def dilation_density_fraction(A: PointSet, eps, n_max: int) -> float:
    """Fraction of m <= n_max whose dilation is eps-dense."""
    if len(A) == 0:
        raise EmptySetError("empty set")
    eps_f = to_float(eps)
    base = A.array()[:, 0]
    hits = 0
    for start in range(1, n_max + 1, 1024):
        ms = np.arange(start, min(start + 1024, n_max + 1))
        tbl = np.sort((ms[:, None] * base[None, :]) % 1.0, axis=1)
        inner = np.diff(tbl, axis=1).max(axis=1) if tbl.shape[1] > 1 else np.zeros(len(ms))
        wrap = 1.0 - tbl[:, -1] + tbl[:, 0]
        gaps = np.maximum(inner, wrap) / 2
        hits += int(np.count_nonzero(gaps < eps_f))
    return hits / n_max


def preimage_identity_check(X: PointSet, n: int) -> bool:
    """Exact set equality of the n-fold dilation preimage with the 1/n-rotation union.

    Pulling the dilated set back through x -> n*x produces exactly the union
    of the n rotates of X by 1/n; this checks that identity point for point.
    """
    if not X.exact:
        raise RequiresExactError("preimage identity check needs exact rational points")
    if n < 1:
        raise ValueError("n must be >= 1")
    vals = [Fraction(v) for v in X.values()]
    image = {mod1(n * x) for x in vals}
    preimage = {mod1(Fraction(y + k, n)) for y in image for k in range(n)}
    union = {mod1(x + Fraction(k, n)) for x in vals for k in range(n)}
    return preimage == union


# ---------------------------------------------------------------------------
# counterexample sets at convergent scales


def _int_log(n: int) -> float:
    """ln(n) for arbitrarily large positive integers."""
    if n < 1:
        raise ValueError("need n >= 1")
    if n.bit_length() <= 512:
        return math.log(n)
    shift = n.bit_length() - 64
    return math.log(n >> shift) + shift * math.log(2)


def triple_log_ok(q_prev: int, q_next: int) -> bool:
    """log log log(q_next) >= q_prev, evaluated safely for huge integers."""
    l1 = _int_log(q_next)
    if l1 <= 1:
        return False
    l2 = math.log(l1)
    if l2 <= 0:
        return False
    return math.log(l2) >= q_prev


GROWTH_RULES: dict[str, Callable[[int, int], bool]] = {
    "square": lambda qp, qn: qn >= qp * qp,
    "cube": lambda qp, qn: qn >= qp**3,
    "triple-log": triple_log_ok,
}


@dataclass
class CounterexampleSet:
    """Sparse set {frac(q_{n_k} alpha)} union {0} at far-separated convergent scales."""

    alpha: QuadSurd
    indices: list[int]
    q_values: list[int]
    values_exact: list[QuadSurd]
    growth_rule: str

    def __post_init__(self):
        for a, b in zip(self.values_exact, self.values_exact[1:]):
            if not b < a:
                raise ValueError("fractional parts must be strictly decreasing")
        if self.indices != sorted(self.indices) or len(set(self.indices)) != len(self.indices):
            raise ValueError("indices must be strictly increasing")

    def point_set(self) -> PointSet:
        vals = [0.0] + [to_float(v) for v in self.values_exact]
        return PointSet.circle(vals)

    def to_csv_lines(self) -> list[str]:
        """Exact export: one `a,b,d` line per surd value (plus the origin)."""
        lines = ["a,b,d", f"0,0,{self.alpha.d}"]
        for v in self.values_exact:
            lines.append(f"{render_scalar(v.a)},{render_scalar(v.b)},{v.d}")
        return lines


def build_counterexample(
    alpha: QuadSurd,
    growth="square",
    depth: int = 4,
    max_index: int = 5000,
) -> CounterexampleSet:
    """Greedily pick convergent indices n_1 < n_2 < ... with q_{n_{k+1}}
    satisfying the growth rule against q_{n_k} and strictly decreasing
    fractional parts frac(q_{n_k} alpha).

    The triple-log rule of the source construction exhausts any finite index
    range past depth 2; a pluggable surrogate rule (default: squaring)
    preserves the far-separated-scales logic at reachable depth.
    """
    if not isinstance(alpha, QuadSurd):
        raise RequiresExactError("counterexample builder needs an exact quadratic alpha")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rule_name = growth if isinstance(growth, str) else getattr(growth, "__name__", "custom")
    rule = GROWTH_RULES[growth] if isinstance(growth, str) else growth

    cf = expand(alpha, max_index)
    indices: list[int] = []
    qs: list[int] = []
    fracs: list[QuadSurd] = []
    q_prev, q = 0, 1  # q_{-1}, q_0
    for k, a in enumerate(cf.coeffs, start=1):
        q, q_prev = a * q + q_prev, q
        # growth test is pure integer work; the exact fractional part is
        # computed only for candidates that pass it
        if indices and not rule(qs[-1], q):
            continue
        f = (alpha * q).frac()
        if indices and not f < fracs[-1]:
            continue
        indices.append(k)
        qs.append(q)
        fracs.append(f)
        if len(indices) == depth:
            break
    if len(indices) < depth:
        raise DepthUnreachableError(
            f"growth rule {rule_name!r} ran out of convergents below index {max_index} "
            f"at depth {len(indices)}"
        )
    return CounterexampleSet(alpha, indices, qs, fracs, rule_name)


def qd_pair_profile(
    T: Rotation,
    A1: PointSet,
    A2: PointSet,
    n_max: int,
    schedule: Optional[Sequence[int]] = None,
) -> DensityProfile:
    """Profile of how well the orbit union of A1 covers that of A2.

    Not monotone in n: new rotates enlarge the covered side too.
    """
    for A in (A1, A2):
        if A.space.kind is not SpaceKind.CIRCLE:
            raise ValueError("pair profile needs circle point sets")
        if len(A) == 0:
            raise EmptySetError("empty set in pair profile")
    schedule = list(schedule) if schedule is not None else geometric_schedule(n_max)
    alpha = to_float(T.alpha)
    b1, b2 = A1.array()[:, 0], A2.array()[:, 0]
    _check_budget((b1.size + b2.size) * max(schedule))
    shifts = (np.arange(max(schedule)) * alpha) % 1.0
    t1 = (b1[:, None] + shifts[None, :]) % 1.0
    t2 = (b2[:, None] + shifts[None, :]) % 1.0
    records = []
    for n in schedule:
        g = semimetric_gap_arrays(t1[:, :n].ravel()[:, None], t2[:, :n].ravel()[:, None], Metric.CIRCLE_ARC)
        records.append(ProfileRecord(n, g, n * g))
    meta = {"space": "circle", "map": f"rotation alpha={render_scalar_safe(T.alpha)}", "pair": True}
    return DensityProfile(records, meta, covering=False)


# ---------------------------------------------------------------------------
# exact orbit structure at convergent scales


def exact_orbit_extremes(alpha: QuadSurd, n: int) -> tuple[QuadSurd, QuadSurd]:
    """Exact (min gap, max gap) of {frac(i*alpha) : 0 <= i < n}.

    Points are presorted by float value; that order is provably correct
    because consecutive orbit points are separated by at least the last
    convergent distance, far above float error at the feasible n.  The
    extreme gaps are then re-derived exactly as surds from the few float
    candidates.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    af = to_float(alpha)
    idx = np.argsort((np.arange(n) * af) % 1.0)
    fracs = [(alpha * int(i)).frac() for i in idx]
    fracs.append(fracs[0] + 1)
    diffs_f = np.diff([float(v) for v in fracs])
    lo = int(np.argmin(diffs_f))
    hi = int(np.argmax(diffs_f))
    # exact comparison only among float-near-tied candidates; float conversion
    # error (~1e-16) is far below the tie tolerance
    tol = 1e-9
    min_gap = min(fracs[i + 1] - fracs[i] for i in range(n) if diffs_f[i] <= diffs_f[lo] + tol)
    max_gap = max(fracs[i + 1] - fracs[i] for i in range(n) if diffs_f[i] >= diffs_f[hi] - tol)
    return min_gap, max_gap
