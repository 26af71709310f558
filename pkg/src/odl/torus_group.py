"""Integer-matrix actions on T^n.

Word-ball enumeration over standard generating sets, epsilon-dense search
over a ball, exact pair statistics of rational point sets, random-walk
equidistribution on rational points (where the orbit is finite and exactly
computable), and commuting families with their Lyapunov data.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    LeafMismatchError,
    NotCommutingError,
    NotErgodicError,
    RequiresExactError,
)
from .geometry import Metric, Point, PointSet, Space, SpaceKind, torus_grid_distances
from .scalars import mod1

_ERGODIC_TOL = 1e-9
_MAX_UNITY_ORDER = 12


class IntMatrix:
    """Exact integer matrix of determinant 1."""

    __slots__ = ("n", "rows")

    def __init__(self, rows: Sequence[Sequence[int]]):
        rows = tuple(tuple(int(v) for v in r) for r in rows)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix must be square")
        self.n = n
        self.rows = rows
        if _det(rows) != 1:
            raise ValueError(f"determinant must be 1, got {_det(rows)}")

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.n != other.n:
            raise DimensionMismatchError("matrix sizes differ")
        b_cols = tuple(zip(*other.rows))
        return IntMatrix(
            tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in b_cols) for row in self.rows)
        )

    def inverse(self) -> "IntMatrix":
        return IntMatrix(_adjugate(self.rows))  # det 1: inverse = adjugate

    def power(self, e: int) -> "IntMatrix":
        base = self if e >= 0 else self.inverse()
        result = IntMatrix.identity(self.n)
        for _ in range(abs(e)):
            result = result @ base
        return result

    def max_entry(self) -> int:
        return max(abs(v) for row in self.rows for v in row)

    def array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float)

    def __eq__(self, other):
        return isinstance(other, IntMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"IntMatrix({list(map(list, self.rows))})"


def _det(rows) -> int:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = 0
    for j, v in enumerate(rows[0]):
        if v:
            minor = tuple(r[:j] + r[j + 1 :] for r in rows[1:])
            total += (-1) ** j * v * _det(minor)
    return total


def _adjugate(rows):
    n = len(rows)
    if n == 1:
        return ((1,),)
    out = []
    for i in range(n):
        out.append(
            tuple(
                (-1) ** (i + j)
                * _det(tuple(r[:j] + r[j + 1 :] for k, r in enumerate(rows) if k != i))
                for j in range(n)
            )
        )
    # adjugate is the transpose of the cofactor matrix
    return tuple(zip(*out))


def standard_generators(n: int) -> list[IntMatrix]:
    """Symmetric standard generating set of SL(n,Z).

    n=2: the order-4 rotation S and the shear T (and inverses); n>=3:
    elementary transvections E_ij(+-1).  Small entries keep exact word
    arithmetic fast.
    """
    if n == 2:
        s = IntMatrix([[0, -1], [1, 0]])
        t = IntMatrix([[1, 1], [0, 1]])
        return [s, t, s.inverse(), t.inverse()]
    gens = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for sign in (1, -1):
                rows = [[1 if a == b else 0 for b in range(n)] for a in range(n)]
                rows[i][j] = sign
                gens.append(IntMatrix(rows))
    return gens


def act(gamma: IntMatrix, x: Point) -> Point:
    """gamma @ x mod Z^n; exact on rational points."""
    if x.space.kind is not SpaceKind.TORUS or x.space.dim != gamma.n:
        raise DimensionMismatchError("matrix and point dimensions disagree")
    coords = tuple(mod1(sum(g * c for g, c in zip(row, x.coords))) for row in gamma.rows)
    return Point(coords, x.space)


def act_set(gamma: IntMatrix, A: PointSet) -> PointSet:
    return PointSet([act(gamma, p) for p in A], A.space, dedup=A.dedup)


@dataclass
class GroupBall:
    """All words of length <= radius over a symmetric generator set, deduplicated.

    Deterministic breadth-first order: elements[0] is the identity and
    word_lengths is non-decreasing, so "first element found" is reproducible.
    """

    generators: list[IntMatrix]
    radius: int
    elements: list[IntMatrix]
    word_lengths: list[int]
    truncated: bool = False

    def __len__(self):
        return len(self.elements)

    def arrays(self) -> np.ndarray:
        return np.array([m.rows for m in self.elements], dtype=float)


def enumerate_ball(generators: Sequence[IntMatrix], radius: int, budget: Optional[int] = None) -> GroupBall:
    """Breadth-first word ball; dedup by exact entries; flags budget truncation."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    gens = list(generators)
    ident = IntMatrix.identity(gens[0].n) if gens else IntMatrix.identity(1)
    seen = {ident: 0}
    elements = [ident]
    lengths = [0]
    frontier = [ident]
    truncated = False
    for r in range(1, radius + 1):
        nxt = []
        for m in frontier:
            for g in gens:
                mg = m @ g
                if mg in seen:
                    continue
                if budget is not None and len(elements) >= budget:
                    truncated = True
                    break
                seen[mg] = r
                elements.append(mg)
                lengths.append(r)
                nxt.append(mg)
            if truncated:
                break
        frontier = nxt
        if truncated:
            break
    return GroupBall(gens, radius, elements, lengths, truncated)


@dataclass(frozen=True)
class DenseSearch:
    """First ball element whose image is eps-dense, or the best miss."""

    found: bool
    gamma: Optional[IntMatrix]
    index: Optional[int]
    word_length: Optional[int]
    gap: float
    best_gamma: IntMatrix
    best_index: int
    best_gap: float


def search_eps_dense(
    A: PointSet,
    eps,
    ball: GroupBall,
    resolution: int,
    metric: Metric = Metric.TORUS_LINF,
) -> DenseSearch:
    """Scan the ball in order for gamma with grid-checked gap < eps."""
    if A.space.kind is not SpaceKind.TORUS:
        raise ValueError("search needs a torus point set")
    eps_f = float(eps)
    if eps_f <= 0:
        raise ValueError("eps must be positive")
    pts = A.array()
    best_gap, best_idx = math.inf, 0
    for idx, gamma in enumerate(ball.elements):
        img = (pts @ gamma.array().T) % 1.0
        gap = float(torus_grid_distances(img, resolution, metric).max())
        if gap < best_gap:
            best_gap, best_idx = gap, idx
        if gap < eps_f:
            return DenseSearch(
                True, gamma, idx, ball.word_lengths[idx], gap,
                ball.elements[best_idx], best_idx, best_gap,
            )
    return DenseSearch(
        False, None, None, None, best_gap, ball.elements[best_idx], best_idx, best_gap
    )


# ---------------------------------------------------------------------------
# pair statistics


def rational_difference_order(x: Point, y: Point) -> int:
    """Least positive q with q*(x - y) integral; exact points only."""
    if not (x.exact and y.exact):
        raise RequiresExactError("difference order needs exact rational points")
    if x.space != y.space:
        raise DimensionMismatchError("points from different spaces")
    q = 1
    for a, b in zip(x.coords, y.coords):
        q = q * (d := (Fraction(a) - Fraction(b)).denominator) // math.gcd(q, d)
    return q


@dataclass
class PairStats:
    """h_m counts of ordered pairs whose difference is m-torsion, and H_m sums."""

    k: int
    h: dict[int, int]
    H: dict[int, int]
    dim: int

    def bound_holds(self, m: int) -> bool:
        return self.H[m] <= self.k * m ** (self.dim + 1)


def pair_stats(A: PointSet, m_max: int) -> PairStats:
    """Exact h_m = #{(i,j) : m(x_i - x_j) integral}, diagonal included."""
    if not A.exact:
        raise RequiresExactError("pair statistics need exact rational points")
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    pts = list(A)
    k = len(pts)
    orders = []
    for i in range(k):
        for j in range(i + 1, k):
            orders.append(rational_difference_order(pts[i], pts[j]))
    h = {}
    for m in range(1, m_max + 1):
        h[m] = k + 2 * sum(1 for q in orders if m % q == 0)
    H = {}
    total = 0
    for m in range(1, m_max + 1):
        total += h[m]
        H[m] = total
    return PairStats(k, h, H, A.space.dim)


# ---------------------------------------------------------------------------
# random-walk equidistribution at rational points


def _residue_vector(x: Point) -> tuple[int, tuple[int, ...]]:
    if not x.exact:
        raise RequiresExactError("walks are tested at exact rational points only")
    fracs = [Fraction(c) for c in x.coords]
    q = 1
    for f in fracs:
        q = q * f.denominator // math.gcd(q, f.denominator)
    return q, tuple((f.numerator * (q // f.denominator)) % q for f in fracs)


def _apply_mod(rows, v, q):
    return tuple(sum(g * c for g, c in zip(row, v)) % q for row in rows)


def orbit_closure_mod(x: Point, generators: Sequence[IntMatrix]) -> tuple[int, list[tuple[int, ...]]]:
    """Exact orbit of x under the group generated mod its denominator q."""
    q, v0 = _residue_vector(x)
    seen = {v0}
    frontier = [v0]
    while frontier:
        nxt = []
        for v in frontier:
            for g in generators:
                w = _apply_mod(g.rows, v, q)
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return q, sorted(seen)


@dataclass
class WalkReport:
    """Cesaro empirical distribution of the inverse walk against orbit-uniform."""

    q: int
    orbit: list[tuple[int, ...]]
    horizons: list[int]
    tv: list[dict[int, float]]  # one {horizon: tv} dict per trial

    @property
    def orbit_size(self) -> int:
        return len(self.orbit)

    def final_tv(self) -> list[float]:
        h = self.horizons[-1]
        return [t[h] for t in self.tv]


def walk_equidistribution(
    x: Point,
    generators: Sequence[IntMatrix],
    steps: int,
    trials: int = 1,
    weights: Optional[Sequence[float]] = None,
    seed: int = 0,
    horizons: Optional[Sequence[int]] = None,
) -> WalkReport:
    """Simulate the Cesaro averages (1/N) sum_k law(gamma_k^{-1} x).

    The product of k iid generator draws, inverted, has the law of a plain
    k-step walk by the inverse generators (reversal of an iid product), so a
    single Markov chain per trial suffices.  The state space is the exact
    finite orbit mod q; the report carries total-variation distances to the
    uniform distribution on that orbit at each horizon.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    q, orbit = orbit_closure_mod(x, generators)
    index = {v: i for i, v in enumerate(orbit)}
    inv_rows = [g.inverse().rows for g in generators]
    _, v0 = _residue_vector(x)
    # per-generator permutation of the orbit under the inverse action
    perms = []
    for rows in inv_rows:
        perms.append(np.array([index[_apply_mod(rows, v, q)] for v in orbit]))
    if weights is None:
        p = np.full(len(generators), 1.0 / len(generators))
    else:
        p = np.asarray(weights, dtype=float)
        if p.shape != (len(generators),) or (p <= 0).any():
            raise ValueError("weights must be positive, one per generator")
        p = p / p.sum()
    if horizons is None:
        horizons = []
        h = 16
        while h < steps:
            horizons.append(h)
            h *= 2
        horizons.append(steps)
    horizons = sorted(set(horizons))
    uniform = 1.0 / len(orbit)
    all_tv = []
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))
        choices = rng.choice(len(generators), size=steps, p=p)
        counts = np.zeros(len(orbit), dtype=np.int64)
        state = index[v0]
        counts[state] += 1  # k = 0 term: the identity
        tvs = {}
        hs = iter(horizons)
        next_h = next(hs)
        for step in range(1, steps):
            state = perms[choices[step]][state]
            counts[state] += 1
            if step + 1 == next_h:
                tvs[next_h] = 0.5 * float(np.abs(counts / next_h - uniform).sum())
                next_h = next(hs, None) or steps + 1
        if steps not in tvs:
            tvs[steps] = 0.5 * float(np.abs(counts / steps - uniform).sum())
        all_tv.append(tvs)
    return WalkReport(q, orbit, list(horizons), all_tv)


# ---------------------------------------------------------------------------
# commuting families and Lyapunov data

_COMBO_COEFFS = [1.0, math.sqrt(2), math.sqrt(3), math.sqrt(5), math.sqrt(7)]


@dataclass
class AbelianAction:
    """Commuting integer matrices with their Lyapunov functionals.

    exponents[i] is the vector (log|lambda_i(g_1)|, ..., log|lambda_i(g_k)|);
    directions[i] is the associated (real) eigen direction when it exists.
    """

    gens: list[IntMatrix]
    rank: int
    dim: int
    exponents: list[np.ndarray]
    directions: list[Optional[np.ndarray]]
    general_position: bool
    notes: dict = field(default_factory=dict)

    def chi(self, chi_index: int, n: Sequence[int]) -> float:
        return float(np.dot(self.exponents[chi_index], np.asarray(n, dtype=float)))

    def power(self, n: Sequence[int]) -> IntMatrix:
        out = IntMatrix.identity(self.dim)
        for g, e in zip(self.gens, n):
            out = out @ g.power(int(e))
        return out


def _unity_roots(max_order: int) -> np.ndarray:
    roots = set()
    for s in range(1, max_order + 1):
        for t in range(s):
            roots.add(complex(np.exp(2j * np.pi * t / s)))
    return np.array(sorted(roots, key=lambda z: (z.real, z.imag)))


def lyapunov_data(gens: Sequence[IntMatrix]) -> AbelianAction:
    """Eigenvalue clusters and Lyapunov functionals of a commuting family.

    Raises NotCommuting on a non-commuting pair and NotErgodic when some
    generator has an eigenvalue within 1e-9 of a root of unity of order <= 12
    (a coarser test than true ergodicity, by design).
    """
    gens = list(gens)
    if not gens:
        raise ValueError("need at least one generator")
    dim = gens[0].n
    for a, b in itertools.combinations(gens, 2):
        if a @ b != b @ a:
            raise NotCommutingError(f"{a!r} and {b!r} do not commute")
    combo = sum(c * g.array() for c, g in zip(_COMBO_COEFFS, gens))
    evals, evecs = np.linalg.eig(combo)
    lam = np.empty((dim, len(gens)), dtype=complex)
    for i in range(dim):
        v = evecs[:, i]
        j = int(np.argmax(np.abs(v)))
        for g_idx, g in enumerate(gens):
            w = g.array() @ v
            lam[i, g_idx] = w[j] / v[j]
            if np.max(np.abs(w - lam[i, g_idx] * v)) > 1e-7 * max(1.0, g.max_entry()):
                raise ValueError("generators are not simultaneously diagonalizable to tolerance")
    roots = _unity_roots(_MAX_UNITY_ORDER)
    for g_idx in range(len(gens)):
        dmin = np.abs(lam[:, g_idx][:, None] - roots[None, :]).min()
        if dmin < _ERGODIC_TOL:
            raise NotErgodicError(f"generator {g_idx} has an eigenvalue {dmin:.2e} from a root of unity")
    chi_all = np.log(np.abs(lam))  # (dim, k)
    # cluster conjugate pairs / repeated moduli
    used = np.zeros(dim, dtype=bool)
    exponents: list[np.ndarray] = []
    directions: list[Optional[np.ndarray]] = []
    simple = True
    for i in range(dim):
        if used[i]:
            continue
        members = [j for j in range(dim) if not used[j] and np.max(np.abs(chi_all[j] - chi_all[i])) < 1e-9]
        for j in members:
            used[j] = True
        if len(members) > 1:
            simple = False
        exponents.append(chi_all[i].copy())
        v = evecs[:, i]
        if np.max(np.abs(v.imag)) < 1e-9 and len(members) == 1:
            vr = v.real
            vr = vr / vr[np.argmax(np.abs(vr))]
            directions.append(vr)
        else:
            directions.append(None)
    nonzero = all(np.max(np.abs(chi)) > 1e-9 for chi in exponents)
    distinct_hyperplanes = True
    for a, b in itertools.combinations(exponents, 2):
        ua, ub = a / np.linalg.norm(a), b / np.linalg.norm(b)
        if min(np.linalg.norm(ua - ub), np.linalg.norm(ua + ub)) < 1e-9:
            distinct_hyperplanes = False
    eig_simple = True
    for a, b in itertools.combinations(range(dim), 2):
        if abs(evals[a] - evals[b]) < 1e-9:
            eig_simple = False
    gp = simple and nonzero and distinct_hyperplanes and eig_simple
    return AbelianAction(
        gens, len(gens), dim, exponents, directions, gp,
        notes={"eigenvalues": lam, "cluster_count": len(exponents)},
    )


def box_order(k: int, radius: int, include_zero: bool = True) -> Iterator[tuple[int, ...]]:
    """Integer vectors of sup-norm <= radius, by shell then lexicographic order."""
    if include_zero:
        yield (0,) * k
    for r in range(1, radius + 1):
        for v in itertools.product(range(-r, r + 1), repeat=k):
            if max(abs(c) for c in v) == r:
                yield v


def chi_density_search(
    action: AbelianAction, chi_index: int, eps: float, box_radius: int
) -> Optional[tuple[int, ...]]:
    """Some nonzero n in the box with |chi(n)| <= eps, in deterministic order."""
    if not action.general_position:
        raise ValueError("chi density search needs Lyapunov data in general position")
    if eps <= 0:
        raise ValueError("eps must be positive")
    for n in box_order(action.rank, box_radius, include_zero=False):
        if abs(action.chi(chi_index, n)) <= eps:
            return n
    return None


@dataclass(frozen=True)
class SubordinateSearch:
    found: bool
    n: Optional[tuple[int, ...]]
    gap: float
    best_n: tuple[int, ...]
    best_gap: float
    leaf_coefficients: tuple[float, ...]


def leaf_coefficients(A: PointSet, direction: np.ndarray, lift_bound: int = 3, tol: float = 1e-8) -> np.ndarray:
    """Coefficients p_j with x_j - x_0 = p_j * v mod Z^n, or LeafMismatch.

    Differences are lifted by integer vectors up to lift_bound in sup norm and
    projected on the leaf direction; a residual above tol on every lift means
    the set does not sit on one leaf line.
    """
    pts = A.array()
    v = np.asarray(direction, dtype=float)
    v = v / np.linalg.norm(v)
    n = pts.shape[1]
    lifts = np.array(list(itertools.product(range(-lift_bound, lift_bound + 1), repeat=n)), dtype=float)
    coeffs = [0.0]
    for j in range(1, pts.shape[0]):
        d = pts[j] - pts[0]
        cands = d[None, :] + lifts
        proj = cands @ v
        resid = np.linalg.norm(cands - proj[:, None] * v[None, :], axis=1)
        i = int(np.argmin(resid))
        if resid[i] > tol:
            raise LeafMismatchError(f"point {j} is {resid[i]:.2e} off the leaf line")
        coeffs.append(float(proj[i]))
    return np.asarray(coeffs)


def subordinate_search_eps_dense(
    action: AbelianAction,
    A: PointSet,
    eps: float,
    box_radius: int,
    resolution: int,
    chi_index: int,
    metric: Metric = Metric.TORUS_LINF,
) -> SubordinateSearch:
    """Search the Z^k box for n with alpha(n)A eps-dense per grid check.

    Needs a well-defined real leaf direction for chi_index (simple nonzero
    exponent); full general position is not required, so rank-1 hyperbolic
    actions are searchable too.
    """
    if A.space.kind is not SpaceKind.TORUS or A.space.dim != action.dim:
        raise DimensionMismatchError("set and action dimensions disagree")
    direction = action.directions[chi_index]
    if direction is None:
        raise LeafMismatchError("chosen exponent has no real leaf direction")
    coeffs = leaf_coefficients(A, direction)
    pts = A.array()
    best_gap, best_n = math.inf, (0,) * action.rank
    for n in box_order(action.rank, box_radius, include_zero=True):
        m = action.power(n).array()
        img = (pts @ m.T) % 1.0
        gap = float(torus_grid_distances(img, resolution, metric).max())
        if gap < best_gap:
            best_gap, best_n = gap, n
        if gap < eps:
            return SubordinateSearch(True, n, gap, best_n, best_gap, tuple(coeffs))
    return SubordinateSearch(False, None, best_gap, best_n, best_gap, tuple(coeffs))
