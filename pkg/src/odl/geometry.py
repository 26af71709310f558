"""Point sets on S^1, [0,1], and T^n with covering-gap computation.

The central quantity is the one-sided Hausdorff semimetric gap
sup_{y in Y} dist(y, A): how far a point of the space can be from the set A.
On the circle and interval it is computed exactly from sorted coordinates;
on the torus it is estimated on a uniform grid with a certified one-sided
error of half a grid cell.

All types are immutable values; every operation is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import EmptySetError, ResolutionTooLargeError, budget_bytes
from .scalars import (
    FLOAT_EQ_TOL,
    Scalar,
    check_scalar,
    circle_dist,
    is_exact,
    mod1,
    render_scalar,
    scalar_kind,
    to_float,
)


class SpaceKind(str, Enum):
    CIRCLE = "circle"
    INTERVAL = "interval"
    TORUS = "torus"


@dataclass(frozen=True)
class Space:
    kind: SpaceKind
    dim: int = 1

    def __post_init__(self):
        if self.kind in (SpaceKind.CIRCLE, SpaceKind.INTERVAL) and self.dim != 1:
            raise ValueError(f"{self.kind.value} is one-dimensional")
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")

    @classmethod
    def circle(cls) -> "Space":
        return cls(SpaceKind.CIRCLE)

    @classmethod
    def interval(cls) -> "Space":
        return cls(SpaceKind.INTERVAL)

    @classmethod
    def torus(cls, n: int) -> "Space":
        return cls(SpaceKind.TORUS, n)

    def __str__(self):
        if self.kind is SpaceKind.TORUS:
            return f"torus{self.dim}"
        return self.kind.value


class Metric(str, Enum):
    CIRCLE_ARC = "circle_arc"
    INTERVAL_ABS = "interval_abs"
    TORUS_LINF = "torus_linf"
    TORUS_L2 = "torus_l2"


def default_metric(space: Space) -> Metric:
    if space.kind is SpaceKind.CIRCLE:
        return Metric.CIRCLE_ARC
    if space.kind is SpaceKind.INTERVAL:
        return Metric.INTERVAL_ABS
    return Metric.TORUS_LINF


def _reduce_coord(x, space: Space):
    x = check_scalar(x)
    if space.kind is SpaceKind.INTERVAL:
        lo = 0 <= x <= 1
        if not lo:
            raise ValueError(f"interval coordinate {x!r} outside [0,1]")
        return x
    return mod1(x)


@dataclass(frozen=True)
class Point:
    coords: tuple
    space: Space

    def __post_init__(self):
        if len(self.coords) != self.space.dim:
            raise ValueError("coordinate count does not match space dimension")
        reduced = tuple(_reduce_coord(c, self.space) for c in self.coords)
        scalar_kind(reduced)  # reject mixed representations
        object.__setattr__(self, "coords", reduced)

    @property
    def exact(self) -> bool:
        return all(is_exact(c) for c in self.coords)

    def value(self):
        """Single coordinate, for 1-D spaces."""
        if self.space.dim != 1:
            raise ValueError("value() only for 1-D spaces")
        return self.coords[0]


def point_dist(x: Point, y: Point, metric: Optional[Metric] = None):
    """Distance between two points of the same space."""
    if x.space != y.space:
        raise ValueError("points from different spaces")
    metric = metric or default_metric(x.space)
    if metric is Metric.CIRCLE_ARC:
        return circle_dist(x.coords[0], y.coords[0])
    if metric is Metric.INTERVAL_ABS:
        return abs(x.coords[0] - y.coords[0])
    per_axis = [circle_dist(a, b) for a, b in zip(x.coords, y.coords)]
    if metric is Metric.TORUS_LINF:
        return max(per_axis)
    return math.sqrt(sum(to_float(d) ** 2 for d in per_axis))


class PointSet:
    """Finite ordered set of points in one space.

    With dedup=True (the default) duplicates are removed: exactly for
    rational points, at tolerance 1e-12 for float points (wrap-aware on
    circle and torus).
    """

    __slots__ = ("points", "space", "dedup")

    def __init__(self, points: Sequence[Point], space: Optional[Space] = None, dedup: bool = True):
        points = list(points)
        if space is None:
            if not points:
                raise ValueError("need a space for an empty point set")
            space = points[0].space
        for p in points:
            if p.space != space:
                raise ValueError("mixed spaces in point set")
        if dedup:
            points = _dedup_points(points, space)
        self.points = tuple(points)
        self.space = space
        self.dedup = dedup

    @classmethod
    def circle(cls, values: Iterable, dedup: bool = True) -> "PointSet":
        sp = Space.circle()
        return cls([Point((v,), sp) for v in values], sp, dedup)

    @classmethod
    def interval(cls, values: Iterable, dedup: bool = True) -> "PointSet":
        sp = Space.interval()
        return cls([Point((v,), sp) for v in values], sp, dedup)

    @classmethod
    def torus(cls, rows: Iterable[Sequence], n: int, dedup: bool = True) -> "PointSet":
        sp = Space.torus(n)
        return cls([Point(tuple(r), sp) for r in rows], sp, dedup)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def exact(self) -> bool:
        return all(p.exact for p in self.points)

    def values(self) -> tuple:
        """Coordinates of a 1-D set, in input order."""
        if self.space.dim != 1:
            raise ValueError("values() only for 1-D spaces")
        return tuple(p.coords[0] for p in self.points)

    def array(self) -> np.ndarray:
        """(len, dim) float array of coordinates."""
        return np.array([[to_float(c) for c in p.coords] for p in self.points], dtype=float)

    def to_csv_lines(self) -> list[str]:
        return [",".join(render_scalar(c) for c in p.coords) for p in self.points]


def _dedup_points(points: list[Point], space: Space) -> list[Point]:
    if not points:
        return points
    if all(p.exact for p in points):
        seen = set()
        out = []
        for p in points:
            if p.coords not in seen:
                seen.add(p.coords)
                out.append(p)
        return out
    wrap = space.kind is not SpaceKind.INTERVAL
    out = []
    for p in points:
        dup = False
        for q in out:
            deltas = (
                circle_dist(to_float(a), to_float(b)) if wrap else abs(to_float(a) - to_float(b))
                for a, b in zip(p.coords, q.coords)
            )
            if max(deltas) <= FLOAT_EQ_TOL:
                dup = True
                break
        if dup:
            continue
        out.append(p)
    return out


# ---------------------------------------------------------------------------
# gap computations


def gap_from_circle_values(values) -> Scalar:
    """Half the largest circular gap of a nonempty list of circle coordinates.

    Accepts any orderable scalars supporting subtraction (Fraction, float,
    QuadSurd), so exact-surd orbits can reuse it.
    """
    vals = sorted(values)
    if not vals:
        raise EmptySetError("empty circle set")
    one = Fraction(1) if is_exact(vals[0]) or hasattr(vals[0], "frac") else 1.0
    best = one - vals[-1] + vals[0]  # wrap-around arc
    for a, b in zip(vals, vals[1:]):
        d = b - a
        if d > best:
            best = d
    return best / 2


def gap_from_interval_values(values) -> Scalar:
    """sup over [0,1] of distance to a nonempty sorted-able value list.

    Edge gaps count at full length: 0 and 1 are not identified.
    """
    vals = sorted(values)
    if not vals:
        raise EmptySetError("empty interval set")
    one = Fraction(1) if is_exact(vals[0]) else 1.0
    best = max(vals[0] - 0 * one, one - vals[-1])
    for a, b in zip(vals, vals[1:]):
        half = (b - a) / 2
        if half > best:
            best = half
    return best


def circle_gap(A: PointSet) -> Scalar:
    """Covering gap sup_{y in S^1} dist(y, A); exact for exact inputs."""
    if A.space.kind is not SpaceKind.CIRCLE:
        raise ValueError("circle_gap needs a circle point set")
    if len(A) == 0:
        raise EmptySetError("circle_gap of empty set")
    return gap_from_circle_values(A.values())


def circle_gap_array(values: np.ndarray) -> float:
    """Float fast path of circle_gap for a nonempty array of values in [0,1)."""
    if values.size == 0:
        raise EmptySetError("circle_gap of empty set")
    s = np.sort(values)
    wrap = 1.0 - s[-1] + s[0]
    if s.size == 1:
        return wrap / 2
    inner = np.diff(s).max()
    return max(inner, wrap) / 2


def interval_gap(A: PointSet) -> Scalar:
    """Covering gap sup_{y in [0,1]} dist(y, A)."""
    if A.space.kind is not SpaceKind.INTERVAL:
        raise ValueError("interval_gap needs an interval point set")
    if len(A) == 0:
        raise EmptySetError("interval_gap of empty set")
    return gap_from_interval_values(A.values())


def interval_gap_array(values: np.ndarray) -> float:
    if values.size == 0:
        raise EmptySetError("interval_gap of empty set")
    s = np.sort(values)
    edge = max(s[0], 1.0 - s[-1])
    if s.size == 1:
        return edge
    return max(edge, np.diff(s).max() / 2)


def _axis_circle_dists(coords: np.ndarray, G: int) -> np.ndarray:
    """(k, G) matrix of arc distances from k coordinates to the grid j/G."""
    g = np.arange(G) / G
    d = np.abs(coords[:, None] - g[None, :])
    return np.minimum(d, 1.0 - d)


def torus_grid_distances(pts: np.ndarray, G: int, metric: Metric = Metric.TORUS_LINF) -> np.ndarray:
    """Distance from every G^n grid point to the nearest of pts (k, n)."""
    k, n = pts.shape
    axis = [_axis_circle_dists(pts[:, i], G) for i in range(n)]
    if metric is Metric.TORUS_LINF:
        acc = axis[0][:, :]
        for i in range(1, n):
            shape = (k,) + (1,) * i + (G,)
            acc = np.maximum(acc[..., None], axis[i].reshape(shape))
    elif metric is Metric.TORUS_L2:
        acc = axis[0][:, :] ** 2
        for i in range(1, n):
            shape = (k,) + (1,) * i + (G,)
            acc = acc[..., None] + (axis[i].reshape(shape)) ** 2
        acc = np.sqrt(acc)
    else:
        raise ValueError(f"not a torus metric: {metric}")
    return acc.min(axis=0)


def grid_cell_halfwidth(G: int, dim: int, metric: Metric = Metric.TORUS_LINF) -> float:
    """One-sided error of the grid gap estimate: half a grid cell."""
    if metric is Metric.TORUS_L2:
        return math.sqrt(dim) / (2 * G)
    return 1.0 / (2 * G)


def torus_gap_upper(
    A: PointSet,
    resolution: int,
    metric: Metric = Metric.TORUS_LINF,
    cell_budget: Optional[int] = None,
) -> float:
    """Grid estimate g_hat of the covering gap on T^n.

    The true gap g satisfies g_hat <= g <= g_hat + half the grid-cell
    diameter (1/(2G) under the L-infinity metric).
    """
    if A.space.kind is not SpaceKind.TORUS:
        raise ValueError("torus_gap_upper needs a torus point set")
    if len(A) == 0:
        raise EmptySetError("torus_gap_upper of empty set")
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    n = A.space.dim
    cells = resolution**n
    budget = cell_budget if cell_budget is not None else budget_bytes() // 16
    if cells > budget:
        raise ResolutionTooLargeError(f"{resolution}^{n} grid cells exceed budget {budget}")
    return float(torus_grid_distances(A.array(), resolution, metric).max())


@dataclass(frozen=True)
class DensityCertificate:
    """Outcome of an epsilon-density check with the witnessing farthest point."""

    is_dense: bool
    gap: Scalar
    eps: Scalar
    witness: Optional[tuple] = field(default=None)

    def __bool__(self):
        return self.is_dense


def _circle_witness(values) -> tuple:
    vals = sorted(values)
    one = Fraction(1) if is_exact(vals[0]) else 1.0
    best, mid = one - vals[-1] + vals[0], mod1(vals[-1] + (one - vals[-1] + vals[0]) / 2)
    for a, b in zip(vals, vals[1:]):
        if b - a > best:
            best, mid = b - a, (a + b) / 2
    return (mid,)


def _interval_witness(values) -> tuple:
    vals = sorted(values)
    one = Fraction(1) if is_exact(vals[0]) else 1.0
    cands = [(vals[0], 0 * one), (one - vals[-1], one)]
    for a, b in zip(vals, vals[1:]):
        cands.append(((b - a) / 2, (a + b) / 2))
    return (max(cands, key=lambda t: t[0])[1],)


def is_eps_dense(
    A: PointSet,
    eps: Scalar,
    resolution: Optional[int] = None,
    metric: Optional[Metric] = None,
) -> DensityCertificate:
    """Whether the gap estimate is < eps; exact on circle/interval, grid on torus."""
    if to_float(eps) <= 0:
        raise ValueError("eps must be positive")
    kind = A.space.kind
    if kind is SpaceKind.CIRCLE:
        gap = circle_gap(A)
        witness = None if gap < eps else _circle_witness(A.values())
    elif kind is SpaceKind.INTERVAL:
        gap = interval_gap(A)
        witness = None if gap < eps else _interval_witness(A.values())
    else:
        if resolution is None:
            raise ValueError("torus density check needs a grid resolution")
        metric = metric or Metric.TORUS_LINF
        dists = torus_grid_distances(A.array(), resolution, metric)
        idx = np.unravel_index(int(np.argmax(dists)), dists.shape)
        gap = float(dists[idx])
        witness = None if gap < eps else tuple(i / resolution for i in idx)
    return DensityCertificate(bool(gap < eps), gap, eps, witness)


def semimetric_gap(A: PointSet, B: PointSet, metric: Optional[Metric] = None) -> Scalar:
    """One-sided covering defect sup_{b in B} dist(b, A).

    Measures how well A covers B; zero iff every point of B is a point of A.
    """
    if len(A) == 0:
        raise EmptySetError("semimetric_gap needs nonempty covering set A")
    if A.space != B.space:
        raise ValueError("semimetric_gap needs sets in the same space")
    if len(B) == 0:
        return Fraction(0) if A.exact else 0.0
    if A.exact and B.exact and len(A) * len(B) <= 250_000:
        return max(min(point_dist(b, a, metric) for a in A) for b in B)
    return semimetric_gap_arrays(A.array(), B.array(), metric or default_metric(A.space))


def semimetric_gap_arrays(a: np.ndarray, b: np.ndarray, metric: Metric) -> float:
    """Float fast path of semimetric_gap on coordinate arrays."""
    if metric in (Metric.CIRCLE_ARC, Metric.INTERVAL_ABS):
        av = np.sort(a.ravel())
        bv = b.ravel()
        idx = np.searchsorted(av, bv)
        wrap = metric is Metric.CIRCLE_ARC
        left = av[np.clip(idx - 1, 0, av.size - 1)]
        right = av[np.clip(idx, 0, av.size - 1)]
        d = np.minimum(np.abs(bv - left), np.abs(bv - right))
        if wrap:
            d_first = np.abs(bv - av[0])
            d_last = np.abs(bv - av[-1])
            d = np.minimum(d, np.minimum(np.minimum(d_first, 1 - d_first), np.minimum(d_last, 1 - d_last)))
        return float(d.max())
    diff = np.abs(b[:, None, :] - a[None, :, :])
    diff = np.minimum(diff, 1.0 - diff)
    per_pair = diff.max(axis=2) if metric is Metric.TORUS_LINF else np.sqrt((diff**2).sum(axis=2))
    return float(per_pair.min(axis=1).max())
