"""Three-interval exchange transformations as induced maps of rotations.

P exchanges the intervals [0,a), [a,b), [b,1] by translations; it is the
first-return map to [0,1] of the rotation by 1-a on the longer interval
[0, 1+b-a].  Orbit profiles measure quantitative density on [0,1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .circle_dyn import DensityProfile, ProfileRecord, geometric_schedule
from .errors import EmptySetError, NonReturnError, OutOfDomainError, SizeBudgetExceededError, budget_bytes
from .geometry import PointSet, SpaceKind, interval_gap_array, gap_from_interval_values
from .scalars import Scalar, is_exact, render_scalar, to_float

_MAX_RETURN_STEPS = 10


@dataclass(frozen=True)
class ThreeIET:
    """Nondegenerate 3-IET with breakpoints 0 < alpha < beta < 1."""

    alpha: Scalar
    beta: Scalar

    def __post_init__(self):
        if not (0 < self.alpha < self.beta < 1):
            raise ValueError("need 0 < alpha < beta < 1")

    @property
    def exact(self) -> bool:
        return is_exact(self.alpha) and is_exact(self.beta)

    def branch(self, x) -> int:
        if not (0 <= x <= 1):
            raise OutOfDomainError(f"x={x!r} outside [0,1]")
        if x < self.alpha:
            return 0
        if x < self.beta:
            return 1
        return 2

    def apply(self, x):
        """The three-branch exchange; x=1 maps through the third branch."""
        b = self.branch(x)
        if b == 0:
            return x + 1 - self.alpha
        if b == 1:
            return x + 1 - self.alpha - self.beta
        return x - self.beta

    def apply_array(self, xs: np.ndarray) -> np.ndarray:
        a, b = to_float(self.alpha), to_float(self.beta)
        return np.where(xs < a, xs + 1 - a, np.where(xs < b, xs + 1 - a - b, xs - b))

    def hits_breakpoint(self, x, tol: float = 1e-15) -> bool:
        if self.exact and is_exact(x):
            return x == self.alpha or x == self.beta
        xf = to_float(x)
        return min(abs(xf - to_float(self.alpha)), abs(xf - to_float(self.beta))) <= tol


@dataclass(frozen=True)
class SuspensionRotation:
    """Rotation by rot = 1-alpha on [0, length), length = 1+beta-alpha."""

    length: Scalar
    rot: Scalar

    def __post_init__(self):
        if not (1 < self.length < 2):
            raise ValueError("suspension length must lie in (1,2)")
        if not (0 < self.rot < 1):
            raise ValueError("rotation amount must lie in (0,1)")

    @classmethod
    def from_iet(cls, P: ThreeIET) -> "SuspensionRotation":
        one = Fraction(1) if P.exact else 1.0
        return cls(one + P.beta - P.alpha, one - P.alpha)

    def step(self, y):
        y = y + self.rot
        return y - self.length if y >= self.length else y

    def first_return(self, x) -> tuple[Scalar, int]:
        """Iterate until the orbit re-enters [0,1]; returns (point, steps).

        For a 3-IET suspension the return time is 1 or 2; more than
        _MAX_RETURN_STEPS steps signals an arithmetic bug, not slow dynamics.
        """
        if not (0 <= x <= 1):
            raise OutOfDomainError(f"x={x!r} outside [0,1]")
        y = x
        for steps in range(1, _MAX_RETURN_STEPS + 1):
            y = self.step(y)
            if y <= 1:
                return y, steps
        raise NonReturnError(f"no return to [0,1] after {_MAX_RETURN_STEPS} steps from x={x!r}")


def branch_images(P: ThreeIET) -> list[tuple[Scalar, Scalar]]:
    """Closed-open image intervals of the three branches, in branch order."""
    one = Fraction(1) if P.exact else 1.0
    return [
        (one - P.alpha, one),
        (one - P.beta, one - P.alpha),
        (0 * one, one - P.beta),
    ]


def iet_orbit_union(P: ThreeIET, A: PointSet, n: int) -> tuple[PointSet, bool]:
    """Union of the first n forward images of A; flags breakpoint hits.

    Orbits landing exactly on a discontinuity are legal (the middle branch is
    closed on the left) but flagged so downstream profiles can report it.
    """
    if A.space.kind is not SpaceKind.INTERVAL:
        raise ValueError("IET orbits live on the interval")
    if len(A) == 0:
        raise EmptySetError("orbit of empty set")
    if len(A) * n * 8 > budget_bytes():
        raise SizeBudgetExceededError(f"orbit union of {len(A) * n} points exceeds budget")
    flagged = False
    if P.exact and A.exact and len(A) * n <= 5000:
        vals = [Fraction(v) for v in A.values()]
        out = set()
        for x in vals:
            y = x
            for _ in range(n):
                out.add(y)
                if P.hits_breakpoint(y):
                    flagged = True
                y = P.apply(y)
        return PointSet.interval(sorted(out)), flagged
    xs = A.array()[:, 0]
    rows = np.empty((n, xs.size))
    rows[0] = xs
    for k in range(1, n):
        rows[k] = P.apply_array(rows[k - 1])
    a, b = to_float(P.alpha), to_float(P.beta)
    flagged = bool(np.min(np.abs(rows - a)) <= 1e-15 or np.min(np.abs(rows - b)) <= 1e-15)
    return PointSet.interval(rows.ravel().tolist()), flagged


def iet_qd_profile(
    P: ThreeIET,
    A: PointSet,
    n_max: int,
    schedule: Optional[Sequence[int]] = None,
) -> DensityProfile:
    """Quantitative-density profile of A under P against [0,1]."""
    if A.space.kind is not SpaceKind.INTERVAL:
        raise ValueError("IET profile needs an interval point set")
    if len(A) == 0:
        raise EmptySetError("empty set")
    schedule = list(schedule) if schedule is not None else geometric_schedule(n_max)
    if len(A) * max(schedule) * 8 > budget_bytes():
        raise SizeBudgetExceededError("profile exceeds budget")
    meta = {
        "space": "interval",
        "map": f"3-iet alpha={render_scalar(P.alpha)} beta={render_scalar(P.beta)}",
        "set_size": len(A),
    }
    if P.exact and A.exact and len(A) * max(schedule) <= 5000:
        records = []
        flagged = False
        for n in schedule:
            orbit, f = iet_orbit_union(P, A, n)
            flagged = flagged or f
            g = gap_from_interval_values(orbit.values())
            records.append(ProfileRecord(n, g, n * g))
        meta["hits_breakpoints"] = flagged
        return DensityProfile(records, meta)
    xs = A.array()[:, 0]
    rows = np.empty((max(schedule), xs.size))
    rows[0] = xs
    for k in range(1, max(schedule)):
        rows[k] = P.apply_array(rows[k - 1])
    a, b = to_float(P.alpha), to_float(P.beta)
    meta["hits_breakpoints"] = bool(np.min(np.abs(rows - a)) <= 1e-15 or np.min(np.abs(rows - b)) <= 1e-15)
    records = []
    for n in schedule:
        g = interval_gap_array(rows[:n].ravel())
        records.append(ProfileRecord(n, g, n * g))
    return DensityProfile(records, meta)
