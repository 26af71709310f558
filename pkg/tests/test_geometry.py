"""Gap computations on the circle, interval, and torus against brute oracles."""

from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from odl.errors import EmptySetError, ResolutionTooLargeError
from odl.geometry import (
    DensityCertificate,
    Metric,
    PointSet,
    circle_gap,
    interval_gap,
    is_eps_dense,
    semimetric_gap,
    torus_gap_upper,
)


def grid_oracle_circle(values, grid=10**6):
    """Dense-grid scan of sup dist(y, A) on the circle."""
    a = np.sort(np.asarray(values, dtype=float))
    y = np.arange(grid) / grid
    idx = np.searchsorted(a, y)
    left = a[np.clip(idx - 1, 0, a.size - 1)]
    right = a[np.clip(idx, 0, a.size - 1)]
    d = np.minimum(np.abs(y - left), np.abs(y - right))
    dl = np.abs(y - a[0])
    dr = np.abs(y - a[-1])
    d = np.minimum(d, np.minimum(np.minimum(dl, 1 - dl), np.minimum(dr, 1 - dr)))
    return float(d.max())


def grid_oracle_interval(values, grid=10**6):
    a = np.asarray(values, dtype=float)
    y = np.linspace(0.0, 1.0, grid)
    return float(np.min(np.abs(y[:, None] - a[None, :]), axis=1).max())


class TestCircleGap:
    def test_single_point(self):
        assert circle_gap(PointSet.circle([F(0)])) == F(1, 2)

    def test_equally_spaced_four(self):
        assert circle_gap(PointSet.circle([F(0), F(1, 4), F(1, 2), F(3, 4)])) == F(1, 8)

    def test_three_points_vs_grid_oracle(self):
        A = [F(0), F(1, 2), F(1, 3)]
        exact = circle_gap(PointSet.circle(A))
        assert exact == F(1, 4)
        assert abs(grid_oracle_circle(A) - 0.25) <= 2e-6

    def test_equally_spaced_exact(self):
        for k in range(1, 101):
            A = PointSet.circle([F(j, k) for j in range(k)])
            assert circle_gap(A) == F(1, 2 * k)

    def test_empty_raises(self):
        with pytest.raises(EmptySetError):
            circle_gap(PointSet.circle([], dedup=False))

    @given(st.sets(st.fractions(0, 1), min_size=1, max_size=8))
    def test_monotone_under_supersets(self, vals):
        vals = {v % 1 for v in vals}
        A = PointSet.circle(sorted(vals))
        B = PointSet.circle(sorted(vals | {F(1, 7), F(3, 5)}))
        assert circle_gap(B) <= circle_gap(A)


class TestIntervalGap:
    def test_endpoints(self):
        assert interval_gap(PointSet.interval([F(0), F(1)])) == F(1, 2)

    def test_midpoint(self):
        assert interval_gap(PointSet.interval([F(1, 2)])) == F(1, 2)

    def test_vs_grid_oracle(self):
        A = [F(0), F(1, 4), F(1)]
        assert interval_gap(PointSet.interval(A)) == F(3, 8)
        assert abs(grid_oracle_interval(A) - 0.375) <= 2e-6

    def test_edges_not_halved(self):
        # a point at 0.9 leaves a right-edge hole of full length 0.1
        assert interval_gap(PointSet.interval([F(9, 10)])) == F(9, 10)

    @given(st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=10))
    def test_matches_oracle_on_floats(self, vals):
        got = interval_gap(PointSet.interval(vals))
        assert abs(got - grid_oracle_interval(vals, grid=200_001)) <= 1e-5


class TestTorusGap:
    def test_origin_corner(self):
        A = PointSet.torus([(F(0), F(0))], 2)
        assert torus_gap_upper(A, 4) == 0.5

    def test_quarter_lattice(self):
        A = PointSet.torus([(F(i, 4), F(j, 4)) for i in range(4) for j in range(4)], 2)
        assert torus_gap_upper(A, 8) == 0.125

    def test_random_rationals_vs_monte_carlo(self, rng):
        pts = [(F(int(rng.integers(0, 50)), 50), F(int(rng.integers(0, 50)), 50)) for _ in range(10)]
        A = PointSet.torus(pts, 2)
        got = torus_gap_upper(A, 64)
        samples = rng.random((10**6, 2))
        arr = A.array()
        d = np.abs(samples[:, None, :] - arr[None, :, :])
        d = np.minimum(d, 1 - d)
        oracle = float(d.max(axis=2).min(axis=1).max())
        assert abs(got - oracle) <= 1 / 128

    def test_resolution_budget(self):
        A = PointSet.torus([(0.1, 0.2, 0.3)], 3)
        with pytest.raises(ResolutionTooLargeError):
            torus_gap_upper(A, 4096)

    def test_refinement_sandwich(self, rng):
        # finer grids can only see farther points: g(G) <= g(2G) <= g(G) + 1/(2G)
        for _ in range(100):
            k = int(rng.integers(2, 12))
            A = PointSet.torus(rng.random((k, 2)).tolist(), 2)
            for G in (16, 32):
                coarse = torus_gap_upper(A, G)
                fine = torus_gap_upper(A, 2 * G)
                assert coarse <= fine + 1e-12
                assert fine - coarse <= 1 / (2 * G) + 1e-12

    def test_l2_metric_flag(self):
        A = PointSet.torus([(F(0), F(0))], 2)
        linf = torus_gap_upper(A, 8, Metric.TORUS_LINF)
        l2 = torus_gap_upper(A, 8, Metric.TORUS_L2)
        assert l2 >= linf


class TestEpsDense:
    def test_two_points_loose(self):
        cert = is_eps_dense(PointSet.circle([F(0), F(1, 2)]), 0.3)
        assert cert.is_dense and cert.witness is None

    def test_two_points_tight(self):
        cert = is_eps_dense(PointSet.circle([F(0), F(1, 2)]), F(1, 4))
        assert not cert.is_dense
        assert cert.gap == F(1, 4)
        # the witness is a farthest point: distance to the set equals the gap
        w = cert.witness[0]
        assert min(abs(w - F(0)), 1 - abs(w - F(0)), abs(w - F(1, 2))) == F(1, 4)

    def test_torus_pair(self):
        A = PointSet.torus([(F(0), F(0)), (F(1, 2), F(1, 2))], 2)
        cert = is_eps_dense(A, 0.3, resolution=32)
        assert cert.is_dense
        assert abs(cert.gap - 0.25) <= 1 / 64


class TestSemimetricGap:
    def test_identity(self):
        A = PointSet.circle([F(0), F(1, 3)])
        assert semimetric_gap(A, A) == 0

    def test_singleton_cover(self):
        assert semimetric_gap(PointSet.circle([F(0)]), PointSet.circle([F(0), F(1, 2)])) == F(1, 2)

    def test_three_covers_one(self):
        A = PointSet.circle([F(0), F(1, 3), F(2, 3)])
        B = PointSet.circle([F(1, 6)])
        assert semimetric_gap(A, B) == F(1, 6)

    def test_converges_to_circle_gap(self, rng):
        vals = rng.random(7).tolist()
        A = PointSet.circle(vals)
        for G in (64, 256, 1024):
            Y = PointSet.circle((np.arange(G) / G).tolist())
            diff = abs(float(semimetric_gap(A, Y)) - float(circle_gap(A)))
            assert diff <= 1 / G

    def test_restriction_inequality(self, rng):
        # covering defects measured inside a subspace never beat the ambient
        # measurement by more than the constant M=1 allows
        G = 20_000
        for _ in range(100):
            ell = float(rng.uniform(0.01, 0.5))
            pts = rng.uniform(0, 1 + ell, size=int(rng.integers(2, 10)))
            inside = [p for p in pts if p <= 1.0]
            if not inside:
                continue
            gap_sub = interval_gap(PointSet.interval(inside))
            y = np.linspace(0.0, 1.0, G)
            gap_ambient = float(np.min(np.abs(y[:, None] - np.array(inside)[None, :]), axis=1).max())
            assert float(gap_sub) <= gap_ambient + 1.0 / G


class TestPointSet:
    def test_dedup_exact(self):
        A = PointSet.circle([F(0), F(1, 2), F(1, 2)])
        assert len(A) == 2

    def test_dedup_float_tolerance(self):
        A = PointSet.circle([0.25, 0.25 + 1e-13])
        assert len(A) == 1

    def test_mixed_representations_rejected(self):
        with pytest.raises(TypeError):
            PointSet.circle([F(1, 2), 0.25])

    def test_csv_rendering(self):
        A = PointSet.torus([(F(1, 3), F(0))], 2)
        assert A.to_csv_lines() == ["1/3,0"]
