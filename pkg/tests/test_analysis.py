import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reebsym.analysis import (banach_indicatrix_sum, classify, growth_lower_bound, holder_bound, period_profile,
                              profile_hofer_bound, sikorav_estimate)
from reebsym.contour import build_contour_tree
from reebsym.errors import BadK, EpsTooLarge, NonMonotoneProfile
from reebsym.mesh import builtin_field
from reebsym.profile import EvenProfile, norm_k, norms_up_to
from reebsym.tree import Edge, MeasuredTree, TreeFunction


def quadratic():
    return EvenProfile.from_function(lambda z: z ** 2 - 1 / 12, 2001)


def tent():
    return EvenProfile([0.0, 0.5], [1.0, -1.0])


class TestGrowth:
    def test_zero(self):
        assert growth_lower_bound(EvenProfile.zero())[0] == 0.0

    def test_quadratic(self):
        rho, w = growth_lower_bound(quadratic())
        assert rho == pytest.approx(1 / 12, abs=1e-6)
        assert (w.k, w.B) == (1, 0.5)

    def test_tent(self):
        rho, w = growth_lower_bound(tent())
        assert rho == 1.0 and w.k == 1

    def test_classify(self):
        assert classify(EvenProfile.zero(), 1e-9).verdict == "Bounded"
        assert classify(EvenProfile.zero(), 1e-9).hofer_bound == 19
        c = classify(quadratic(), 1e-3)
        assert c.verdict == "Linear" and c.to_dict()["witness"] == {"k": 1, "B": 0.5}

    def test_grid_floor(self):
        with pytest.raises(ValueError):
            growth_lower_bound(tent(), 5, 10)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-50, 50).filter(lambda t: abs(t) > 1e-3))
    def test_scale_consistent(self, t):
        base = classify(quadratic(), 0.01)
        scaled = classify(t * quadratic(), 0.01 * abs(t))
        assert scaled.verdict == base.verdict
        assert scaled.rho_lower == pytest.approx(abs(t) * base.rho_lower, rel=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_bounded_by_sup(self, seed):
        rng = np.random.default_rng(seed)
        z = np.concatenate([[0], np.sort(rng.uniform(0, 0.5, 8)), [0.5]])
        u = EvenProfile(z, rng.normal(size=10))
        assert growth_lower_bound(u, 12, 64)[0] <= u.sup() + 1e-15


class TestBounds:
    def test_sikorav(self):
        assert sikorav_estimate(1, 4) == 1.0
        assert sikorav_estimate(0, 6) == 0.5
        assert sikorav_estimate(5, 1) == 8
        with pytest.raises(BadK):
            sikorav_estimate(1, 0)

    def test_profile_hofer(self):
        assert profile_hofer_bound(EvenProfile.zero(), 1000) == 0.006
        assert profile_hofer_bound(EvenProfile.zero(), 2) == 3
        expected = min(norm_k(tent(), k) + 6 / k for k in range(2, 11))
        assert profile_hofer_bound(tent(), 10) == expected
        with pytest.raises(BadK):
            profile_hofer_bound(tent(), 1)

    def test_vectorized_norms(self):
        u = EvenProfile.from_function(lambda z: np.cos(9 * z) * z, 301)
        np.testing.assert_array_equal(norms_up_to(u, 40), [norm_k(u, k) for k in range(2, 41)])

    def test_holder(self):
        assert holder_bound(0, 123.0, 6) == 0
        assert holder_bound(0.01, 10, 6) == pytest.approx(3 * math.sqrt(6) * 0.1 * math.sqrt(11), rel=1e-15)
        with pytest.raises(EpsTooLarge):
            holder_bound(1.5, 1, 6)


class TestPeriodAndIndicatrix:
    def test_height_period(self, icospheres):
        mesh = icospheres(4)
        tree, h = build_contour_tree(mesh, builtin_field(mesh, "height_z"))
        T = period_profile(tree, h, 0)
        assert T.weighted_mean() == pytest.approx(1.0, rel=1e-9)
        assert np.all(T.values > 0)

    def test_flat_segment_rejected(self):
        tree = MeasuredTree([0, 1], [Edge(0, 0, 1, 1.0)])
        h = TreeFunction(tree, {0: 0.0, 1: 1.0}, {0: ([0.0, 0.5, 1.0], [0.0, 0.0, 1.0])})
        with pytest.raises(NonMonotoneProfile):
            period_profile(tree, h, 0)

    def test_indicatrix_example(self, path_example):
        tree, h = path_example
        assert banach_indicatrix_sum(tree, h.node_values) == 4.0

    def test_indicatrix_double_bump(self, icospheres):
        mesh = icospheres(3)
        tree, h = build_contour_tree(mesh, builtin_field(mesh, "double_bump"))
        spans = sum(abs(h.node_values[e.u] - h.node_values[e.v]) for e in tree.edges)
        assert banach_indicatrix_sum(tree, h.node_values) == pytest.approx(spans)
