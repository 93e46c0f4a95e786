import numpy as np
import pytest

from reebsym.contour import (arcs_spanning, build_contour_tree, contour_tree, critical_points,
                             level_component_count, sublevel_area, symmetrize_field)
from reebsym.errors import DegenerateFieldError
from reebsym.mesh import ScalarField, builtin_field
from reebsym.tree import MeasuredTree, count_reeb_edges


def kinds(crit):
    out = {"minimum": 0, "maximum": 0, "saddle": 0}
    for c in crit:
        out[c.kind] += c.multiplicity if c.kind == "saddle" else 1
    return out


class TestCriticalPoints:
    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_height_has_two(self, icospheres, n):
        assert kinds(critical_points(icospheres(n), builtin_field(icospheres(n), "height_z"))) == \
            {"minimum": 1, "maximum": 1, "saddle": 0}

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_double_bump(self, icospheres, n):
        assert kinds(critical_points(icospheres(n), builtin_field(icospheres(n), "double_bump"))) == \
            {"minimum": 1, "maximum": 2, "saddle": 1}

    @pytest.mark.parametrize("name", ["quadratic_z", "double_bump", "cubic_z"])
    def test_morse_count(self, icospheres, name):
        k = kinds(critical_points(icospheres(4), builtin_field(icospheres(4), name)))
        assert k["minimum"] - k["saddle"] + k["maximum"] == 2

    def test_random_field_morse_count(self, icospheres):
        mesh = icospheres(3)
        vals = np.random.default_rng(2).normal(size=mesh.n_vertices)
        k = kinds(critical_points(mesh, vals))
        assert k["minimum"] - k["saddle"] + k["maximum"] == 2


class TestContourTree:
    def test_height_single_edge(self, icospheres):
        mesh = icospheres(5)
        tree, h = build_contour_tree(mesh, builtin_field(mesh, "height_z"))
        assert count_reeb_edges(tree) == 1
        assert tree.edges[0].measure == pytest.approx(1.0, abs=1e-9)
        s, y = h.profiles[0]
        # area coordinate minus 1/2 tracks the normalized height
        assert np.max(np.abs((s if y[-1] > y[0] else 1 - s) - 0.5 - y)) < 0.01

    def test_height_x_same_shape(self, icospheres):
        mesh = icospheres(5)
        tree, _ = build_contour_tree(mesh, builtin_field(mesh, "height_x"))
        assert count_reeb_edges(tree) == 1

    def test_double_bump_three_edges(self, icospheres):
        mesh = icospheres(4)
        ct = contour_tree(mesh, builtin_field(mesh, "double_bump"))
        assert count_reeb_edges(ct.tree) == 3 and len(ct.tree.nodes) == 4
        assert len(ct.raw_arcs) == ct.n_critical - 1
        assert sorted(ct.tree.degree(v) for v in ct.tree.nodes) == [1, 1, 1, 3]

    def test_single_node_tree(self):
        assert count_reeb_edges(MeasuredTree([0], [])) == 0

    def test_constant_field_rejected(self, icospheres):
        mesh = icospheres(2)
        with pytest.raises(DegenerateFieldError):
            build_contour_tree(mesh, ScalarField(mesh, np.zeros(mesh.n_vertices)))

    def test_profiles_strictly_monotone(self, icospheres):
        mesh = icospheres(4)
        for name in ("double_bump", "quadratic_z", "cubic_z"):
            tree, h = build_contour_tree(mesh, builtin_field(mesh, name))
            for e in tree.edges:
                s, y = h.profiles[e.id]
                assert np.all(np.diff(s) > 0) and np.all(np.diff(y) > 0)

    def test_random_field(self, icospheres):
        mesh = icospheres(3)
        vals = np.random.default_rng(8).normal(size=mesh.n_vertices)
        ct = contour_tree(mesh, vals)
        assert abs(sum(e.measure for e in ct.tree.edges) - 1) <= 1e-9
        for t in np.random.default_rng(1).uniform(vals.min(), vals.max(), 10):
            assert level_component_count(mesh, vals, t) == arcs_spanning(ct, vals, t)

    def test_tied_values_handled(self, icospheres):
        mesh = icospheres(3)
        vals = np.round(builtin_field(mesh, "double_bump").values, 1)
        ct = contour_tree(mesh, vals)
        assert abs(sum(e.measure for e in ct.tree.edges) - 1) <= 1e-9


class TestSublevelArea:
    def test_half_at_zero(self, icospheres):
        mesh = icospheres(5)
        assert sublevel_area(mesh, builtin_field(mesh, "height_z"), 0.0) == pytest.approx(0.5, abs=1e-3)

    def test_extremes(self, icospheres):
        mesh = icospheres(3)
        f = builtin_field(mesh, "double_bump")
        assert sublevel_area(mesh, f, f.values.min() - 1) == 0.0
        assert sublevel_area(mesh, f, f.values.max() + 1) == pytest.approx(1.0, abs=1e-12)

    def test_matches_tree_measure(self, icospheres):
        mesh = icospheres(4)
        f = builtin_field(mesh, "height_z")
        tree, h = build_contour_tree(mesh, f)
        s, y = h.profiles[0]
        i = len(s) // 3
        assert sublevel_area(mesh, f, y[i]) == pytest.approx(s[i], abs=1e-12)


class TestSymmetrizeField:
    def test_height_vanishes(self, icospheres):
        mesh = icospheres(4)
        f = builtin_field(mesh, "height_z")
        assert symmetrize_field(mesh, f).sup() <= 0.02 * f.osc()

    def test_zero_field(self, icospheres):
        mesh = icospheres(2)
        assert symmetrize_field(mesh, builtin_field(mesh, "zero")).sup() == 0.0
