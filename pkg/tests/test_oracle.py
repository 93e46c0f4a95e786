import numpy as np
import pytest

from reebsym.contour import sublevel_area, symmetrize_field
from reebsym.mesh import builtin_field
from reebsym.oracle import OracleReport, analytic_height_symmetrization, dense_grid_symmetrize, mc_sublevel_area
from reebsym.tree import Edge, MeasuredTree, TreeFunction, random_tree, symmetrize_tree


class TestReport:
    def test_fields_consistent(self):
        rep = OracleReport.compare("x", 1.5, 1.0, 0.6)
        assert rep.abs_deviation == 0.5 and rep.rel_deviation == 0.5 and rep.passed
        assert not OracleReport.compare("x", 1.5, 1.0, 0.4).passed


class TestMonteCarlo:
    def test_half_sphere(self, icospheres):
        mesh = icospheres(5)
        est = mc_sublevel_area(mesh, builtin_field(mesh, "height_z"), 0.0, 10 ** 6, 1)
        assert est.stderr == pytest.approx(5e-4, rel=0.01)
        assert abs(est.value - 0.5) <= 3 * est.stderr

    def test_below_min(self, icospheres):
        mesh = icospheres(2)
        assert mc_sublevel_area(mesh, builtin_field(mesh, "height_z"), -1.0, 10 ** 4).value == 0.0

    def test_against_exact(self, icospheres):
        mesh = icospheres(3)
        f = builtin_field(mesh, "double_bump")
        rng = np.random.default_rng(4)
        for i, t in enumerate(rng.uniform(f.values.min(), f.values.max(), 20)):
            est = mc_sublevel_area(mesh, f, t, 10 ** 5, seed=i)
            assert abs(sublevel_area(mesh, f, t) - est.value) <= 4 * max(est.stderr, 1e-5)

    def test_sample_floor(self, icospheres):
        with pytest.raises(ValueError):
            mc_sublevel_area(icospheres(1), builtin_field(icospheres(1), "height_z"), 0.0, 100)


class TestAnalytic:
    def test_odd(self):
        assert analytic_height_symmetrization(lambda z: z).sup() == 0.0

    def test_even(self):
        z = np.linspace(-0.5, 0.5, 101)
        u = analytic_height_symmetrization((z, z ** 2 - 1 / 12))
        np.testing.assert_allclose(u(z), z ** 2 - 1 / 12, atol=1e-15)

    def test_mixed(self):
        z = np.linspace(-0.5, 0.5, 101)
        u = analytic_height_symmetrization(lambda x: x ** 3 + x ** 2 - 1 / 12)
        np.testing.assert_allclose(u(z), z ** 2 - 1 / 12, atol=1e-15)

    def test_height_pipeline_matches(self, icospheres):
        mesh = icospheres(5)
        f = builtin_field(mesh, "quadratic_z")
        z = np.linspace(-0.5, 0.5, 1001)
        ref = analytic_height_symmetrization(lambda x: x ** 2 - 1 / 12)
        assert np.max(np.abs(symmetrize_field(mesh, f)(z) - ref(z))) <= 0.02 * f.osc()


class TestDenseGrid:
    def test_example(self, path_example):
        z, vals = dense_grid_symmetrize(*path_example)
        assert np.max(np.abs(vals - (1 - 4 * np.abs(z)))) <= 1e-10

    def test_seed3(self):
        tree, h = random_tree(3, 8)
        z, vals = dense_grid_symmetrize(tree, h)
        assert np.max(np.abs(symmetrize_tree(tree, h)(z) - vals)) <= 1e-9

    def test_odd_single_edge(self):
        tree = MeasuredTree([0, 1], [Edge(0, 0, 1, 1.0)])
        s = np.linspace(0, 1, 11)
        h = TreeFunction(tree, {0: -0.5, 1: 0.5}, {0: (s, s - 0.5)})
        _, vals = dense_grid_symmetrize(tree, h)
        assert np.max(np.abs(vals)) <= 1e-12

    def test_grid_floor(self, path_example):
        with pytest.raises(ValueError):
            dense_grid_symmetrize(*path_example, n_grid=100)
