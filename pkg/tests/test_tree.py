import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reebsym.errors import MeanNotZeroError, UnknownEdgeError
from reebsym.oracle import dense_grid_symmetrize
from reebsym.profile import inner_radius
from reebsym.tree import (Edge, MeasuredTree, TreeFunction, count_reeb_edges, elementary_decompose,
                          random_function_on, random_tree, single_edge_function, subtree_measure,
                          symmetrize_elementary, symmetrize_tree, tree_from_dict, tree_to_dict)


def star(n=3):
    edges = [Edge(i, 0, i + 1, 1.0 / n) for i in range(n)]
    return MeasuredTree(range(n + 1), edges)


def single_edge_linear(alpha):
    tree = MeasuredTree([0, 1], [Edge(0, 0, 1, 1.0)])
    return tree, TreeFunction(tree, {0: alpha, 1: -alpha}, {0: ([0.0, 1.0], [alpha, -alpha])})


class TestMeasuredTree:
    def test_rejects_cycle(self):
        with pytest.raises(ValueError):
            MeasuredTree([0, 1, 2], [Edge(0, 0, 1, 0.5), Edge(1, 1, 0, 0.5)])

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            MeasuredTree([0, 1], [Edge(0, 0, 1, 0.9)])

    def test_rejects_zero_measure(self):
        with pytest.raises(ValueError):
            MeasuredTree([0, 1, 2], [Edge(0, 0, 1, 1.0), Edge(1, 1, 2, 0.0)])

    def test_subtree_measure_single_edge(self):
        tree = MeasuredTree([0, 1], [Edge(0, 0, 1, 1.0)])
        assert subtree_measure(tree, 0, 0) == 0.0
        assert subtree_measure(tree, 0, 1) == 0.0

    def test_subtree_measure_path(self, path_example):
        tree, _ = path_example
        assert subtree_measure(tree, 0, 1) == 0.5
        assert subtree_measure(tree, 0, 0) == 0.0

    def test_subtree_measure_star_centre(self):
        assert subtree_measure(star(), 1, 0) == pytest.approx(2 / 3)

    def test_unknown_edge(self, path_example):
        with pytest.raises(UnknownEdgeError):
            subtree_measure(path_example[0], 7, 0)

    def test_side_measures_agree_with_direct_sums(self):
        for seed in range(20):
            tree, _ = random_tree(seed, 12)
            sides = tree.side_measures()
            for e in tree.edges:
                assert sides[e.id][0] == pytest.approx(subtree_measure(tree, e.id, e.u), abs=1e-14)
                assert sides[e.id][1] == pytest.approx(subtree_measure(tree, e.id, e.v), abs=1e-14)
                assert sum(sides[e.id]) + e.measure == pytest.approx(1.0, abs=1e-12)

    def test_count_edges(self, path_example):
        assert count_reeb_edges(path_example[0]) == 2


class TestTreeFunction:
    def test_endpoint_continuity_enforced(self, path_example):
        tree, _ = path_example
        with pytest.raises(ValueError):
            TreeFunction(tree, {0: -3.0, 1: 1.0, 2: 1.0},
                         {0: ([0.0, 0.5], [-3.0, 0.9]), 1: ([0.0, 0.5], [1.0, 1.0])})

    def test_mean_of_example(self, path_example):
        assert path_example[1].mean() == 0.0

    def test_combine_and_scale(self, path_example):
        tree, h = path_example
        g = h.combine(h, 2.0, -1.0)
        assert g.sup_distance(h) == 0.0
        assert h.scaled(-2.5).osc() == pytest.approx(10.0)

    def test_json_round_trip(self):
        tree, h = random_tree(4, 6)
        tree2, h2 = tree_from_dict(json.loads(json.dumps(tree_to_dict(h))))
        assert [e.measure for e in tree2.edges] == [e.measure for e in tree.edges]
        for e in tree.edges:
            assert np.array_equal(h.profiles[e.id][1], h2.profiles[e.id][1])


class TestDecomposition:
    def test_example_has_one_nontrivial_piece(self, path_example):
        tree, h = path_example
        pieces = elementary_decompose(tree, h)
        assert not pieces[0].is_trivial(1e-12)
        assert pieces[1].is_trivial(1e-12)

    def test_pieces_are_mean_zero_and_sum_to_h(self):
        tree, h = random_tree(5, 5)
        pieces = elementary_decompose(tree, h)
        assert len(pieces) == 5
        fns = [p.as_tree_function(tree) for p in pieces]
        for f in fns:
            assert abs(f.mean()) < 1e-12
        total = fns[0]
        for f in fns[1:]:
            total = total + f
        assert total.sup_distance(h) < 1e-10

    def test_rejects_nonzero_mean(self, path_example):
        tree, h = path_example
        with pytest.raises(MeanNotZeroError):
            elementary_decompose(tree, h.shifted(0.1))


class TestSymmetrize:
    def test_example_is_tent(self, path_example, zgrid):
        tree, h = path_example
        u = symmetrize_tree(tree, h)
        assert np.max(np.abs(u(zgrid) - (1 - 4 * np.abs(zgrid)))) <= 1e-12

    def test_scaling(self, path_example, zgrid):
        tree, h = path_example
        u = symmetrize_tree(tree, h.scaled(-2.5))
        assert np.max(np.abs(u(zgrid) + 2.5 * (1 - 4 * np.abs(zgrid)))) <= 1e-12

    @pytest.mark.parametrize("alpha", [1.0, -0.3, 7.0])
    def test_odd_single_edge_vanishes(self, alpha):
        tree, h = single_edge_linear(alpha)
        assert symmetrize_tree(tree, h).sup() <= 1e-15

    def test_quadratic_single_edge(self, zgrid):
        tree, h = single_edge_function(lambda s: s ** 2 - 1 / 3, 2 ** 18 + 1)
        u = symmetrize_tree(tree, h)
        assert np.max(np.abs(u(zgrid) - (zgrid ** 2 - 1 / 12))) <= 1e-11

    def test_elementary_sup_bound(self):
        tree, h = random_tree(8, 7)
        for p in elementary_decompose(tree, h):
            assert symmetrize_elementary(tree, p).sup() <= np.max(np.abs(p.y - p.offset)) + 1e-12

    def test_orientation_does_not_matter(self):
        tree, h = random_tree(9, 6)
        flipped_edges, profiles = [], {}
        for e in tree.edges:
            s, y = h.profiles[e.id]
            flipped_edges.append(Edge(e.id, e.v, e.u, e.measure))
            profiles[e.id] = (e.measure - s[::-1], y[::-1])
        flipped = MeasuredTree(tree.nodes, flipped_edges)
        g = TreeFunction(flipped, h.node_values, profiles)
        assert symmetrize_tree(flipped, g).sup_distance(symmetrize_tree(tree, h)) < 1e-12

    def test_disjoint_elementary_sum(self, path_example):
        tree, _ = path_example
        a = TreeFunction(tree, {0: -1.0, 1: 1.0, 2: 1.0},
                         {0: ([0.0, 0.5], [-1.0, 1.0]), 1: ([0.0, 0.5], [1.0, 1.0])}).normalized()
        b = TreeFunction(tree, {0: 0.0, 1: 0.0, 2: 2.0},
                         {0: ([0.0, 0.5], [0.0, 0.0]), 1: ([0.0, 0.5], [0.0, 2.0])}).normalized()
        lhs = symmetrize_tree(tree, a + b)
        rhs = symmetrize_tree(tree, a) + symmetrize_tree(tree, b)
        assert lhs.sup_distance(rhs) <= 1e-15

    def test_warns_and_renormalizes(self, path_example):
        tree, h = path_example
        with pytest.warns(RuntimeWarning):
            u = symmetrize_tree(tree, h.shifted(0.5))
        assert u.sup_distance(symmetrize_tree(tree, h)) < 1e-14

    def test_edge_order_bit_stable(self):
        tree, h = random_tree(12, 9)
        a = symmetrize_tree(tree, h)
        b = symmetrize_tree(tree, h)
        assert np.array_equal(a.values, b.values)


class TestRandomTree:
    def test_single_edge(self):
        tree, h = random_tree(1, 1)
        assert tree.n_edges == 1 and tree.edges[0].measure == 1.0

    def test_shape_and_measure(self):
        tree, h = random_tree(7, 10)
        assert len(tree.nodes) == 11 and tree.n_edges == 10
        assert abs(sum(e.measure for e in tree.edges) - 1) <= 1e-12
        assert abs(h.mean()) <= 1e-12

    def test_deterministic(self):
        a, ha = random_tree(7, 10)
        b, hb = random_tree(7, 10)
        assert json.dumps(tree_to_dict(ha)) == json.dumps(tree_to_dict(hb))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 15))
def test_matches_grid_oracle(seed, n_edges):
    tree, h = random_tree(seed, n_edges)
    z, ref = dense_grid_symmetrize(tree, h)
    assert np.max(np.abs(symmetrize_tree(tree, h)(z) - ref)) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 15),
       st.floats(-10, 10, allow_nan=False), st.floats(-10, 10, allow_nan=False))
def test_linearity_property(seed, n_edges, a, b):
    tree, h = random_tree(seed, n_edges)
    g = random_function_on(tree, seed + 1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        lhs = symmetrize_tree(tree, h.combine(g, a, b).normalized())
    rhs = a * symmetrize_tree(tree, h) + b * symmetrize_tree(tree, g)
    assert lhs.sup_distance(rhs) <= 1e-11


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 15), st.integers(2, 10))
def test_lipschitz_property(seed, n_edges, k):
    tree, h = random_tree(seed, n_edges)
    g = random_function_on(tree, seed + 7)
    d = symmetrize_tree(tree, h) - symmetrize_tree(tree, g)
    assert d.sup_on(0.0, inner_radius(k)) <= (k - 1) * h.sup_distance(g) + 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 15))
def test_even_mean_zero_and_oscillation(seed, n_edges):
    tree, h = random_tree(seed, n_edges)
    u = symmetrize_tree(tree, h)
    assert abs(u.integral()) <= 1e-10
    assert u.osc() <= tree.n_edges * h.osc() + 1e-10
