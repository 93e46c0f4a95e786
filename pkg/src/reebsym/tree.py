"""Measured trees, functions on them, and their combinatorial symmetrization.

A measured tree carries a probability measure that is Lebesgue on every edge
and has no atoms at the nodes.  A tree function is continuous and
piecewise linear in the measure coordinate ``s`` of each edge, running from
``s = 0`` at the edge's ``u`` endpoint to ``s = measure`` at ``v``.

The symmetrization of a mean-zero tree function is assembled from its
elementary components: every edge ``e = [v, w]`` contributes the even part of
the step/ramp function that equals h(v) on the first mu(T_{e,v}) of the
interval, follows h along e in measure coordinates, and equals h(w) on the
rest.
"""

from __future__ import annotations

import json
import logging
import warnings
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import MeanNotZeroError, ResidualError, UnknownEdgeError
from .profile import HALF, EvenProfile, sum_profiles

logger = logging.getLogger(__name__)

MEASURE_TOL = 1e-12
MEAN_TOL = 1e-10
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class Edge:
    id: int
    u: int
    v: int
    measure: float

    def other(self, node: int) -> int:
        if node == self.u:
            return self.v
        if node == self.v:
            return self.u
        raise ValueError(f"node {node} is not an endpoint of edge {self.id}")


class MeasuredTree:
    """Finite tree with a probability measure living on edge interiors."""

    def __init__(self, nodes: Iterable[int], edges: Iterable[Edge], measure_tol: float = MEASURE_TOL):
        self.nodes: tuple[int, ...] = tuple(int(n) for n in nodes)
        self.edges: tuple[Edge, ...] = tuple(sorted(edges, key=lambda e: e.id))
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise ValueError("duplicate node ids")
        self._edge_by_id: dict[int, Edge] = {}
        self.adjacency: dict[int, list[Edge]] = {n: [] for n in self.nodes}
        for e in self.edges:
            if e.id in self._edge_by_id:
                raise ValueError(f"duplicate edge id {e.id}")
            if e.u not in node_set or e.v not in node_set or e.u == e.v:
                raise ValueError(f"edge {e.id} has invalid endpoints ({e.u}, {e.v})")
            if not e.measure > 0.0:
                raise ValueError(f"edge {e.id} has non-positive measure {e.measure}")
            self._edge_by_id[e.id] = e
            self.adjacency[e.u].append(e)
            self.adjacency[e.v].append(e)
        if len(self.edges) != len(self.nodes) - 1:
            raise ValueError(f"{len(self.nodes)} nodes and {len(self.edges)} edges cannot form a tree")
        if self.nodes and len(self._reachable(self.nodes[0], None)) != len(self.nodes):
            raise ValueError("graph is not connected")
        total = sum(e.measure for e in self.edges)
        if self.edges and abs(total - 1.0) > measure_tol:
            raise ValueError(f"edge measures sum to {total!r}, expected 1")

    def __repr__(self):
        return f"MeasuredTree(nodes={len(self.nodes)}, edges={len(self.edges)})"

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge(self, eid: int) -> Edge:
        try:
            return self._edge_by_id[eid]
        except KeyError:
            raise UnknownEdgeError(f"no edge with id {eid}") from None

    def degree(self, node: int) -> int:
        return len(self.adjacency[node])

    def leaves(self) -> list[int]:
        return [n for n in self.nodes if self.degree(n) == 1]

    def _reachable(self, start: int, blocked_edge: int | None) -> set[int]:
        seen = {start}
        queue = deque([start])
        while queue:
            n = queue.popleft()
            for e in self.adjacency[n]:
                if e.id == blocked_edge:
                    continue
                m = e.other(n)
                if m not in seen:
                    seen.add(m)
                    queue.append(m)
        return seen

    def component_edges(self, eid: int, endpoint: int) -> list[int]:
        """Edge ids of T_{e,endpoint}: the part of the tree minus the open edge
        that contains ``endpoint``."""
        e = self.edge(eid)
        if endpoint not in (e.u, e.v):
            raise ValueError(f"node {endpoint} is not an endpoint of edge {eid}")
        nodes = self._reachable(endpoint, eid)
        return sorted({f.id for n in nodes for f in self.adjacency[n] if f.id != eid})

    def side_measures(self) -> dict[int, tuple[float, float]]:
        """(mu(T_{e,u}), mu(T_{e,v})) for every edge, from one rooted traversal."""
        if not self.edges:
            return {}
        root = self.nodes[0]
        parent_edge: dict[int, Edge | None] = {root: None}
        order = [root]
        for n in order:
            for e in self.adjacency[n]:
                m = e.other(n)
                if m not in parent_edge:
                    parent_edge[m] = e
                    order.append(m)
        below = {n: 0.0 for n in self.nodes}  # measure of the subtree hanging below n
        for n in reversed(order):
            pe = parent_edge[n]
            if pe is not None:
                below[pe.other(n)] += below[n] + pe.measure
        total = sum(e.measure for e in self.edges)
        out = {}
        for n in order[1:]:
            e = parent_edge[n]
            child_side = below[n]
            parent_side = total - e.measure - child_side
            out[e.id] = (child_side, parent_side) if e.u == n else (parent_side, child_side)
        return out


def subtree_measure(tree: MeasuredTree, eid: int, endpoint: int) -> float:
    """mu(T_{e,endpoint}) by direct summation over the component."""
    return float(sum(tree.edge(f).measure for f in tree.component_edges(eid, endpoint)))


def count_reeb_edges(tree: MeasuredTree) -> int:
    return tree.n_edges


class TreeFunction:
    """Continuous PL function on a measured tree.

    ``profiles[e] = (s, y)`` with ``s`` running from 0 to ``measure(e)`` and
    ``y[0]``, ``y[-1]`` equal to the values at the ``u`` and ``v`` nodes.
    """

    def __init__(self, tree: MeasuredTree, node_values: Mapping[int, float],
                 profiles: Mapping[int, tuple[np.ndarray, np.ndarray]]):
        self.tree = tree
        self.node_values = {int(n): float(node_values[n]) for n in tree.nodes}
        self.profiles: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        for e in tree.edges:
            if e.id not in profiles:
                raise ValueError(f"missing profile for edge {e.id}")
            s, y = (np.array(a, dtype=np.float64) for a in profiles[e.id])
            if s.ndim != 1 or s.shape != y.shape or len(s) < 2:
                raise ValueError(f"edge {e.id}: profile must have >= 2 matching points")
            if s[0] != 0.0 or abs(s[-1] - e.measure) > 1e-12 * max(1.0, e.measure):
                raise ValueError(f"edge {e.id}: profile must span [0, {e.measure}], got [{s[0]}, {s[-1]}]")
            s[-1] = e.measure
            if np.any(np.diff(s) < 0.0):
                raise ValueError(f"edge {e.id}: profile coordinates must be non-decreasing")
            if y[0] != self.node_values[e.u] or y[-1] != self.node_values[e.v]:
                raise ValueError(f"edge {e.id}: profile endpoints disagree with node values")
            s.setflags(write=False)
            y.setflags(write=False)
            self.profiles[e.id] = (s, y)

    def __repr__(self):
        return f"TreeFunction({self.tree!r}, osc={self.osc():.6g})"

    # reductions
    def mean(self) -> float:
        total = 0.0
        for e in self.tree.edges:
            s, y = self.profiles[e.id]
            total += float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(s)))
        return total

    def max(self) -> float:
        return max(float(y.max()) for _, y in self.profiles.values()) if self.profiles \
            else max(self.node_values.values())

    def min(self) -> float:
        return min(float(y.min()) for _, y in self.profiles.values()) if self.profiles \
            else min(self.node_values.values())

    def osc(self) -> float:
        return self.max() - self.min()

    def sup(self) -> float:
        return max(abs(self.max()), abs(self.min()))

    def evaluate(self, eid: int, s):
        ps, py = self.profiles[eid]
        return np.interp(s, ps, py)

    # arithmetic
    def map_values(self, fn) -> "TreeFunction":
        nv = {n: float(fn(np.float64(v))) for n, v in self.node_values.items()}
        prof = {}
        for eid, (s, y) in self.profiles.items():
            yy = np.asarray(fn(y), dtype=float).copy()
            e = self.tree.edge(eid)
            yy[0], yy[-1] = nv[e.u], nv[e.v]
            prof[eid] = (s, yy)
        return TreeFunction(self.tree, nv, prof)

    def shifted(self, c: float) -> "TreeFunction":
        return self.map_values(lambda y: y + c)

    def scaled(self, t: float) -> "TreeFunction":
        return self.map_values(lambda y: t * y)

    def normalized(self) -> "TreeFunction":
        return self.shifted(-self.mean())

    def combine(self, other: "TreeFunction", a: float = 1.0, b: float = 1.0) -> "TreeFunction":
        """a*self + b*other on the merged breakpoint grids (same tree)."""
        if other.tree is not self.tree:
            raise ValueError("tree functions live on different trees")
        nv = {n: a * self.node_values[n] + b * other.node_values[n] for n in self.tree.nodes}
        prof = {}
        for e in self.tree.edges:
            s1, y1 = self.profiles[e.id]
            s2, y2 = other.profiles[e.id]
            s = np.union1d(s1, s2)
            y = a * np.interp(s, s1, y1) + b * np.interp(s, s2, y2)
            y[0], y[-1] = nv[e.u], nv[e.v]
            prof[e.id] = (s, y)
        return TreeFunction(self.tree, nv, prof)

    def __add__(self, other: "TreeFunction") -> "TreeFunction":
        return self.combine(other)

    def __sub__(self, other: "TreeFunction") -> "TreeFunction":
        return self.combine(other, 1.0, -1.0)

    def sup_distance(self, other: "TreeFunction") -> float:
        return (self - other).sup()


# --- elementary decomposition -------------------------------------------------------

@dataclass(frozen=True)
class ElementaryFunction:
    """h_e: equals h on e, h(u) on T_{e,u}, h(v) on T_{e,v}, minus its mean."""

    edge: Edge
    s: np.ndarray
    y: np.ndarray
    side_u: float
    side_v: float
    u_side_edges: frozenset
    offset: float

    @property
    def value_u(self) -> float:
        return float(self.y[0])

    @property
    def value_v(self) -> float:
        return float(self.y[-1])

    def is_trivial(self, tol: float = 0.0) -> bool:
        return float(np.max(np.abs(self.y - self.offset))) <= tol

    def as_tree_function(self, tree: MeasuredTree) -> TreeFunction:
        nv = {}
        side_u_nodes = tree._reachable(self.edge.u, self.edge.id)
        for n in tree.nodes:
            nv[n] = (self.value_u if n in side_u_nodes else self.value_v) - self.offset
        prof = {}
        for f in tree.edges:
            if f.id == self.edge.id:
                prof[f.id] = (self.s, self.y - self.offset)
            else:
                c = nv[f.u]
                prof[f.id] = (np.array([0.0, f.measure]), np.array([c, c]))
        return TreeFunction(tree, nv, prof)


def elementary_decompose(tree: MeasuredTree, h: TreeFunction,
                         mean_tol: float = MEAN_TOL, residual_tol: float = RESIDUAL_TOL) -> list[ElementaryFunction]:
    """Split a mean-zero tree function into one mean-zero elementary piece per edge.

    The residual h - sum_e h_e is constant on every edge by construction; it
    is evaluated per edge and must vanish to ``residual_tol``.
    """
    mean = h.mean()
    if abs(mean) > mean_tol:
        raise MeanNotZeroError(f"tree function has mean {mean!r}")
    sides = tree.side_measures()
    pieces = []
    for e in tree.edges:
        s, y = h.profiles[e.id]
        mu_u, mu_v = sides[e.id]
        on_edge = float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(s)))
        offset = y[0] * mu_u + on_edge + y[-1] * mu_v
        u_side = frozenset(tree.component_edges(e.id, e.u))
        pieces.append(ElementaryFunction(e, s, y, mu_u, mu_v, u_side, float(offset)))
    _check_residual(tree, h, pieces, residual_tol)
    return pieces


def _check_residual(tree: MeasuredTree, h: TreeFunction, pieces: list[ElementaryFunction], tol: float) -> None:
    total_offset = sum(p.offset for p in pieces)
    worst = 0.0
    for f in tree.edges:
        # a on f = h(x) - (h(x) - offset_f) - sum_{e != f} (side value - offset_e)
        side_sum = 0.0
        for p in pieces:
            if p.edge.id != f.id:
                side_sum += p.value_u if f.id in p.u_side_edges else p.value_v
        worst = max(worst, abs(total_offset - side_sum))
    if worst > tol:
        raise ResidualError(f"decomposition residual {worst:.3e} exceeds {tol:.1e}")


def symmetrize_elementary(tree: MeasuredTree, elem: ElementaryFunction) -> EvenProfile:
    """Even profile of one elementary piece.

    The half-function anchored at u is h(u) up to z = -1/2 + mu(T_{e,u}),
    then h along e in measure coordinates, then h(v); the one anchored at v
    is its mirror image, so the average is the even part of the first.
    """
    start = -HALF + elem.side_u
    z = np.concatenate([[-HALF], start + elem.s, [HALF]])
    vals = np.concatenate([[elem.value_u], elem.y, [elem.value_v]])
    z = np.clip(z, -HALF, HALF)
    prof = EvenProfile.even_part(z, vals)
    return EvenProfile(prof.z, prof.values - elem.offset)


def symmetrize_tree(tree: MeasuredTree, h: TreeFunction) -> EvenProfile:
    """Sum of the elementary symmetrizations, accumulated in edge-id order."""
    if h.tree is not tree:
        raise ValueError("tree function does not live on this tree")
    if not tree.edges:
        return EvenProfile.zero()
    mean = h.mean()
    if abs(mean) > MEAN_TOL:
        warnings.warn(f"tree function has mean {mean:.3e}; re-normalizing before symmetrization",
                      RuntimeWarning, stacklevel=2)
        h = h.shifted(-mean)
    pieces = elementary_decompose(tree, h)
    return sum_profiles([symmetrize_elementary(tree, p) for p in pieces])


# --- generators and serialization ----------------------------------------------------

def random_tree(seed: int, n_edges: int, max_interior: int = 3) -> tuple[MeasuredTree, TreeFunction]:
    """Deterministic pseudorandom measured tree with a random mean-zero PL function."""
    if n_edges < 1:
        raise ValueError("n_edges must be >= 1")
    rng = np.random.default_rng(seed)
    parents = [int(rng.integers(0, i)) for i in range(1, n_edges + 1)]
    weights = 0.9 * rng.dirichlet(np.ones(n_edges)) + 0.1 / n_edges
    weights = weights / weights.sum()
    edges = [Edge(i, min(p, i + 1), max(p, i + 1), float(weights[i])) for i, p in enumerate(parents)]
    tree = MeasuredTree(range(n_edges + 1), edges)
    node_values = {n: float(rng.normal()) for n in tree.nodes}
    profiles = {}
    for e in tree.edges:
        m = int(rng.integers(0, max_interior + 1))
        inner = np.sort(rng.uniform(0.0, e.measure, size=m))
        s = np.concatenate([[0.0], inner, [e.measure]])
        y = np.concatenate([[node_values[e.u]], rng.normal(size=m), [node_values[e.v]]])
        profiles[e.id] = (s, y)
    h = TreeFunction(tree, node_values, profiles)
    return tree, h.normalized()


def random_function_on(tree: MeasuredTree, seed: int, max_interior: int = 3) -> TreeFunction:
    """Another random mean-zero function on an existing tree."""
    rng = np.random.default_rng(seed)
    node_values = {n: float(rng.normal()) for n in tree.nodes}
    profiles = {}
    for e in tree.edges:
        m = int(rng.integers(0, max_interior + 1))
        s = np.concatenate([[0.0], np.sort(rng.uniform(0.0, e.measure, size=m)), [e.measure]])
        y = np.concatenate([[node_values[e.u]], rng.normal(size=m), [node_values[e.v]]])
        profiles[e.id] = (s, y)
    return TreeFunction(tree, node_values, profiles).normalized()


def node_kind(h: TreeFunction, node: int) -> str:
    """minimum / maximum from the directions of the incident profiles."""
    tree = h.tree
    v = h.node_values[node]
    ups = downs = 0
    for e in tree.adjacency[node]:
        s, y = h.profiles[e.id]
        seq = y if e.u == node else y[::-1]
        nxt = next((w for w in seq[1:] if w != v), v)
        if nxt > v:
            ups += 1
        elif nxt < v:
            downs += 1
    if downs == 0 and ups > 0:
        return "minimum"
    if ups == 0 and downs > 0:
        return "maximum"
    if ups + downs == 2 and tree.degree(node) == 2:
        return "regular"
    return "saddle"


def tree_to_dict(h: TreeFunction, kinds: Mapping[int, str] | None = None) -> dict:
    tree = h.tree
    nodes = [{"id": n, "value": h.node_values[n],
              "kind": (kinds or {}).get(n) or node_kind(h, n)} for n in tree.nodes]
    edges = []
    for e in tree.edges:
        s, y = h.profiles[e.id]
        edges.append({"id": e.id, "u": e.u, "v": e.v, "measure": e.measure,
                      "profile": [[float(a), float(b)] for a, b in zip(s, y)]})
    return {"nodes": nodes, "edges": edges}


def tree_from_dict(d: Mapping, measure_tol: float = 1e-9) -> tuple[MeasuredTree, TreeFunction]:
    try:
        nodes = [int(n["id"]) for n in d["nodes"]]
        values = {int(n["id"]): float(n["value"]) for n in d["nodes"]}
        edges = [Edge(int(e["id"]), int(e["u"]), int(e["v"]), float(e["measure"])) for e in d["edges"]]
        profiles = {}
        for e in d["edges"]:
            arr = np.asarray(e["profile"], dtype=float)
            profiles[int(e["id"])] = (arr[:, 0], arr[:, 1])
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ValueError(f"malformed tree JSON: {exc}") from None
    tree = MeasuredTree(nodes, edges, measure_tol=measure_tol)
    return tree, TreeFunction(tree, values, profiles)


def save_tree_json(h: TreeFunction, path, extra: Mapping | None = None, kinds=None) -> None:
    payload = dict(extra or {})
    payload.update(tree_to_dict(h, kinds))
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)


def load_tree_json(path) -> tuple[MeasuredTree, TreeFunction]:
    with open(path) as fh:
        return tree_from_dict(json.load(fh))


def worked_path_example() -> tuple[MeasuredTree, TreeFunction]:
    """Path 0-1-2 with measures (1/2, 1/2); h rises linearly from -3 to 1 on
    the first edge and stays at 1 on the second.  Its mean is 0."""
    tree = MeasuredTree([0, 1, 2], [Edge(0, 0, 1, 0.5), Edge(1, 1, 2, 0.5)])
    h = TreeFunction(tree, {0: -3.0, 1: 1.0, 2: 1.0},
                     {0: ([0.0, 0.5], [-3.0, 1.0]), 1: ([0.0, 0.5], [1.0, 1.0])})
    return tree, h


def single_edge_function(fn, n_points: int = 2001) -> tuple[MeasuredTree, TreeFunction]:
    """Single edge of measure 1 carrying ``fn`` sampled on ``n_points`` uniform knots."""
    tree = MeasuredTree([0, 1], [Edge(0, 0, 1, 1.0)])
    s = np.linspace(0.0, 1.0, n_points)
    y = np.asarray(fn(s), dtype=float)
    return tree, TreeFunction(tree, {0: float(y[0]), 1: float(y[-1])}, {0: (s, y)})
