"""Contour trees of PL scalar fields on triangulated spheres.

Ties in the field are broken by the total order (value, vertex index).  The
tree is obtained by merging the join and split trees of the vertex order,
then measured by distributing every triangle's area along the tree path of
its longest (lowest-to-highest) edge.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DegenerateFieldError, DomainError, ReebSymError
from .mesh import ScalarField, SphereMesh
from .profile import EvenProfile
from .tree import Edge, MeasuredTree, TreeFunction, count_reeb_edges, node_kind, symmetrize_tree

logger = logging.getLogger(__name__)

__all__ = [
    "CriticalPoint", "RawArc", "ContourTree", "critical_points", "contour_tree",
    "build_contour_tree", "sublevel_area", "level_component_count", "count_reeb_edges",
    "vertex_ranks", "symmetrize_field", "arcs_spanning",
]

_PAIR_CHUNK = 2_000_000
_MEASURE_CHECK = 1e-9


@dataclass(frozen=True)
class CriticalPoint:
    vertex: int
    kind: str  # "minimum" | "maximum" | "saddle"
    value: float
    multiplicity: int = 1


@dataclass(frozen=True)
class RawArc:
    """Monotone chain of the vertex-level contour tree between two critical vertices."""

    bottom: int
    top: int
    interior: tuple[int, ...]


@dataclass
class ContourTree:
    critical: list[CriticalPoint]
    raw_nodes: list[int]
    raw_arcs: list[RawArc]
    raw_measures: np.ndarray
    tree: MeasuredTree
    function: TreeFunction
    node_kinds: dict[int, str] = field(default_factory=dict)

    @property
    def n_critical(self) -> int:
        return len(self.critical)

    def extrema(self) -> list[CriticalPoint]:
        return [c for c in self.critical if c.kind != "saddle"]


def _values(field_or_values) -> np.ndarray:
    if isinstance(field_or_values, ScalarField):
        return field_or_values.values
    return np.asarray(field_or_values, dtype=np.float64)


def vertex_ranks(values: np.ndarray) -> np.ndarray:
    """Position of every vertex in the (value, index) order."""
    order = np.lexsort((np.arange(len(values)), values))
    rank = np.empty(len(values), dtype=np.int64)
    rank[order] = np.arange(len(values))
    return rank


def critical_points(mesh: SphereMesh, field) -> list[CriticalPoint]:
    """Classify vertices by sign changes of the rank difference around their link."""
    values = _values(field)
    rank = vertex_ranks(values)
    out = []
    for v, link in enumerate(mesh.vertex_links()):
        up = rank[np.asarray(link)] > rank[v]
        changes = int(np.count_nonzero(up != np.roll(up, 1)))
        if changes == 0:
            out.append(CriticalPoint(v, "minimum" if up[0] else "maximum", float(values[v])))
        elif changes >= 4:
            out.append(CriticalPoint(v, "saddle", float(values[v]), changes // 2 - 1))
    return out


# --- join / split trees and their merge ------------------------------------------------

def _find(parent: list[int], x: int) -> int:
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def _sweep(order: np.ndarray, rank: np.ndarray, nbrs: list[np.ndarray], ascending: bool):
    """Merge tree of the sweep: returns (parent, children) where parent points
    in the sweep direction and children are the heads of the merged components."""
    n = len(order)
    uf = list(range(n))
    parent = [-1] * n
    children: list[list[int]] = [[] for _ in range(n)]
    seq = order if ascending else order[::-1]
    for v in seq.tolist():
        rv = rank[v]
        for w in nbrs[v].tolist():
            if (rank[w] < rv) == ascending:
                c = _find(uf, w)
                if c == v:
                    continue
                # the root of a component is always its most recently swept vertex
                parent[c] = v
                children[v].append(c)
                uf[c] = v
    return parent, children


def _merge_trees(n: int, lower: tuple, upper: tuple) -> tuple[list[list[int]], list[list[int]]]:
    """Contour tree from the sublevel (join) and superlevel (split) trees."""
    lo_parent, lo_children = lower  # lo_parent: next vertex above; children below
    up_parent, up_children = upper  # up_parent: next vertex below; children above
    lo_children = [set(c) for c in lo_children]
    up_children = [set(c) for c in up_children]
    lo_parent = list(lo_parent)
    up_parent = list(up_parent)
    ct_up: list[list[int]] = [[] for _ in range(n)]
    ct_down: list[list[int]] = [[] for _ in range(n)]
    removed = [False] * n

    def is_upper_leaf(x):
        return not up_children[x] and len(lo_children[x]) == 1

    def is_lower_leaf(x):
        return not lo_children[x] and len(up_children[x]) == 1

    queue = [x for x in range(n) if is_upper_leaf(x) or is_lower_leaf(x)]
    added = 0
    while queue and added < n - 1:
        x = queue.pop()
        if removed[x]:
            continue
        if is_upper_leaf(x):
            y = up_parent[x]
            ct_up[y].append(x)
            ct_down[x].append(y)
            # drop x from the superlevel tree
            up_children[y].discard(x)
            # splice x out of the sublevel tree
            (c,) = lo_children[x]
            p = lo_parent[x]
            lo_parent[c] = p
            if p >= 0:
                lo_children[p].discard(x)
                lo_children[p].add(c)
        elif is_lower_leaf(x):
            y = lo_parent[x]
            ct_down[y].append(x)
            ct_up[x].append(y)
            lo_children[y].discard(x)
            (c,) = up_children[x]
            p = up_parent[x]
            up_parent[c] = p
            if p >= 0:
                up_children[p].discard(x)
                up_children[p].add(c)
        else:
            continue
        removed[x] = True
        added += 1
        queue.append(y)
    if added != n - 1:
        raise ReebSymError(f"contour tree merge stalled after {added} of {n - 1} arcs")
    return ct_up, ct_down


def _raw_arcs(ct_up, ct_down, rank) -> tuple[list[int], list[RawArc], np.ndarray]:
    n = len(ct_up)
    is_node = np.array([not (len(ct_up[v]) == 1 and len(ct_down[v]) == 1) for v in range(n)])
    nodes = [int(v) for v in np.nonzero(is_node)[0]]
    arcs = []
    arc_of = np.full(n, -1, dtype=np.int64)
    for b in sorted(nodes, key=lambda v: rank[v]):
        for w in sorted(ct_up[b], key=lambda v: rank[v]):
            chain = []
            while not is_node[w]:
                chain.append(w)
                w = ct_up[w][0]
            arc_of[chain] = len(arcs)
            arcs.append(RawArc(b, w, tuple(chain)))
    return nodes, arcs, arc_of


# --- measures -----------------------------------------------------------------------

def _tri_sublevel(a, b, c, area, t):
    """Area of {f < t} in a linear triangle with vertex values a <= b <= c."""
    a, b, c, area, t = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (a, b, c, area, t)))
    out = np.where(t >= c, area, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        low = area * (t - a) ** 2 / ((b - a) * (c - a))
        high = area * (1.0 - (c - t) ** 2 / ((c - a) * (c - b)))
    lower_band = (t > a) & (t <= b) & (b > a)
    upper_band = (t > b) & (t < c)
    out = np.where(lower_band, low, out)
    out = np.where(upper_band, high, out)
    return out


def sublevel_area(mesh: SphereMesh, field, t: float) -> float:
    """Exact area of {H < t} for the PL interpolant, as a fraction of the total."""
    values = _values(field)
    tv = np.sort(values[mesh.triangles], axis=1)
    if t <= tv[:, 0].min():
        return 0.0
    a = _tri_sublevel(tv[:, 0], tv[:, 1], tv[:, 2], mesh.triangle_areas, t)
    return float(a.sum() / mesh.total_area)


class _NodePaths:
    """Paths between nodes of the arc-level tree via parent pointers."""

    def __init__(self, nodes, arcs):
        adj = {v: [] for v in nodes}
        for i, arc in enumerate(arcs):
            adj[arc.bottom].append((arc.top, i))
            adj[arc.top].append((arc.bottom, i))
        root = nodes[0]
        self.parent = {root: (None, None)}
        self.depth = {root: 0}
        stack = [root]
        while stack:
            v = stack.pop()
            for w, i in adj[v]:
                if w not in self.parent:
                    self.parent[w] = (v, i)
                    self.depth[w] = self.depth[v] + 1
                    stack.append(w)
        self._cache: dict[tuple[int, int], list[int]] = {}

    def arcs_between(self, a: int, b: int) -> list[int]:
        key = (a, b)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        left, right = [], []
        x, y = a, b
        while self.depth[x] > self.depth[y]:
            x, i = self.parent[x]
            left.append(i)
        while self.depth[y] > self.depth[x]:
            y, i = self.parent[y]
            right.append(i)
        while x != y:
            x, i = self.parent[x]
            left.append(i)
            y, j = self.parent[y]
            right.append(j)
        path = left + right[::-1]
        self._cache[key] = path
        return path


def _arc_contributions(mesh, values, rank, nodes, arcs, arc_of):
    """(arc, triangle, lo, hi) pieces: triangle area between lo and hi on that arc."""
    tris = mesh.triangles
    tri_rank = rank[tris]
    order = np.argsort(tri_rank, axis=1)
    srt = np.take_along_axis(tris, order, axis=1)
    p, r = srt[:, 0], srt[:, 2]
    ap, ar = arc_of[p], arc_of[r]
    fast = (ap >= 0) & (ap == ar)

    arc_ids = [ap[fast]]
    tri_ids = [np.nonzero(fast)[0]]
    los = [values[p[fast]]]
    his = [values[r[fast]]]

    paths = _NodePaths(nodes, arcs)
    slow_arc, slow_tri, slow_lo, slow_hi = [], [], [], []
    for t in np.nonzero(~fast)[0].tolist():
        pv, rv = int(p[t]), int(r[t])
        a_p, a_r = int(ap[t]), int(ar[t])
        prefix, suffix = [], []
        start, end = pv, rv
        if a_p >= 0:
            prefix = [a_p]
            start = arcs[a_p].top
        if a_r >= 0:
            suffix = [a_r]
            end = arcs[a_r].bottom
        path = prefix + (paths.arcs_between(start, end) if start != end else []) + suffix
        cuts = [values[pv]] + [values[arcs[i].top] for i in path[:-1]] + [values[rv]]
        if any(cuts[i] > cuts[i + 1] for i in range(len(cuts) - 1)):
            raise ReebSymError(f"triangle {t}: tree path of its long edge is not monotone")
        if values[pv] == values[rv]:
            slow_arc.append(path[0])
            slow_tri.append(t)
            slow_lo.append(values[pv])
            slow_hi.append(values[rv])
            continue
        for i, arc in enumerate(path):
            if cuts[i + 1] > cuts[i]:
                slow_arc.append(arc)
                slow_tri.append(t)
                slow_lo.append(cuts[i])
                slow_hi.append(cuts[i + 1])
    arc_ids.append(np.asarray(slow_arc, dtype=np.int64))
    tri_ids.append(np.asarray(slow_tri, dtype=np.int64))
    los.append(np.asarray(slow_lo, dtype=float))
    his.append(np.asarray(slow_hi, dtype=float))
    return (np.concatenate(arc_ids), np.concatenate(tri_ids), np.concatenate(los),
            np.concatenate(his), np.sort(values[tris], axis=1))


def _arc_profile(samples, lo, hi, tv, area):
    """Cumulative measure at each sample level from the pieces (lo, hi) on one arc."""
    a, b, c = tv[:, 0], tv[:, 1], tv[:, 2]
    base = _tri_sublevel(a, b, c, area, lo)
    full = _tri_sublevel(a, b, c, area, hi) - base
    flat = hi == lo
    full = np.where(flat, area, full)
    m = len(samples)
    # pieces entirely below the sample level
    idx = np.where(flat, np.searchsorted(samples, hi, "right"), np.searchsorted(samples, hi, "left"))
    cum = np.cumsum(np.bincount(idx, weights=full, minlength=m + 1)[:m])
    # pieces straddling the sample level
    i0 = np.searchsorted(samples, lo, "right")
    i1 = np.searchsorted(samples, hi, "left")
    cnt = np.where(flat, 0, np.maximum(i1 - i0, 0))
    piece = np.nonzero(cnt)[0]
    if len(piece):
        bounds = np.concatenate([[0], np.cumsum(cnt[piece])])
        start = 0
        while start < len(piece):
            stop = int(np.searchsorted(bounds, bounds[start] + _PAIR_CHUNK, "right")) - 1
            stop = max(stop, start + 1)
            sel = piece[start:stop]
            k = cnt[sel]
            rep = np.repeat(sel, k)
            offs = np.arange(int(k.sum())) - np.repeat(np.cumsum(k) - k, k)
            sidx = np.repeat(i0[sel], k) + offs
            part = _tri_sublevel(a[rep], b[rep], c[rep], area[rep], samples[sidx]) - base[rep]
            cum += np.bincount(sidx, weights=part, minlength=m)
            start = stop
    return cum, float(full.sum())


def _monotone_samples(s, t, total):
    s = np.maximum.accumulate(np.asarray(s, dtype=float))
    s[0] = 0.0
    s[-1] = total
    keep = np.concatenate([[True], np.diff(s) > 0.0])
    if not keep[-1] and len(s) > 2:
        j = int(np.nonzero(keep[:-1])[0][-1])
        if j > 0:
            keep[j] = False
        keep[-1] = True
    keep[-1] = True
    s, t = s[keep], t[keep]
    if len(s) > 2:
        inner = s[1:-1] < total
        s = np.concatenate([[s[0]], s[1:-1][inner], [s[-1]]])
        t = np.concatenate([[t[0]], t[1:-1][inner], [t[-1]]])
    return s, t


# --- assembly ----------------------------------------------------------------------

def contour_tree(mesh: SphereMesh, field) -> ContourTree:
    """Full contour tree: critical points, vertex-level arcs and the measured tree."""
    values = _values(field)
    if values.shape != (mesh.n_vertices,):
        raise ValueError("field does not match the mesh")
    if values.max() == values.min():
        raise DegenerateFieldError("constant field has no regular values")
    rank = vertex_ranks(values)
    order = np.argsort(rank)
    nbrs = mesh.neighbors()
    n = mesh.n_vertices

    lower = _sweep(order, rank, nbrs, ascending=True)
    upper = _sweep(order, rank, nbrs, ascending=False)
    ct_up, ct_down = _merge_trees(n, lower, upper)
    nodes, arcs, arc_of = _raw_arcs(ct_up, ct_down, rank)
    crit = critical_points(mesh, values)
    if sorted(c.vertex for c in crit) != sorted(nodes):
        raise ReebSymError("critical vertices and contour-tree nodes disagree")

    arc_idx, tri_idx, lo, hi, tv = _arc_contributions(mesh, values, rank, nodes, arcs, arc_of)
    area = mesh.triangle_areas / mesh.total_area
    grouping = np.argsort(arc_idx, kind="stable")
    bounds = np.searchsorted(arc_idx[grouping], np.arange(len(arcs) + 1))
    profiles = []
    measures = np.zeros(len(arcs))
    for i, arc in enumerate(arcs):
        sel = grouping[bounds[i]:bounds[i + 1]]
        samples = np.unique(np.concatenate([[values[arc.bottom], values[arc.top]],
                                            values[list(arc.interior)]]))
        if len(samples) == 1:
            # tied endpoints: the arc is a plateau carrying only flat triangles
            samples = np.repeat(samples, 2)
        tris = tri_idx[sel]
        cum, total = _arc_profile(samples, lo[sel], hi[sel], tv[tris], area[tris])
        measures[i] = total
        profiles.append(_monotone_samples(cum, samples, total))
    total = float(measures.sum())
    if abs(total - 1.0) > _MEASURE_CHECK:
        raise ReebSymError(f"arc measures sum to {total!r} instead of 1")

    tree, fn = _measured_tree(nodes, arcs, measures / total, profiles, total, values, rank)
    kinds = {v: node_kind(fn, v) for v in tree.nodes}
    return ContourTree(crit, nodes, arcs, measures / total, tree, fn, kinds)


def _measured_tree(nodes, arcs, measures, profiles, total, values, rank):
    """Contract zero-measure arcs, fuse regular nodes, and build the tree objects."""
    # contract arcs that carry no area; their endpoints share a value
    rep = {v: v for v in nodes}

    def find(x):
        while rep[x] != x:
            rep[x] = rep[rep[x]]
            x = rep[x]
        return x

    live = []
    for i, arc in enumerate(arcs):
        if measures[i] <= 0.0:
            a, b = find(arc.bottom), find(arc.top)
            keep, drop = (a, b) if rank[a] <= rank[b] else (b, a)
            rep[drop] = keep
        else:
            live.append(i)
    segs = []
    for i in live:
        s, t = profiles[i]
        segs.append([find(arcs[i].bottom), find(arcs[i].top), s / total, t.copy()])
    for seg in segs:
        seg[2][-1] = max(seg[2][-1], 0.0)

    # fuse nodes with one arc below and one above
    changed = True
    while changed:
        changed = False
        below: dict[int, list[int]] = {}
        above: dict[int, list[int]] = {}
        for j, seg in enumerate(segs):
            if seg is None:
                continue
            above.setdefault(seg[0], []).append(j)
            below.setdefault(seg[1], []).append(j)
        for v in set(below) & set(above):
            if len(below[v]) == 1 and len(above[v]) == 1:
                j, k = below[v][0], above[v][0]
                if segs[j] is None or segs[k] is None or j == k:
                    continue
                lo_seg, hi_seg = segs[j], segs[k]
                s = np.concatenate([lo_seg[2], hi_seg[2][1:] + lo_seg[2][-1]])
                t = np.concatenate([lo_seg[3], hi_seg[3][1:]])
                segs[j] = [lo_seg[0], hi_seg[1], s, t]
                segs[k] = None
                changed = True
                break
    segs = [s for s in segs if s is not None]
    segs.sort(key=lambda seg: (rank[seg[0]], rank[seg[1]]))
    node_ids = sorted({seg[0] for seg in segs} | {seg[1] for seg in segs}, key=lambda v: rank[v])
    if not segs:
        raise DegenerateFieldError("field carries no measurable variation")

    mus = np.array([seg[2][-1] for seg in segs])
    mus = mus / mus.sum()
    edges, prof = [], {}
    node_values = {v: float(values[v]) for v in node_ids}
    for eid, (seg, mu) in enumerate(zip(segs, mus)):
        s = seg[2] * (mu / seg[2][-1])
        s[-1] = mu
        t = seg[3]
        t[0], t[-1] = node_values[seg[0]], node_values[seg[1]]
        edges.append(Edge(eid, int(seg[0]), int(seg[1]), float(mu)))
        prof[eid] = (s, t)
    tree = MeasuredTree(node_ids, edges)
    return tree, TreeFunction(tree, node_values, prof)


def build_contour_tree(mesh: SphereMesh, field) -> tuple[MeasuredTree, TreeFunction]:
    ct = contour_tree(mesh, field)
    return ct.tree, ct.function


# --- independent level-set oracle --------------------------------------------------

def level_component_count(mesh: SphereMesh, field, t: float) -> int:
    """Components of {H = t} by flood fill over the crossing edges of the mesh.

    ``t`` must differ from every vertex value.
    """
    values = _values(field)
    if np.any(values == t):
        raise DomainError("level passes through a vertex; pick a regular value")
    edges = mesh.edges
    crossing = (values[edges[:, 0]] < t) != (values[edges[:, 1]] < t)
    idx = np.full(len(edges), -1, dtype=np.int64)
    idx[crossing] = np.arange(int(crossing.sum()))
    m = int(crossing.sum())
    if m == 0:
        return 0
    n = mesh.n_vertices
    keys = edges[:, 0] * n + edges[:, 1]
    tri = mesh.triangles
    te = []
    for i, j in ((0, 1), (1, 2), (2, 0)):
        lo = np.minimum(tri[:, i], tri[:, j])
        hi = np.maximum(tri[:, i], tri[:, j])
        te.append(idx[np.searchsorted(keys, lo * n + hi)])
    te = np.stack(te, axis=1)
    has = te >= 0
    # every crossing triangle has exactly two crossing edges; link them
    pairs = np.sort(np.where(has, te, np.iinfo(np.int64).max), axis=1)[:, :2]
    good = has.sum(axis=1) == 2
    rows, cols = pairs[good, 0], pairs[good, 1]
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(m, m))
    count, _ = connected_components(graph, directed=False)
    return int(count)


def arcs_spanning(ct: ContourTree, values: np.ndarray, t: float) -> int:
    """Number of vertex-level arcs whose value span strictly contains ``t``."""
    return sum(1 for a in ct.raw_arcs if values[a.bottom] < t < values[a.top])


def symmetrize_field(mesh: SphereMesh, field) -> EvenProfile:
    """Contour tree followed by the tree symmetrization.

    The tree function is re-centred in its own quadrature, which differs from
    the mesh mean by the PL-in-area approximation of the edge profiles.
    """
    values = _values(field)
    if values.max() == values.min():
        return EvenProfile.zero()
    tree, fn = build_contour_tree(mesh, values)
    return symmetrize_tree(tree, fn.normalized())
