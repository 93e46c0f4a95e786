"""Triangulated 2-spheres and per-vertex scalar fields on them."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import DegenerateError, ParseError, ResourceError, TopologyError, UnknownFieldError

logger = logging.getLogger(__name__)

MAX_SUBDIVISIONS = 8

# Fixed, deliberately non-symmetric orientation of the base icosahedron.
# With the textbook coordinates whole rings of vertices share a height,
# which makes every height-like field tie-heavy.
_GENERIC_EULER = (0.3183, 0.4567, 0.1234)


def _triangle_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


def _undirected_edges(triangles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unique undirected edges and, for each, the number of incident triangles."""
    e = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    e.sort(axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    return uniq, counts


@dataclass(frozen=True, eq=False)
class SphereMesh:
    """Closed genus-0 triangle mesh.

    Construction validates the topology (edge-manifold, single-cycle vertex
    links, Euler characteristic 2) and rejects zero-area triangles.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    triangle_areas: np.ndarray = field(init=False)
    total_area: float = field(init=False)
    edges: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise ParseError(f"vertices must have shape (n, 3), got {vertices.shape}")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise ParseError(f"triangles must have shape (m, 3), got {triangles.shape}")
        if len(triangles) == 0:
            raise TopologyError("mesh has no triangles")
        if triangles.min() < 0 or triangles.max() >= len(vertices):
            raise ParseError("triangle references a vertex index out of range")
        if np.any(triangles[:, 0] == triangles[:, 1]) or np.any(triangles[:, 1] == triangles[:, 2]) \
                or np.any(triangles[:, 0] == triangles[:, 2]):
            raise TopologyError("triangle with a repeated vertex")
        vertices.setflags(write=False)
        triangles.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "triangles", triangles)

        edges, counts = _undirected_edges(triangles)
        if np.any(counts != 2):
            bad = int(np.sum(counts != 2))
            raise TopologyError(f"{bad} edge(s) not shared by exactly two triangles "
                                "(boundary or non-manifold)")
        used = np.unique(triangles)
        if len(used) != len(vertices):
            raise TopologyError(f"{len(vertices) - len(used)} isolated vertex(es)")
        chi = len(vertices) - len(edges) + len(triangles)
        if chi != 2:
            raise TopologyError(f"Euler characteristic is {chi}, expected 2 (genus 0)")
        object.__setattr__(self, "edges", edges)

        areas = _triangle_areas(vertices, triangles)
        if np.any(areas <= 0.0):
            raise DegenerateError(f"{int(np.sum(areas <= 0.0))} zero-area triangle(s)")
        areas.setflags(write=False)
        object.__setattr__(self, "triangle_areas", areas)
        object.__setattr__(self, "total_area", float(areas.sum()))
        # raises on bow-tie vertices; cached for the contour tree
        self.vertex_links()

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_triangles

    def vertex_masses(self) -> np.ndarray:
        """One third of the area of the incident triangles, per vertex."""
        m = np.zeros(self.n_vertices)
        for k in range(3):
            np.add.at(m, self.triangles[:, k], self.triangle_areas / 3.0)
        return m

    def neighbors(self) -> list[np.ndarray]:
        links = self.vertex_links()
        return [np.asarray(cyc) for cyc in links]

    def vertex_links(self) -> list[list[int]]:
        """Cyclically ordered link of every vertex."""
        cached = self.__dict__.get("_links")
        if cached is not None:
            return cached
        opposite: list[dict[int, list[int]]] = [dict() for _ in range(self.n_vertices)]
        for a, b, c in self.triangles.tolist():
            for v, p, q in ((a, b, c), (b, c, a), (c, a, b)):
                d = opposite[v]
                d.setdefault(p, []).append(q)
                d.setdefault(q, []).append(p)
        links = []
        for v, d in enumerate(opposite):
            start = next(iter(d))
            cycle = [start]
            prev, cur = None, start
            while True:
                nbrs = d[cur]
                if len(nbrs) != 2:
                    raise TopologyError(f"vertex {v} has a non-manifold link")
                nxt = nbrs[0] if nbrs[0] != prev else nbrs[1]
                if nxt == start:
                    break
                cycle.append(nxt)
                prev, cur = cur, nxt
                if len(cycle) > len(d):
                    raise TopologyError(f"vertex {v} has a non-manifold link")
            if len(cycle) != len(d):
                raise TopologyError(f"vertex {v} is a pinch point (link is not one cycle)")
            links.append(cycle)
        object.__setattr__(self, "_links", links)
        return links


def normalize_total_area(mesh: SphereMesh) -> SphereMesh:
    if not mesh.total_area > 0.0:
        raise DegenerateError("mesh has zero total area")
    if mesh.total_area == 1.0:
        return mesh
    scale = 1.0 / math.sqrt(mesh.total_area)
    return SphereMesh(mesh.vertices * scale, mesh.triangles)


# --- file formats -----------------------------------------------------------

def _data_lines(text: str):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line


def _parse_off(text: str) -> tuple[np.ndarray, np.ndarray]:
    lines = _data_lines(text)
    try:
        header = next(lines)
    except StopIteration:
        raise ParseError("empty OFF file") from None
    tokens = header.split()
    if not tokens[0].endswith("OFF"):
        raise ParseError(f"missing OFF header, got {header!r}")
    tokens = tokens[1:]
    if not tokens:
        try:
            tokens = next(lines).split()
        except StopIteration:
            raise ParseError("OFF file truncated before counts") from None
    try:
        nv, nf = int(tokens[0]), int(tokens[1])
        verts = [[float(x) for x in next(lines).split()[:3]] for _ in range(nv)]
        faces = []
        for _ in range(nf):
            rec = next(lines).split()
            n = int(rec[0])
            if n != 3:
                raise ParseError(f"face with {n} vertices; only triangles are supported")
            faces.append([int(x) for x in rec[1:4]])
    except StopIteration:
        raise ParseError("OFF file truncated") from None
    except (ValueError, IndexError) as exc:
        raise ParseError(f"malformed OFF record: {exc}") from None
    if any(len(v) != 3 for v in verts):
        raise ParseError("vertex record with fewer than 3 coordinates")
    return np.array(verts, dtype=float).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3)


def _parse_obj(text: str) -> tuple[np.ndarray, np.ndarray]:
    verts, faces = [], []
    for line in _data_lines(text):
        rec = line.split()
        try:
            if rec[0] == "v":
                verts.append([float(x) for x in rec[1:4]])
                if len(verts[-1]) != 3:
                    raise ParseError("vertex record with fewer than 3 coordinates")
            elif rec[0] == "f":
                idx = [int(tok.split("/")[0]) for tok in rec[1:]]
                if len(idx) != 3:
                    raise ParseError(f"face with {len(idx)} vertices; only triangles are supported")
                n = len(verts)
                faces.append([i - 1 if i > 0 else n + i for i in idx])
        except ValueError as exc:
            raise ParseError(f"malformed OBJ record {line!r}: {exc}") from None
    return np.array(verts, dtype=float).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3)


def load_mesh(path: str | Path, format: str | None = None) -> SphereMesh:
    """Read an OFF or OBJ triangle mesh and validate it.

    The format is taken from the file suffix unless given explicitly.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).upper()
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    if fmt == "OFF":
        verts, faces = _parse_off(text)
    elif fmt == "OBJ":
        verts, faces = _parse_obj(text)
    else:
        raise ParseError(f"unsupported mesh format {fmt!r}")
    return SphereMesh(verts, faces)


def write_off(mesh: SphereMesh, path: str | Path) -> None:
    lines = ["OFF", f"{mesh.n_vertices} {mesh.n_triangles} {mesh.n_edges}"]
    lines += [f"{x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    lines += [f"3 {a} {b} {c}" for a, b, c in mesh.triangles.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


# --- icosphere ----------------------------------------------------------------

def _rotation(alpha: float, beta: float, gamma: float) -> np.ndarray:
    ca, sa = math.cos(alpha), math.sin(alpha)
    cb, sb = math.cos(beta), math.sin(beta)
    cg, sg = math.cos(gamma), math.sin(gamma)
    rz = np.array([[ca, -sa, 0], [sa, ca, 0], [0, 0, 1]])
    ry = np.array([[cb, 0, sb], [0, 1, 0], [-sb, 0, cb]])
    rx = np.array([[1, 0, 0], [0, cg, -sg], [0, sg, cg]])
    return rz @ ry @ rx


def _icosahedron() -> tuple[np.ndarray, np.ndarray]:
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=float)
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ], dtype=np.int64)
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    return verts, faces


def _subdivide(verts: np.ndarray, faces: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = len(verts)
    e = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    key = np.sort(e, axis=1)
    uniq, inverse = np.unique(key, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    mids = verts[uniq[:, 0]] + verts[uniq[:, 1]]
    mids /= np.linalg.norm(mids, axis=1, keepdims=True)
    m = len(faces)
    ab, bc, ca = (inverse[:m] + n, inverse[m:2 * m] + n, inverse[2 * m:] + n)
    a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
    new_faces = np.concatenate([
        np.stack([a, ab, ca], axis=1),
        np.stack([b, bc, ab], axis=1),
        np.stack([c, ca, bc], axis=1),
        np.stack([ab, bc, ca], axis=1),
    ])
    return np.concatenate([verts, mids]), new_faces


def make_icosphere(subdivisions: int) -> SphereMesh:
    """Icosahedron subdivided ``subdivisions`` times, projected to the round
    sphere and scaled to unit total area."""
    if subdivisions < 0:
        raise ValueError("subdivisions must be non-negative")
    if subdivisions > MAX_SUBDIVISIONS:
        raise ResourceError(f"subdivisions={subdivisions} exceeds the limit {MAX_SUBDIVISIONS}")
    verts, faces = _icosahedron()
    verts = verts @ _rotation(*_GENERIC_EULER).T
    for _ in range(subdivisions):
        verts, faces = _subdivide(verts, faces)
    return normalize_total_area(SphereMesh(verts, faces))


# --- scalar fields --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ScalarField:
    mesh: SphereMesh
    values: np.ndarray
    name: str = "field"

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (self.mesh.n_vertices,):
            raise ValueError(f"expected {self.mesh.n_vertices} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field has non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def mean(self) -> float:
        m = self.mesh.vertex_masses()
        return float(m @ self.values / m.sum())

    def osc(self) -> float:
        return float(self.values.max() - self.values.min())

    def scaled(self, t: float) -> "ScalarField":
        return ScalarField(self.mesh, t * self.values, name=f"{t}*{self.name}")


def normalize_mean_zero(f: ScalarField) -> ScalarField:
    """Subtract the area-weighted mean.

    A field whose mean is already at rounding level is returned unchanged, so
    the operation is an exact projection.
    """
    mean = f.mean()
    scale = float(np.max(np.abs(f.values))) if len(f.values) else 0.0
    if abs(mean) <= 1e-14 * scale or mean == 0.0:
        return f
    return ScalarField(f.mesh, f.values - mean, name=f.name)


def _unit_positions(mesh: SphereMesh) -> np.ndarray:
    p = mesh.vertices - mesh.vertices.mean(axis=0)
    return p / np.linalg.norm(p, axis=1, keepdims=True)


def _rescaled_axis(mesh: SphereMesh, axis: int) -> np.ndarray:
    # affine map of the raw coordinate onto [-1/2, 1/2]; on the round sphere
    # this is exactly the area coordinate minus 1/2
    c = mesh.vertices[:, axis]
    lo, hi = c.min(), c.max()
    return (c - lo) / (hi - lo) - 0.5


def _double_bump(mesh: SphereMesh, sigma: float = 0.45, a1: float = 1.0, a2: float = 0.8,
                 eps: float = 0.05, angle: float = 1.6) -> np.ndarray:
    p = _unit_positions(mesh)
    c1 = np.array([math.sin(angle / 2), 0.0, math.cos(angle / 2)])
    c2 = np.array([-math.sin(angle / 2), 0.0, math.cos(angle / 2)])
    d1 = np.sum((p - c1) ** 2, axis=1)
    d2 = np.sum((p - c2) ** 2, axis=1)
    return (a1 * np.exp(-d1 / (2 * sigma ** 2)) + a2 * np.exp(-d2 / (2 * sigma ** 2))
            + eps * p[:, 2])


BUILTIN_FIELDS = ("height_z", "height_x", "quadratic_z", "cubic_z", "double_bump", "zero")


def builtin_field(mesh: SphereMesh, name: str, params: Mapping[str, float] | None = None) -> ScalarField:
    """Sample a named analytic field at the vertices and make it mean-zero.

    Height-based fields use the height rescaled to [-1/2, 1/2]:
    ``height_z`` is z, ``quadratic_z`` is z**2 - 1/12, ``cubic_z`` is z**3 + z.
    ``double_bump`` accepts ``sigma``, ``a1``, ``a2``, ``eps`` and ``angle``.
    """
    params = dict(params or {})
    if name == "height_z":
        values = _rescaled_axis(mesh, 2)
    elif name == "height_x":
        values = _rescaled_axis(mesh, 0)
    elif name == "quadratic_z":
        z = _rescaled_axis(mesh, 2)
        values = z ** 2 - 1.0 / 12.0
    elif name == "cubic_z":
        z = _rescaled_axis(mesh, 2)
        values = z ** 3 + z
    elif name == "double_bump":
        values = _double_bump(mesh, **{k: float(v) for k, v in params.items()})
        params = {}
    elif name == "zero":
        values = np.zeros(mesh.n_vertices)
    else:
        raise UnknownFieldError(f"unknown builtin field {name!r}; choose from {', '.join(BUILTIN_FIELDS)}")
    if params:
        raise UnknownFieldError(f"field {name!r} takes no parameters, got {sorted(params)}")
    return normalize_mean_zero(ScalarField(mesh, values, name=name))


def load_field_csv(mesh: SphereMesh, path: str | Path) -> ScalarField:
    """Read ``vertex_index,value`` lines; every vertex must be assigned once."""
    values = np.full(mesh.n_vertices, np.nan)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    for lineno, line in enumerate(_data_lines(text), 1):
        parts = [p.strip() for p in line.split(",")]
        try:
            i, v = int(parts[0]), float(parts[1])
        except (ValueError, IndexError):
            if lineno == 1:
                continue  # header
            raise ParseError(f"{path}:{lineno}: expected 'vertex_index,value'") from None
        if not 0 <= i < mesh.n_vertices:
            raise ParseError(f"{path}:{lineno}: vertex index {i} out of range")
        values[i] = v
    if np.any(np.isnan(values)):
        raise ParseError(f"{path}: {int(np.isnan(values).sum())} vertices without a value")
    return ScalarField(mesh, values, name=Path(path).stem)


def write_field_csv(f: ScalarField, path: str | Path) -> None:
    lines = ["vertex_index,value"] + [f"{i},{v!r}" for i, v in enumerate(f.values.tolist())]
    Path(path).write_text("\n".join(lines) + "\n")
