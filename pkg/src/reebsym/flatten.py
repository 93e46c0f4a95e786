"""Monotone PL flattenings that freeze a field near its critical values."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GapError
from .profile import EvenProfile
from .tree import MeasuredTree, TreeFunction, symmetrize_tree

_SLOPE_TOL = 1e-9  # breakpoint rounding on slope-1 pieces
BOUND_SLACK = 1e-10


@dataclass(frozen=True)
class FlatteningMap:
    """PL map through the breakpoints ``(xs, ys)``, extended with slope 1 outside them.

    ``plateaus`` lists the closed intervals on which the map is constant.
    ``domain`` optionally restricts where the map may be applied.
    """

    xs: np.ndarray
    ys: np.ndarray
    delta: float
    critical_values: tuple[float, ...] = ()
    plateaus: tuple[tuple[float, float], ...] = ()
    domain: tuple[float, float] | None = None
    median: float | None = field(default=None)

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float)
        ys = np.array(self.ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape:
            raise ValueError("breakpoints must be matching 1-d arrays")
        if len(xs) > 1 and np.any(np.diff(xs) <= 0.0):
            raise ValueError("breakpoint abscissae must be strictly increasing")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def identity(cls, delta: float = np.inf) -> "FlatteningMap":
        return cls(np.zeros(0), np.zeros(0), delta)

    @property
    def is_identity(self) -> bool:
        return len(self.xs) == 0 or bool(np.all(self.xs == self.ys))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if len(self.xs) == 0:
            out = t.copy()
        else:
            out = np.interp(t, self.xs, self.ys)
            below, above = t < self.xs[0], t > self.xs[-1]
            out = np.where(below, self.ys[0] + (t - self.xs[0]), out)
            out = np.where(above, self.ys[-1] + (t - self.xs[-1]), out)
        return float(out) if out.ndim == 0 else out

    def slopes(self) -> np.ndarray:
        if len(self.xs) < 2:
            return np.ones(0)
        return np.diff(self.ys) / np.diff(self.xs)

    def deviation(self, lo: float | None = None, hi: float | None = None) -> float:
        """sup |r(t) - t|, over [lo, hi] when given, else over the whole line."""
        if len(self.xs) == 0:
            return 0.0
        pts = self.xs
        if lo is not None and hi is not None:
            pts = np.concatenate([[lo, hi], pts[(pts > lo) & (pts < hi)]])
        return float(np.max(np.abs(self(pts) - pts)))

    def admissibility(self) -> dict[str, bool]:
        """The four defining conditions, read off the breakpoint data."""
        sl = self.slopes()
        slopes_ok = bool(np.all((sl >= -_SLOPE_TOL) & (sl <= 1.0 + _SLOPE_TOL)))
        flat_ok = True
        for c in self.critical_values:
            flat_ok &= any(a < c < b for a, b in self.plateaus)
            flat_ok &= all(self(a) == self(b) for a, b in self.plateaus)
        dev_ok = self.deviation() < self.delta
        if self.critical_values:
            lo = min(self.critical_values)
            anchor_ok = self(lo) == lo
        else:
            anchor_ok = True
        return {"slopes_in_unit_interval": slopes_ok, "locally_constant_near_critical": bool(flat_ok),
                "deviation_below_delta": bool(dev_ok), "fixes_minimum": bool(anchor_ok)}

    def is_admissible(self) -> bool:
        return all(self.admissibility().values())

    def to_dict(self) -> dict:
        return {"breakpoints": [[float(a), float(b)] for a, b in zip(self.xs, self.ys)],
                "delta": float(self.delta), "critical_values": list(map(float, self.critical_values)),
                "plateaus": [list(p) for p in self.plateaus],
                "domain": list(self.domain) if self.domain else None, "median": self.median}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "FlatteningMap":
        bp = np.asarray(d["breakpoints"], dtype=float).reshape(-1, 2)
        return cls(bp[:, 0], bp[:, 1], float(d["delta"]), tuple(d.get("critical_values", ())),
                   tuple(tuple(p) for p in d.get("plateaus", ())),
                   tuple(d["domain"]) if d.get("domain") else None, d.get("median"))


def plateau_half_width(critical_values, delta: float) -> float:
    """min(delta / (4 |K|), minimal gap / 6)."""
    K = np.unique(np.asarray(critical_values, dtype=float))
    w = delta / (4.0 * len(K))
    if len(K) > 1:
        w = min(w, float(np.min(np.diff(K))) / 6.0)
    return w


def make_admissible_flattening(critical_values, delta: float, *, median: float | None = None,
                               domain: tuple[float, float] | None = None) -> FlatteningMap:
    """Slope 0 on [c - w, c + w] around every critical value, slope 1 elsewhere,
    anchored so that the smallest critical value is fixed."""
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    K = sorted(set(float(c) for c in critical_values))
    if median is not None:
        K = sorted(set(K) | {float(median)})
    if not K:
        return FlatteningMap(np.zeros(0), np.zeros(0), delta, domain=domain)
    w = plateau_half_width(K, delta)
    if not w > 0.0 or not all(c - w < c < c + w for c in K):
        raise GapError(f"critical values too close for a positive plateau (w={w!r})")
    xs = np.array([x for c in K for x in (c - w, c + w)])
    # r' = 0 on plateaus, 1 between them; r(K[0]) = K[0]
    gaps = np.concatenate([[0.0], xs[2::2] - xs[1:-1:2]])
    ys_lo = K[0] + np.cumsum(gaps)
    ys = np.repeat(ys_lo, 2)
    plateaus = tuple((float(c - w), float(c + w)) for c in K)
    crit = tuple(float(c) for c in sorted(set(float(c) for c in critical_values)))
    r = FlatteningMap(xs, ys, delta, crit, plateaus, domain, median)
    bad = [k for k, ok in r.admissibility().items() if not ok]
    if bad:
        raise GapError(f"constructed flattening violates {', '.join(bad)}")
    return r


def apply_flattening(r: FlatteningMap, h: TreeFunction) -> TreeFunction:
    """Exact PL composition r o h: every crossing of a breakpoint of r becomes a
    breakpoint of the edge profile."""
    if r.domain is not None:
        lo, hi = r.domain
        if h.min() < lo or h.max() > hi:
            raise DomainError(f"function range [{h.min()}, {h.max()}] exceeds the map's domain [{lo}, {hi}]")
    if len(r.xs) == 0:
        return h
    tree = h.tree
    nv = {n: float(r(v)) for n, v in h.node_values.items()}
    prof = {}
    for e in tree.edges:
        s, y = h.profiles[e.id]
        y0, y1 = y[:-1], y[1:]
        lo, hi = np.minimum(y0, y1), np.maximum(y0, y1)
        # (segment, breakpoint) pairs where r's breakpoint lies strictly inside the segment's range
        inside = (r.xs[None, :] > lo[:, None]) & (r.xs[None, :] < hi[:, None])
        seg, bp = np.nonzero(inside)
        frac = (r.xs[bp] - y0[seg]) / (y1[seg] - y0[seg])
        s_new = s[seg] + frac * (s[seg + 1] - s[seg])
        s_all = np.concatenate([s, s_new])
        t_all = np.concatenate([y, r.xs[bp]])
        order = np.argsort(s_all, kind="stable")
        s_all, t_all = s_all[order], t_all[order]
        out = np.asarray(r(t_all), dtype=float)
        out[0], out[-1] = nv[e.u], nv[e.v]
        s_all[0], s_all[-1] = 0.0, e.measure
        prof[e.id] = (s_all, out)
    return TreeFunction(tree, nv, prof)


def tree_critical_values(h: TreeFunction) -> list[float]:
    return sorted(set(h.node_values.values()))


@dataclass(frozen=True)
class FlatteningReport:
    lhs: float
    rhs: float
    eps: float
    n_edges: int
    passed: bool

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "eps": self.eps, "e": self.n_edges, "pass": self.passed}


def flattening_deviation(tree: MeasuredTree, h: TreeFunction, r: FlatteningMap,
                         base: EvenProfile | None = None) -> float:
    """sup |Sigma(mean-zero(r o h)) - Sigma(h)|."""
    flat = apply_flattening(r, h).normalized()
    base = base if base is not None else symmetrize_tree(tree, h)
    return symmetrize_tree(tree, flat).sup_distance(base)


def check_flattening_bound(tree: MeasuredTree, h: TreeFunction, r: FlatteningMap) -> FlatteningReport:
    eps = r.deviation(h.min(), h.max())
    lhs = flattening_deviation(tree, h, r)
    rhs = (1 + 2 * tree.n_edges) * eps
    return FlatteningReport(lhs, rhs, eps, tree.n_edges, bool(lhs <= rhs + BOUND_SLACK))
