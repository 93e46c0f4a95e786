"""Brute-force references that share no assembly code with the main path."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import ScalarField, SphereMesh
from .profile import HALF, EvenProfile
from .tree import MeasuredTree, TreeFunction, subtree_measure


@dataclass(frozen=True)
class OracleReport:
    quantity: str
    value: float
    oracle: float
    tolerance: float
    abs_deviation: float
    rel_deviation: float
    passed: bool

    @classmethod
    def compare(cls, quantity: str, value: float, oracle: float, tolerance: float) -> "OracleReport":
        dev = abs(value - oracle)
        rel = dev / abs(oracle) if oracle != 0 else (0.0 if dev == 0 else float("inf"))
        return cls(quantity, float(value), float(oracle), float(tolerance), float(dev), float(rel),
                   bool(dev <= tolerance))

    @classmethod
    def deviation(cls, quantity: str, deviation: float, tolerance: float) -> "OracleReport":
        """Report for a quantity that is itself a deviation (oracle value 0)."""
        return cls.compare(quantity, deviation, 0.0, tolerance)

    def to_dict(self) -> dict:
        return {"quantity": self.quantity, "value": self.value, "oracle": self.oracle,
                "tolerance": self.tolerance, "abs_deviation": self.abs_deviation,
                "rel_deviation": self.rel_deviation, "pass": self.passed}


@dataclass(frozen=True)
class MCEstimate:
    value: float
    stderr: float
    n_samples: int

    def __float__(self):
        return self.value


def mc_sublevel_area(mesh: SphereMesh, field, t: float, n_samples: int = 10**5, seed: int = 0) -> MCEstimate:
    """Monte Carlo estimate of Area{H < t}: area-weighted triangle choice, uniform
    barycentric points, linear interpolation of the vertex values."""
    if n_samples < 10**4:
        raise ValueError("Monte Carlo area needs at least 10^4 samples")
    values = field.values if isinstance(field, ScalarField) else np.asarray(field, dtype=float)
    if t <= values.min():
        return MCEstimate(0.0, 0.0, n_samples)
    rng = np.random.default_rng(seed)
    p = mesh.triangle_areas / mesh.triangle_areas.sum()
    tri = rng.choice(len(p), size=n_samples, p=p)
    r1, r2 = rng.random(n_samples), rng.random(n_samples)
    sq = np.sqrt(r1)
    w = np.stack([1 - sq, sq * (1 - r2), sq * r2], axis=1)
    vals = np.sum(w * values[mesh.triangles[tri]], axis=1)
    hit = (vals < t).astype(float)
    est = float(hit.mean())
    return MCEstimate(est, float(np.sqrt(est * (1 - est) / n_samples)), n_samples)


def analytic_height_symmetrization(h_of_z, n_grid: int = 2001) -> EvenProfile:
    """Even part of a function of the normalized height.

    ``h_of_z`` is either a callable on [-1/2, 1/2] (sampled on ``n_grid``
    points) or a pair ``(z, values)`` of PL breakpoints.
    """
    if callable(h_of_z):
        z = np.linspace(-HALF, HALF, n_grid)
        vals = np.asarray(h_of_z(z), dtype=float)
    else:
        z, vals = (np.asarray(a, dtype=float) for a in h_of_z)
    half = np.union1d(np.abs(z), [0.0, HALF])
    half = half[half <= HALF]
    even = 0.5 * (np.interp(half, z, vals) + np.interp(-half, z, vals))
    return EvenProfile(half, even)


def dense_grid_symmetrize(tree: MeasuredTree, h: TreeFunction, n_grid: int = 1001) -> tuple[np.ndarray, np.ndarray]:
    """Sample the symmetrization on a uniform grid by direct interval tests.

    For each edge [a, b] both one-sided profiles are evaluated pointwise:
    h(a) up to -1/2 + mu(T_a), the edge profile read from a on the next mu(e),
    then h(b).  Their average minus the mean of the elementary piece is summed.
    """
    if n_grid < 1001:
        raise ValueError("dense grid needs at least 1001 points")
    z = np.linspace(-HALF, HALF, n_grid)
    total = np.zeros_like(z)
    for e in tree.edges:
        s, y = h.profiles[e.id]
        mu = e.measure
        ha, hb = h.node_values[e.u], h.node_values[e.v]
        ma = subtree_measure(tree, e.id, e.u)
        mb = subtree_measure(tree, e.id, e.v)

        start_a = -HALF + ma
        from_a = np.where(z <= start_a, ha,
                          np.where(z < start_a + mu, np.interp(z - start_a, s, y), hb))
        start_b = -HALF + mb
        from_b = np.where(z <= start_b, hb,
                          np.where(z < start_b + mu, np.interp(mu - (z - start_b), s, y), ha))

        edge_integral = sum((s[i + 1] - s[i]) * (y[i + 1] + y[i]) / 2 for i in range(len(s) - 1))
        mean = ha * ma + edge_integral + hb * mb
        total += 0.5 * (from_a + from_b) - mean
    return z, total
