"""Growth classification from link averages, closed-form bound calculators,
periods of area coordinates and Banach-indicatrix sums."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import BadK, EpsTooLarge, NonMonotoneProfile
from .profile import EvenProfile, LinkSpec, admissible_B_grid, link_averages, norms_up_to
from .tree import MeasuredTree, TreeFunction

BOUNDED_GROWTH_CONSTANT = 19.0
DEFAULT_KMAX = 20
DEFAULT_BGRID = 256
MIN_BGRID = 64
DEFAULT_C_DOUBLEPRIME = 6.0
MESH_TAU_FACTOR = 0.05
TREE_TAU = 1e-9


@dataclass(frozen=True)
class GrowthClassification:
    verdict: str  # "Linear" | "Bounded"
    tolerance: float
    rho_lower: float
    witness: LinkSpec | None = None
    hofer_bound: float | None = None
    profile_sup: float = 0.0
    profile_osc: float = 0.0

    @property
    def is_linear(self) -> bool:
        return self.verdict == "Linear"

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict, "tolerance": self.tolerance,
               "profile_sup": self.profile_sup, "profile_osc": self.profile_osc}
        if self.is_linear:
            out["rho_lower"] = self.rho_lower
            out["witness"] = {"k": int(self.witness.k), "B": float(self.witness.B)}
        else:
            out["hofer_bound"] = self.hofer_bound
            out["max_link_average"] = self.rho_lower
        return out

    def __str__(self):
        if self.is_linear:
            return f"Linear(rho >= {self.rho_lower:.6g})"
        return f"Bounded({self.hofer_bound:g})"


def growth_lower_bound(u: EvenProfile, k_max: int = DEFAULT_KMAX,
                       B_grid: int = DEFAULT_BGRID) -> tuple[float, LinkSpec]:
    """Largest |link average| over 1 <= k <= k_max and a uniform grid of admissible B."""
    if not isinstance(k_max, (int, np.integer)) or k_max < 1:
        raise BadK(f"k_max must be a positive integer, got {k_max!r}")
    if B_grid < MIN_BGRID:
        raise ValueError(f"B grid needs at least {MIN_BGRID} points, got {B_grid}")
    best = abs(u(0.0))
    witness = LinkSpec(1, 0.5)
    for k in range(2, k_max + 1):
        Bs = admissible_B_grid(k, B_grid)
        vals = np.abs(link_averages(u, k, Bs))
        i = int(np.argmax(vals))
        if vals[i] > best:
            best = float(vals[i])
            witness = LinkSpec(k, float(Bs[i]))
    return float(best), witness


def classify(u: EvenProfile, tau: float, k_max: int = DEFAULT_KMAX, B_grid: int = DEFAULT_BGRID,
             total_area: float = 1.0) -> GrowthClassification:
    if not tau > 0.0:
        raise ValueError(f"tolerance must be positive, got {tau!r}")
    rho, witness = growth_lower_bound(u, k_max, B_grid)
    common = dict(tolerance=float(tau), rho_lower=rho, profile_sup=u.sup(), profile_osc=u.osc())
    if rho > tau:
        return GrowthClassification("Linear", witness=witness, **common)
    return GrowthClassification("Bounded", hofer_bound=BOUNDED_GROWTH_CONSTANT * total_area, **common)


def mesh_tolerance(field_osc: float) -> float:
    """Default classification tolerance for fields sampled on a mesh."""
    return MESH_TAU_FACTOR * field_osc if field_osc > 0 else TREE_TAU


# --- closed-form bounds ------------------------------------------------------------

def sikorav_estimate(sup_norm_F: float, k: int) -> float:
    """(sup|F| + 3) / k for F supported in a disk of area below 1/k."""
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise BadK(f"k must be a positive integer, got {k!r}")
    if sup_norm_F < 0:
        raise ValueError("sup norm must be non-negative")
    return (sup_norm_F + 3) / k


def profile_hofer_bound(u: EvenProfile, k_max: int) -> float:
    """min over 2 <= k <= k_max of norm_k(u) + 6/k."""
    norms = norms_up_to(u, k_max)
    return float(np.min(norms + 6 / np.arange(2, k_max + 1)))


def holder_bound(eps_C0: float, E_sum_C2: float, C_doubleprime: float = DEFAULT_C_DOUBLEPRIME) -> float:
    """3 sqrt(C'') sqrt(eps) sqrt(1 + E)."""
    if not eps_C0 < 1:
        raise EpsTooLarge(f"C0 distance must be below 1, got {eps_C0!r}")
    if eps_C0 < 0 or E_sum_C2 < 0 or C_doubleprime < 0:
        raise ValueError("arguments must be non-negative")
    if eps_C0 == 0:
        return 0.0
    return 3 * math.sqrt(C_doubleprime) * math.sqrt(eps_C0) * math.sqrt(1 + E_sum_C2)


# --- area coordinates -----------------------------------------------------------------

@dataclass(frozen=True)
class PeriodProfile:
    """Piecewise-constant T on the value intervals [breaks[i], breaks[i+1])."""

    breaks: np.ndarray
    values: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        i = np.clip(np.searchsorted(self.breaks, x, "right") - 1, 0, len(self.values) - 1)
        out = self.values[i]
        return float(out) if out.ndim == 0 else out

    def weighted_mean(self) -> float:
        """Length-weighted mean of T, which equals measure / value span."""
        w = np.diff(self.breaks)
        return float(np.sum(w * self.values) / np.sum(w))

    def relative_l1_deviation(self, c: float) -> float:
        """Length-weighted mean of |T - c| / c."""
        w = np.diff(self.breaks)
        return float(np.sum(w * np.abs(self.values - c)) / (np.sum(w) * abs(c)))

    def to_dict(self) -> dict:
        return {"breaks": self.breaks.tolist(), "values": self.values.tolist()}


def period_profile(tree: MeasuredTree, h: TreeFunction, edge: int) -> PeriodProfile:
    """dB/dx of the cumulative-area profile of one edge, read bottom to top."""
    e = tree.edge(edge)
    s, y = h.profiles[e.id]
    if y[-1] < y[0]:
        s, y = e.measure - s[::-1], y[::-1]
    ds, dy = np.diff(s), np.diff(y)
    if np.any(ds <= 0) or np.any(dy <= 0):
        raise NonMonotoneProfile(f"edge {edge} profile is not strictly monotone")
    return PeriodProfile(np.asarray(y, dtype=float), ds / dy)


def value_span(h: TreeFunction, edge) -> tuple[float, float]:
    a, b = h.node_values[edge.u], h.node_values[edge.v]
    return min(a, b), max(a, b)


def banach_indicatrix_sum(tree: MeasuredTree, node_values: Mapping[int, float]) -> float:
    """sum_j m_j * length(I_j) with the I_j cut at the node values."""
    cuts = np.unique(np.asarray(list(node_values.values()), dtype=float))
    if len(cuts) < 2:
        return 0.0
    lo = np.array([min(node_values[e.u], node_values[e.v]) for e in tree.edges])
    hi = np.array([max(node_values[e.u], node_values[e.v]) for e in tree.edges])
    a, b = cuts[:-1], cuts[1:]
    mult = np.sum((lo[None, :] <= a[:, None]) & (hi[None, :] >= b[:, None]), axis=1)
    return float(np.sum(mult * (b - a)))


def classification_report(u: EvenProfile, cls: GrowthClassification, k_max: int) -> dict:
    out = cls.to_dict()
    out["profile_hofer_bound"] = profile_hofer_bound(u, max(k_max, 2))
    return out
