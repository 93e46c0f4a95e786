"""Even, piecewise-linear profiles on I = (-1/2, 1/2) and their link averages.

A profile stores knots on the half interval [0, 1/2] only; the value at a
negative argument is read off by reflection, so evenness holds by
construction.  Every reduction (integral, suprema, link averages) is exact
over the knots.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import BadK, DomainError

HALF = 0.5
_DOMAIN_SLACK = 1e-12


class EvenProfile:
    """Continuous even PL function given by knots ``0 = z_0 < ... < z_n = 1/2``."""

    __slots__ = ("z", "values")

    def __init__(self, z, values):
        z = np.asarray(z, dtype=np.float64)
        values = np.asarray(values, dtype=np.float64)
        if z.ndim != 1 or z.shape != values.shape or len(z) < 2:
            raise ValueError("knots and values must be 1-d arrays of equal length >= 2")
        if z[0] != 0.0 or z[-1] != HALF:
            raise ValueError(f"knots must span [0, 1/2], got [{z[0]}, {z[-1]}]")
        dz = np.diff(z)
        if np.any(dz < 0.0):
            raise ValueError("knots must be non-decreasing")
        if np.any(dz == 0.0):
            # coincident knots: keep the later one so z = 1/2 survives
            keep = np.concatenate([dz > 0.0, [True]])
            z, values = z[keep], values[keep]
        z.setflags(write=False)
        values.setflags(write=False)
        self.z = z
        self.values = values

    # construction helpers
    @classmethod
    def zero(cls) -> "EvenProfile":
        return cls([0.0, HALF], [0.0, 0.0])

    @classmethod
    def constant(cls, c: float) -> "EvenProfile":
        return cls([0.0, HALF], [c, c])

    @classmethod
    def from_function(cls, fn, n: int = 1001) -> "EvenProfile":
        """Sample ``fn`` on ``n`` uniform knots of [0, 1/2] (fn must be even)."""
        z = np.linspace(0.0, HALF, n)
        return cls(z, np.asarray(fn(z), dtype=float))

    @classmethod
    def even_part(cls, z, values) -> "EvenProfile":
        """Even part (f(z) + f(-z)) / 2 of a PL function on [-1/2, 1/2]."""
        z = np.asarray(z, dtype=float)
        values = np.asarray(values, dtype=float)
        knots = np.union1d(np.abs(z), [0.0, HALF])
        knots = knots[(knots >= 0.0) & (knots <= HALF)]
        return cls(knots, 0.5 * (np.interp(knots, z, values) + np.interp(-knots, z, values)))

    def __call__(self, z):
        za = np.abs(np.asarray(z, dtype=np.float64))
        if np.any(za > HALF + _DOMAIN_SLACK):
            raise DomainError("profile evaluated outside [-1/2, 1/2]")
        out = np.interp(za, self.z, self.values)
        return float(out) if out.ndim == 0 else out

    def __repr__(self):
        return f"EvenProfile(knots={len(self.z)}, sup={self.sup():.6g})"

    def __len__(self):
        return len(self.z)

    # reductions
    def integral(self) -> float:
        """Integral over the full interval (-1/2, 1/2)."""
        return float(2.0 * np.sum(0.5 * (self.values[1:] + self.values[:-1]) * np.diff(self.z)))

    def max(self) -> float:
        return float(self.values.max())

    def min(self) -> float:
        return float(self.values.min())

    def osc(self) -> float:
        return self.max() - self.min()

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def sup_on(self, lo: float, hi: float) -> float:
        """max |u| over the closed band lo <= |z| <= hi."""
        if not 0.0 <= lo <= hi <= HALF:
            raise DomainError(f"bad band [{lo}, {hi}]")
        inside = self.values[(self.z >= lo) & (self.z <= hi)]
        ends = np.interp([lo, hi], self.z, self.values)
        return float(np.max(np.abs(np.concatenate([inside, ends]))))

    # arithmetic, exact over merged knots
    def _merged(self, other: "EvenProfile"):
        knots = np.union1d(self.z, other.z)
        return knots, np.interp(knots, self.z, self.values), np.interp(knots, other.z, other.values)

    def __add__(self, other: "EvenProfile") -> "EvenProfile":
        knots, a, b = self._merged(other)
        return EvenProfile(knots, a + b)

    def __sub__(self, other: "EvenProfile") -> "EvenProfile":
        knots, a, b = self._merged(other)
        return EvenProfile(knots, a - b)

    def __neg__(self) -> "EvenProfile":
        return EvenProfile(self.z, -self.values)

    def __mul__(self, t: float) -> "EvenProfile":
        return EvenProfile(self.z, float(t) * self.values)

    __rmul__ = __mul__

    def sup_distance(self, other: "EvenProfile") -> float:
        _, a, b = self._merged(other)
        return float(np.max(np.abs(a - b)))

    def sample(self, n: int = 1001) -> tuple[np.ndarray, np.ndarray]:
        """Uniform grid of ``n`` points over the full interval [-1/2, 1/2]."""
        grid = np.linspace(-HALF, HALF, n)
        return grid, np.interp(np.abs(grid), self.z, self.values)

    # serialization
    def to_dict(self) -> dict:
        return {"knots": [[float(a), float(b)] for a, b in zip(self.z, self.values)]}

    @classmethod
    def from_dict(cls, d: dict) -> "EvenProfile":
        arr = np.asarray(d["knots"], dtype=float)
        return cls(arr[:, 0], arr[:, 1])

    def to_csv(self, n: int = 1001) -> str:
        grid, vals = self.sample(n)
        rows = ["z,value"] + [f"{a!r},{b!r}" for a, b in zip(grid.tolist(), vals.tolist())]
        return "\n".join(rows) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def sum_profiles(profiles: Sequence[EvenProfile]) -> EvenProfile:
    """Sum in the given order on the union of all knot grids."""
    if not profiles:
        return EvenProfile.zero()
    knots = np.unique(np.concatenate([p.z for p in profiles]))
    total = np.zeros_like(knots)
    for p in profiles:
        total += np.interp(knots, p.z, p.values)
    return EvenProfile(knots, total)


# thin functional wrappers ---------------------------------------------------

def evaluate(u: EvenProfile, z):
    return u(z)


def osc(u: EvenProfile) -> float:
    return u.osc()


def integral(u: EvenProfile) -> float:
    return u.integral()


def sup_distance(u: EvenProfile, v: EvenProfile) -> float:
    return u.sup_distance(v)


def scale(u: EvenProfile, t: float) -> EvenProfile:
    return u * t


def add(u: EvenProfile, v: EvenProfile) -> EvenProfile:
    return u + v


def inner_radius(k: int) -> float:
    """Half-width of I_k = [-1/2 + 1/(k+1), 1/2 - 1/(k+1)]."""
    return HALF - 1.0 / (k + 1)


def norm_k(u: EvenProfile, k: int) -> float:
    """max over I_k of |u| plus (2/k) times max of |u| over the closed tails."""
    if not isinstance(k, (int, np.integer)) or k < 2:
        raise BadK(f"norm_k needs an integer k >= 2, got {k!r}")
    c = inner_radius(k)
    return u.sup_on(0.0, c) + (2.0 / k) * u.sup_on(c, HALF)


def norms_up_to(u: EvenProfile, k_max: int) -> np.ndarray:
    """norm_k(u, k) for k = 2..k_max in one pass over the knots."""
    if not isinstance(k_max, (int, np.integer)) or k_max < 2:
        raise BadK(f"k_max must be an integer >= 2, got {k_max!r}")
    ks = np.arange(2, k_max + 1)
    c = HALF - 1.0 / (ks + 1)
    absval = np.abs(u.values)
    prefix = np.maximum.accumulate(absval)
    suffix = np.maximum.accumulate(absval[::-1])[::-1]
    at_c = np.abs(np.interp(c, u.z, u.values))
    idx = np.searchsorted(u.z, c, "right")
    inner = np.maximum(prefix[idx - 1], at_c)
    tail = np.maximum(suffix[idx], at_c)
    return inner + (2.0 / ks) * tail


# links ----------------------------------------------------------------------------

@dataclass(frozen=True)
class LinkSpec:
    """The k-point symmetric link {-1/2 + B + jC : j = 0..k-1}, C = (1-2B)/(k-1).

    Admissible B lies in (1/(k+1), 1/2].  For k = 1 that forces B = 1/2 (the
    single point 0); for k >= 2 the endpoint B = 1/2 is the degenerate link
    with every point at 0.
    """

    k: int
    B: float

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise BadK(f"link size must be a positive integer, got {self.k!r}")
        if self.k == 1:
            if abs(self.B - HALF) > 1e-12:
                raise DomainError(f"k = 1 admits only B = 1/2, got {self.B!r}")
            object.__setattr__(self, "B", HALF)
        elif not (1.0 / (self.k + 1) < self.B <= HALF):
            raise DomainError(f"B={self.B!r} outside (1/{self.k + 1}, 1/2] for k={self.k}")

    @property
    def spacing(self) -> float:
        return 0.0 if self.k == 1 else (1.0 - 2.0 * self.B) / (self.k - 1)

    @property
    def points(self) -> np.ndarray:
        j = np.arange(self.k)
        return -HALF + self.B + j * self.spacing


def link_average(u: EvenProfile, spec: LinkSpec) -> float:
    return float(np.mean(u(spec.points)))


def link_averages(u: EvenProfile, k: int, Bs: np.ndarray) -> np.ndarray:
    """Vectorized link averages for one k over many admissible B values."""
    Bs = np.asarray(Bs, dtype=float)
    if k == 1:
        return np.full(Bs.shape, u(0.0))
    j = np.arange(k)
    pts = -HALF + Bs[:, None] + j[None, :] * ((1.0 - 2.0 * Bs[:, None]) / (k - 1))
    return np.interp(np.abs(pts), u.z, u.values).mean(axis=1)


def reconstruct_via_links(u: EvenProfile, z: float, k: int) -> float:
    """Recover u(z) from the link averages at sizes k and k-2.

    With B = 1/2 - |z| the links L(k, B) and L(k-2, B + C) differ exactly in
    the two points +-z, so (k/2) avg_k - ((k-2)/2) avg_{k-2} = (u(z) + u(-z))/2.
    """
    if not isinstance(k, (int, np.integer)) or k < 3:
        raise BadK(f"reconstruction needs k >= 3, got {k!r}")
    if not abs(z) < inner_radius(k):
        raise DomainError(f"|z|={abs(z)} must be below 1/2 - 1/(k+1) = {inner_radius(k)}")
    B = HALF - abs(z)
    C = (1.0 - 2.0 * B) / (k - 1)
    outer = LinkSpec(k, B)
    inner = LinkSpec(k - 2, HALF if k == 3 else B + C)
    return 0.5 * k * link_average(u, outer) - 0.5 * (k - 2) * link_average(u, inner)


def combination_measure(terms: Iterable[tuple[float, LinkSpec]], decimals: int = 12) -> dict[float, float]:
    """Signed point-mass measure sum_i a_i * (uniform measure on L_i).

    Point locations are rounded to ``decimals`` places before aggregation.
    """
    masses: dict[float, float] = {}
    for a, spec in terms:
        for p in spec.points:
            key = round(float(p), decimals) + 0.0
            masses[key] = masses.get(key, 0.0) + a / spec.k
    return masses


def is_null_combination(terms: Sequence[tuple[float, LinkSpec]], tol: float = 1e-12) -> bool:
    return all(abs(m) <= tol for m in combination_measure(terms).values())


def combination_value(u: EvenProfile, terms: Sequence[tuple[float, LinkSpec]]) -> float:
    return float(sum(a * link_average(u, spec) for a, spec in terms))


def admissible_B_grid(k: int, n: int) -> np.ndarray:
    """``n`` uniformly spaced B values strictly inside (1/(k+1), 1/2); {1/2} for k = 1."""
    if k == 1:
        return np.array([HALF])
    lo = 1.0 / (k + 1)
    return np.linspace(lo, HALF, n + 2)[1:-1]

