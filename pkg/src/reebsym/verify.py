"""Invariant sweep behind the ``verify`` command.

Every check returns one :class:`OracleReport`.  A fault can be injected into
a named check to exercise the failure path of the harness.
"""

from __future__ import annotations

import time
from typing import Callable

import numpy as np

from .analysis import classify, holder_bound, mesh_tolerance, period_profile, profile_hofer_bound, sikorav_estimate
from .contour import arcs_spanning, contour_tree, level_component_count, sublevel_area, symmetrize_field
from .flatten import check_flattening_bound, make_admissible_flattening, tree_critical_values
from .mesh import BUILTIN_FIELDS, builtin_field, make_icosphere
from .oracle import OracleReport, dense_grid_symmetrize, mc_sublevel_area
from .profile import EvenProfile, LinkSpec, combination_value, inner_radius, reconstruct_via_links
from .tree import (random_function_on, random_tree, single_edge_function, symmetrize_tree,
                   worked_path_example)

FAULT_OFFSET = 1e-3


def _random_trees(count: int):
    return [random_tree(seed, 1 + seed % 15) for seed in range(count)]


def check_worked_examples(quick: bool, fault: float) -> OracleReport:
    z = np.linspace(-0.5, 0.5, 10001)
    tree, h = worked_path_example()
    dev = np.max(np.abs(symmetrize_tree(tree, h)(z) + fault - (1 - 4 * np.abs(z))))
    tree, h = single_edge_function(lambda s: s ** 2 - 1 / 3, 2 ** 18 + 1)
    dev = max(dev, np.max(np.abs(symmetrize_tree(tree, h)(z) - (z ** 2 - 1 / 12))))
    return OracleReport.deviation("worked_examples", float(dev), 1e-11)


def check_oracle_equivalence(quick: bool, fault: float) -> OracleReport:
    worst = 0.0
    for tree, h in _random_trees(20 if quick else 200):
        z, ref = dense_grid_symmetrize(tree, h)
        worst = max(worst, float(np.max(np.abs(symmetrize_tree(tree, h)(z) + fault - ref))))
    return OracleReport.deviation("oracle_equivalence", worst, 1e-9)


def check_linearity(quick: bool, fault: float) -> OracleReport:
    rng = np.random.default_rng(11)
    worst = 0.0
    for i, (tree, h) in enumerate(_random_trees(20 if quick else 200)):
        g = random_function_on(tree, 10_000 + i)
        a, b = rng.uniform(-10, 10, size=2)
        lhs = symmetrize_tree(tree, h.combine(g, a, b).normalized())
        rhs = a * symmetrize_tree(tree, h) + b * symmetrize_tree(tree, g)
        worst = max(worst, lhs.sup_distance(rhs) + fault)
    return OracleReport.deviation("linearity", worst, 1e-11)


def check_mean_zero(quick: bool, fault: float) -> OracleReport:
    worst = max(abs(symmetrize_tree(t, h).integral() + fault) for t, h in _random_trees(20 if quick else 200))
    return OracleReport.deviation("mean_zero", worst, 1e-10)


def check_lipschitz(quick: bool, fault: float) -> OracleReport:
    """Largest excess of sup_{I_k}|Sigma h - Sigma h'| over (k-1) sup|h - h'|."""
    worst = -np.inf
    for i, (tree, h) in enumerate(_random_trees(10 if quick else 50)):
        g = random_function_on(tree, 20_000 + i)
        d = (symmetrize_tree(tree, h) - symmetrize_tree(tree, g))
        dist = h.sup_distance(g)
        for k in range(2, 11):
            worst = max(worst, d.sup_on(0.0, inner_radius(k)) + fault - (k - 1) * dist)
    return OracleReport("lipschitz_excess", float(worst), 0.0, 1e-10, float(max(worst, 0.0)), 0.0,
                        bool(worst <= 1e-10))


def check_oscillation(quick: bool, fault: float) -> OracleReport:
    worst = -np.inf
    for tree, h in _random_trees(20 if quick else 200):
        worst = max(worst, symmetrize_tree(tree, h).osc() + fault - tree.n_edges * h.osc())
    return OracleReport("oscillation_excess", float(worst), 0.0, 1e-10, float(max(worst, 0.0)), 0.0,
                        bool(worst <= 1e-10))


def check_flattening(quick: bool, fault: float) -> OracleReport:
    worst = -np.inf
    for tree, h in _random_trees(10 if quick else 100):
        r = make_admissible_flattening(tree_critical_values(h), 0.02 * h.osc())
        rep = check_flattening_bound(tree, h, r)
        worst = max(worst, rep.lhs + fault - rep.rhs)
    return OracleReport("flattening_excess", float(worst), 0.0, 1e-10, float(max(worst, 0.0)), 0.0,
                        bool(worst <= 1e-10))


def check_link_reconstruction(quick: bool, fault: float) -> OracleReport:
    rng = np.random.default_rng(5)
    worst = 0.0
    for _, h in _random_trees(5 if quick else 20):
        u = symmetrize_tree(h.tree, h)
        for _ in range(50):
            k = int(rng.integers(3, 13))
            z = float(rng.uniform(-1, 1) * inner_radius(k) * 0.999)
            worst = max(worst, abs(reconstruct_via_links(u, z, k) + fault - u(z)))
    B = 0.4
    terms = [(3.0, LinkSpec(3, B)), (-2.0, LinkSpec(2, B)), (-1.0, LinkSpec(1, 0.5))]
    u = EvenProfile.from_function(lambda z: z ** 2 - 1 / 12)
    worst = max(worst, abs(combination_value(u, terms)))
    return OracleReport.deviation("link_reconstruction", worst, 1e-10)


def check_mesh_pipeline(quick: bool, fault: float) -> OracleReport:
    level = 3 if quick else 5
    mesh = make_icosphere(level)
    worst = 0.0
    z = np.linspace(-0.5, 0.5, 2001)
    for name in ("height_z", "height_x", "cubic_z"):
        f = builtin_field(mesh, name)
        worst = max(worst, symmetrize_field(mesh, f).sup() / f.osc())
    f = builtin_field(mesh, "quadratic_z")
    dev = np.max(np.abs(symmetrize_field(mesh, f)(z) - (z ** 2 - 1 / 12))) / f.osc()
    worst = max(worst, float(dev)) + fault
    return OracleReport.deviation(f"mesh_pipeline_icosphere{level}", worst, 0.02 if not quick else 0.05)


def check_dichotomy(quick: bool, fault: float) -> OracleReport:
    mesh = make_icosphere(3 if quick else 5)
    fx = builtin_field(mesh, "height_x")
    bounded = classify(symmetrize_field(mesh, fx), mesh_tolerance(fx.osc()))
    fq = builtin_field(mesh, "quadratic_z")
    linear = classify(symmetrize_field(mesh, fq), mesh_tolerance(fq.osc()))
    ok = bounded.verdict == "Bounded" and bounded.hofer_bound == 19 and linear.verdict == "Linear"
    rep = OracleReport.compare("dichotomy_rho_quadratic", linear.rho_lower + fault, 1 / 12, 0.01)
    return OracleReport(rep.quantity, rep.value, rep.oracle, rep.tolerance, rep.abs_deviation,
                        rep.rel_deviation, rep.passed and ok)


def check_contour_structure(quick: bool, fault: float) -> OracleReport:
    mesh = make_icosphere(3 if quick else 4)
    rng = np.random.default_rng(3)
    mismatches = 0
    for name in BUILTIN_FIELDS:
        if name == "zero":
            continue
        f = builtin_field(mesh, name)
        ct = contour_tree(mesh, f)
        leaves = sum(1 for v in ct.raw_nodes
                     if sum(1 for a in ct.raw_arcs if v in (a.bottom, a.top)) == 1)
        mismatches += leaves != len(ct.extrema())
        mismatches += len(ct.raw_arcs) != ct.n_critical - 1
        mismatches += abs(sum(e.measure for e in ct.tree.edges) - 1) > 1e-9
        for t in rng.uniform(f.values.min(), f.values.max(), 10):
            mismatches += level_component_count(mesh, f, t) != arcs_spanning(ct, f.values, t)
    return OracleReport.deviation("contour_structure_mismatches", mismatches + fault, 0.5)


def check_period(quick: bool, fault: float) -> OracleReport:
    mesh = make_icosphere(3 if quick else 5)
    f = builtin_field(mesh, "height_z")
    ct = contour_tree(mesh, f)
    dev = period_profile(ct.tree, ct.function, 0).relative_l1_deviation(1.0)
    ct2 = contour_tree(mesh, f.scaled(2.0))
    dev2 = period_profile(ct2.tree, ct2.function, 0).relative_l1_deviation(0.5)
    return OracleReport.deviation("period_relative_deviation", max(dev, dev2) + fault, 0.05)


def check_sublevel_area(quick: bool, fault: float) -> OracleReport:
    mesh = make_icosphere(3)
    f = builtin_field(mesh, "double_bump")
    rng = np.random.default_rng(9)
    worst = 0.0
    for i, t in enumerate(rng.uniform(f.values.min(), f.values.max(), 5 if quick else 20)):
        mc = mc_sublevel_area(mesh, f, t, 10 ** 5, seed=i)
        sigma = max(mc.stderr, 1.0 / mc.n_samples)
        worst = max(worst, abs(sublevel_area(mesh, f, t) + fault - mc.value) / sigma)
    return OracleReport.deviation("sublevel_area_sigmas", worst, 4.0)


def check_bound_calculators(quick: bool, fault: float) -> OracleReport:
    errs = [abs(sikorav_estimate(1, 4) + fault - 1.0), abs(profile_hofer_bound(EvenProfile.zero(), 1000) - 0.006),
            abs(holder_bound(0, 5.0, 6.0))]
    return OracleReport.deviation("bound_calculators", max(errs), 0.0)


CHECKS: dict[str, Callable[[bool, float], OracleReport]] = {
    "worked_examples": check_worked_examples,
    "oracle_equivalence": check_oracle_equivalence,
    "mean_zero": check_mean_zero,
    "linearity": check_linearity,
    "lipschitz": check_lipschitz,
    "oscillation": check_oscillation,
    "flattening": check_flattening,
    "link_reconstruction": check_link_reconstruction,
    "mesh_pipeline": check_mesh_pipeline,
    "dichotomy": check_dichotomy,
    "contour_structure": check_contour_structure,
    "period": check_period,
    "sublevel_area": check_sublevel_area,
    "bound_calculators": check_bound_calculators,
}


def run_checks(quick: bool = False, inject_fault: str | None = None,
               only: list[str] | None = None) -> list[tuple[str, OracleReport, float]]:
    """Run the suite in a fixed order; returns (name, report, seconds) triples."""
    if inject_fault is not None and inject_fault not in CHECKS:
        raise KeyError(inject_fault)
    out = []
    for name, fn in CHECKS.items():
        if only and name not in only:
            continue
        t0 = time.perf_counter()
        rep = fn(quick, FAULT_OFFSET if name == inject_fault else 0.0)
        out.append((name, rep, time.perf_counter() - t0))
    return out
