"""Command-line front end.

Exit codes: 0 ok, 1 verification failure, 2 I/O, 3 topology, 4 degenerate
input, 5 bad configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .analysis import (DEFAULT_BGRID, DEFAULT_KMAX, MIN_BGRID, TREE_TAU, classification_report, classify,
                       mesh_tolerance)
from .contour import contour_tree, symmetrize_field
from .errors import ConfigError, ReebSymError
from .mesh import (MAX_SUBDIVISIONS, ScalarField, builtin_field, load_field_csv, load_mesh, make_icosphere,
                   normalize_mean_zero, normalize_total_area, write_field_csv, write_off)
from .tree import load_tree_json, random_tree, save_tree_json, symmetrize_tree
from .verify import CHECKS, run_checks


FORMAT_VERSION = "reebsym/1"
EXIT_OK, EXIT_VERIFY, EXIT_IO, EXIT_CONFIG = 0, 1, 2, 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def parse_field_spec(spec: str) -> tuple[str, dict[str, float]]:
    """``NAME`` or ``NAME:key=value,key=value``."""
    name, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"field parameter {item!r} is not key=value")
        try:
            params[key.strip()] = float(val)
        except ValueError:
            raise ConfigError(f"field parameter {key!r} is not a number: {val!r}") from None
    return name.strip(), params


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _envelope(args, payload: dict) -> dict:
    return {"format_version": FORMAT_VERSION, "config": _config(args), **payload}


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1, sort_keys=False) + "\n")


def _validate(args) -> None:
    if getattr(args, "icosphere", None) is not None and not 0 <= args.icosphere <= MAX_SUBDIVISIONS:
        raise ConfigError(f"--icosphere must lie in [0, {MAX_SUBDIVISIONS}]")
    if getattr(args, "kmax", DEFAULT_KMAX) < 1:
        raise ConfigError("--kmax must be >= 1")
    if getattr(args, "bgrid", DEFAULT_BGRID) < MIN_BGRID:
        raise ConfigError(f"--bgrid must be >= {MIN_BGRID}")
    if getattr(args, "tol", None) is not None and not args.tol > 0:
        raise ConfigError("--tol must be positive")
    if getattr(args, "grid", 1001) < 2:
        raise ConfigError("--grid must be >= 2")


def _load_mesh_field(args) -> ScalarField:
    if args.mesh and args.icosphere is not None:
        raise ConfigError("give either --mesh or --icosphere, not both")
    if args.mesh:
        mesh = normalize_total_area(load_mesh(args.mesh))
    elif args.icosphere is not None:
        mesh = make_icosphere(args.icosphere)
    else:
        raise ConfigError("a surface is required: --mesh PATH or --icosphere N")
    if args.field_csv and args.field:
        raise ConfigError("give either --field or --field-csv, not both")
    if args.field_csv:
        return normalize_mean_zero(load_field_csv(mesh, args.field_csv))
    name, params = parse_field_spec(args.field or "height_z")
    return builtin_field(mesh, name, params)


def _profile_from_inputs(args):
    """(profile, tolerance, source summary) from a tree JSON or mesh + field."""
    if args.tree:
        if args.mesh or args.icosphere is not None:
            raise ConfigError("give either --tree or a mesh, not both")
        tree, h = load_tree_json(args.tree)
        h = h.normalized()
        return symmetrize_tree(tree, h), getattr(args, "tol", None) or TREE_TAU, {"tree": args.tree, "edges": tree.n_edges}
    f = _load_mesh_field(args)
    u = symmetrize_field(f.mesh, f)
    tol = getattr(args, "tol", None) or mesh_tolerance(f.osc())
    return u, tol, {"field": f.name, "vertices": f.mesh.n_vertices, "field_osc": f.osc()}


def cmd_reeb(args) -> int:
    f = _load_mesh_field(args)
    ct = contour_tree(f.mesh, f)
    out = Path(args.out) / "tree.json"
    extra = _envelope(args, {
        "field": f.name,
        "critical_points": [{"vertex": c.vertex, "kind": c.kind, "value": c.value,
                             "multiplicity": c.multiplicity} for c in ct.critical],
    })
    out.parent.mkdir(parents=True, exist_ok=True)
    save_tree_json(ct.function, out, extra, ct.node_kinds)
    print(f"{ct.tree.n_edges} edge(s), {ct.n_critical} critical point(s) -> {out}")
    return EXIT_OK


def cmd_symmetrize(args) -> int:
    u, _, source = _profile_from_inputs(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "profile.csv").write_text(u.to_csv(args.grid))
    _write_json(out / "profile.json", _envelope(args, {
        "source": source, "profile": u.to_dict(), "sup": u.sup(), "osc": u.osc(), "integral": u.integral()}))
    print(f"sup |Sigma| = {u.sup():.6g} -> {out / 'profile.csv'}")
    return EXIT_OK


def cmd_classify(args) -> int:
    u, tol, source = _profile_from_inputs(args)
    cls = classify(u, tol, args.kmax, args.bgrid)
    report = _envelope(args, {"source": source, **classification_report(u, cls, args.kmax)})
    _write_json(Path(args.out) / "classification.json", report)
    print(json.dumps({k: report[k] for k in ("verdict", "rho_lower", "hofer_bound") if k in report}))
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.inject_fault and args.inject_fault not in CHECKS:
        raise ConfigError(f"unknown check {args.inject_fault!r}; choose from {', '.join(CHECKS)}")
    results = run_checks(quick=args.quick, inject_fault=args.inject_fault)
    failed = []
    for name, rep, secs in results:
        status = "PASS" if rep.passed else "FAIL"
        print(f"{status}  {name:<22} value={rep.value:.3e} tol={rep.tolerance:.1e}  ({secs:.2f}s)")
        if not rep.passed:
            failed.append(name)
    _write_json(Path(args.out) / "verify.json", _envelope(args, {
        "checks": [dict(rep.to_dict(), check=name) for name, rep, _ in results],
        "failed": failed}))
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_gen(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.random_tree is not None:
        if args.random_tree < 1:
            raise ConfigError("--random-tree needs at least one edge")
        _, h = random_tree(args.seed, args.random_tree)
        path = out / f"random_tree_{args.seed}_{args.random_tree}.json"
        save_tree_json(h, path, _envelope(args, {}))
        print(path)
        return EXIT_OK
    level = 3 if args.icosphere is None else args.icosphere
    mesh = make_icosphere(level)
    mesh_path = out / f"icosphere{level}.off"
    write_off(mesh, mesh_path)
    print(mesh_path)
    if args.field:
        name, params = parse_field_spec(args.field)
        f = builtin_field(mesh, name, params)
        field_path = out / f"icosphere{level}_{name}.csv"
        write_field_csv(f, field_path)
        print(field_path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="reebsym", description="Symmetrization of scalar fields on triangulated spheres.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def surface(sp, tree=False):
        sp.add_argument("--mesh", help="OFF or OBJ triangle mesh of a sphere")
        sp.add_argument("--icosphere", type=int, metavar="N", help="subdivided icosahedron level")
        sp.add_argument("--field", metavar="NAME[:k=v,...]", help="builtin field (default height_z)")
        sp.add_argument("--field-csv", metavar="PATH", help="per-vertex values as vertex_index,value")
        if tree:
            sp.add_argument("--tree", metavar="PATH", help="measured tree JSON instead of a mesh")
        sp.add_argument("--out", default=".", metavar="DIR")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("reeb", help="contour tree of a field, written as JSON")
    surface(sp)
    sp.set_defaults(func=cmd_reeb)

    sp = sub.add_parser("symmetrize", help="symmetrization profile as CSV and JSON")
    surface(sp, tree=True)
    sp.add_argument("--grid", type=int, default=1001, help="CSV sample count")
    sp.set_defaults(func=cmd_symmetrize)

    sp = sub.add_parser("classify", help="linear versus bounded growth verdict")
    surface(sp, tree=True)
    sp.add_argument("--tol", type=float, help="classification tolerance")
    sp.add_argument("--kmax", type=int, default=DEFAULT_KMAX)
    sp.add_argument("--bgrid", type=int, default=DEFAULT_BGRID)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("verify", help="run the invariant suite")
    sp.add_argument("--quick", action="store_true", help="small subset")
    sp.add_argument("--inject-fault", metavar="CHECK", help="perturb one check (harness test)")
    sp.add_argument("--out", default=".", metavar="DIR")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("gen", help="write an icosphere mesh, a builtin field or a random tree")
    sp.add_argument("--icosphere", type=int, metavar="N")
    sp.add_argument("--field", metavar="NAME[:k=v,...]")
    sp.add_argument("--random-tree", type=int, metavar="EDGES")
    sp.add_argument("--out", default=".", metavar="DIR")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_gen)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _validate(args)
        return args.func(args)
    except ReebSymError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # malformed tree JSON and similar input problems
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
