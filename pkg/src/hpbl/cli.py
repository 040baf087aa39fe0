"""Command line driver.

Subcommands:
    mesh   build one layer-adapted mesh, validate it, dump text + SVG
    solve  single solve at one (p, eps), print sizes and error norms
    study  full p sweep over an eps list; writes CSV, rate fits, SVGs
    fit    recompute rate fits from a previously written results.csv

Options can come from a JSON config file (--config) with the same keys
as ExperimentConfig; command line flags override the file.  Exit codes:
0 success, 2 invalid input or mesh validation failure, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .fem import assemble, error_norms
from .layouts import builtin_layout, layout_names, load_config
from .macro import build_geo_bl_mesh, validate_mesh
from .meshio import write_mesh_svg, write_mesh_text
from .oracles import manufactured_layer_solution
from .patches import PatchParams
from .study import (
    ConvergenceTable,
    ExperimentConfig,
    Row,
    export,
    fit_exponential,
    run_experiment,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3


def _load_domain(name: str):
    if name in layout_names():
        polygon, macro = builtin_layout(name)
        return polygon, macro, None
    return load_config(name)


def _config_from(args) -> ExperimentConfig:
    fields = {}
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
        known = set(ExperimentConfig.__dataclass_fields__)
        bad = set(raw) - known
        if bad:
            raise ValueError(f"unknown config keys: {sorted(bad)}")
        fields.update(raw)
    if getattr(args, "domain", None):
        fields["domain"] = args.domain
    if getattr(args, "eps", None):
        fields["eps"] = tuple(args.eps)
    if getattr(args, "sigma", None) is not None:
        fields["sigma"] = args.sigma
    if getattr(args, "pmax", None) is not None:
        fields["p_max"] = args.pmax
    if getattr(args, "norm", None):
        fields["norm"] = args.norm
    if getattr(args, "mode", None):
        fields["mode"] = args.mode
    if getattr(args, "layers", None):
        fields["layers"] = args.layers
    if "eps" in fields:
        fields["eps"] = tuple(float(e) for e in fields["eps"])
    cfg = ExperimentConfig(**fields)
    cfg.validate()
    return cfg


def cmd_mesh(args) -> int:
    polygon, macro, assignments = _load_domain(args.domain)
    params = PatchParams(sigma=args.sigma, L=args.L, n=args.n if args.n is not None else args.L)
    mesh = build_geo_bl_mesh(macro, polygon, params, assignments)
    report = validate_mesh(mesh)
    print(f"domain={args.domain} sigma={args.sigma} L={params.L} n={params.n}")
    print(f"elements={mesh.element_count()} nodes={mesh.node_count()}")
    for w in report.warnings:
        print(f"warning: {w}")
    for v in report.violations:
        print(f"violation: {v}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        stem = os.path.splitext(os.path.basename(args.domain))[0]
        base = os.path.join(args.out, f"mesh_{stem}")
        write_mesh_text(mesh, base + ".txt")
        write_mesh_svg(mesh, base + ".svg")
        print(f"wrote {base}.txt and {base}.svg")
    return EXIT_OK if report.clean else EXIT_INVALID


def cmd_solve(args) -> int:
    cfg = _config_from(args)
    eps = cfg.eps[0]
    from .study import mesh_for

    mesh = mesh_for(cfg, args.p, eps)
    ms = manufactured_layer_solution(eps)
    f = ms.f if cfg.mode == "manufactured" else 1.0
    system = assemble(mesh, args.p, eps, 1.0, f)
    try:
        fld, stats = system.solve(method=cfg.solver)
    except RuntimeError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(f"p={args.p} eps={eps:g} N={fld.dofmap.nfree} iters={stats['iterations']}")
    if cfg.mode == "manufactured":
        norms = error_norms(fld, ms.value, ms.grad, eps, 1.0)
        for k in ("l2", "h1", "energy", "balanced"):
            print(f"{k:9s} error = {norms[k]:.6e}")
    return EXIT_OK


def cmd_study(args) -> int:
    cfg = _config_from(args)
    try:
        tables = run_experiment(cfg)
    except RuntimeError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    fits = [fit_exponential(t) for t in tables]
    for t, ft in zip(tables, fits):
        print(f"eps={t.eps:g}: b={ft.b:.4f} r2={ft.r2:.4f} over {ft.npoints} points")
    if args.out:
        paths = export(tables, fits, args.out, config=cfg, zero_timings=args.zero_timings)
        for p in paths:
            print(f"wrote {p}")
    return EXIT_OK


def cmd_fit(args) -> int:
    tables: dict[tuple, ConvergenceTable] = {}
    with open(args.csv) as fh:
        header = fh.readline().strip()
        if header != "domain,eps,sigma,p,N,error,iters,seconds":
            raise ValueError(f"unexpected CSV header: {header}")
        for line in fh:
            dom, eps, sigma, p, N, err, iters, secs = line.strip().split(",")
            key = (dom, float(eps))
            if key not in tables:
                tables[key] = ConvergenceTable(
                    domain=dom, eps=float(eps), sigma=float(sigma), norm="?", mode="?"
                )
            tables[key].rows.append(
                Row(p=int(p), N=int(N), error=float(err), iters=int(iters), seconds=float(secs))
            )
    mode = "p" if args.mode == "p" else "N^{1/4}"
    for key in sorted(tables):
        ft = fit_exponential(tables[key], mode=mode)
        print(f"domain={key[0]} eps={key[1]:g}: b={ft.b:.4f} r2={ft.r2:.4f} C={ft.C:.4g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hpbl", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    pm = sub.add_parser("mesh", help="build, validate, and dump one mesh")
    pm.add_argument("--domain", default="square", help="square|lshape|slit|config file")
    pm.add_argument("--sigma", type=float, default=0.25)
    pm.add_argument("-L", type=int, default=2, help="boundary layer count")
    pm.add_argument("-n", type=int, default=None, help="corner layer count (default: L)")
    pm.add_argument("--out", default=None, help="directory for text/SVG dumps")
    pm.set_defaults(func=cmd_mesh)

    ps = sub.add_parser("solve", help="single solve at one degree")
    ps.add_argument("--config", default=None)
    ps.add_argument("--domain", default=None)
    ps.add_argument("--eps", type=float, nargs="+", default=None)
    ps.add_argument("--sigma", type=float, default=None)
    ps.add_argument("--pmax", type=int, default=None)
    ps.add_argument("--norm", default=None)
    ps.add_argument("--mode", default=None)
    ps.add_argument("--layers", default=None)
    ps.add_argument("-p", type=int, default=3, help="polynomial degree / layer count")
    ps.set_defaults(func=cmd_solve)

    pt = sub.add_parser("study", help="full convergence sweep")
    pt.add_argument("--config", default=None)
    pt.add_argument("--domain", default=None)
    pt.add_argument("--eps", type=float, nargs="+", default=None)
    pt.add_argument("--sigma", type=float, default=None)
    pt.add_argument("--pmax", type=int, default=None)
    pt.add_argument("--norm", default=None)
    pt.add_argument("--mode", default=None)
    pt.add_argument("--layers", default=None)
    pt.add_argument("--out", default=None, help="output directory")
    pt.add_argument("--zero-timings", action="store_true", dest="zero_timings",
                    help="blank the seconds column for byte-identical output")
    pt.set_defaults(func=cmd_study)

    pf = sub.add_parser("fit", help="rate fits from a results.csv")
    pf.add_argument("--csv", required=True)
    pf.add_argument("--mode", choices=["p", "dof"], default="p")
    pf.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
