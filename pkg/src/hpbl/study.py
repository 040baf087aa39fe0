"""Convergence experiments: p sweeps on layer-adapted meshes.

A study fixes a domain, sigma, and a list of eps values, then for each
polynomial degree p builds the mesh with q = L = n = p, solves

    -eps^2 lap(u) + u = f,  u = 0 on the boundary,

and measures the error, either against the closed-form manufactured
solution or against a once-computed higher-order reference solve on the
same macro layout.  Errors are fitted to C exp(-b p) (or
C exp(-b N^(1/4)) in dof mode) by least squares on the log.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .fem import (
    DiscreteField,
    _basis_for,
    _field_at,
    _inv_jacobians,
    _tables,
    assemble,
    error_norms,
)
from .layouts import builtin_layout, load_config
from .macro import Mesh, build_geo_bl_mesh, scale_resolution_L
from .meshio import convergence_svg, mesh_svg
from .oracles import manufactured_layer_solution
from .patches import PatchParams

__all__ = [
    "ExperimentConfig",
    "Row",
    "ConvergenceTable",
    "RateFit",
    "run_experiment",
    "reference_solution",
    "fit_exponential",
    "field_difference_norms",
    "export",
    "mesh_for",
]

_NORMS = ("energy", "balanced", "h1", "l2")
_MODES = ("manufactured", "reference")
_LAYERS = ("p", "balanced", "corner-only")


@dataclass(frozen=True)
class ExperimentConfig:
    domain: str = "square"  # square | lshape | slit | path to a config file
    eps: tuple = (1e-1, 1e-2, 1e-3, 1e-4)
    sigma: float = 0.25
    p_min: int = 1
    p_max: int = 6
    c1: float = 1.0
    norm: str = "energy"
    mode: str = "manufactured"
    layers: str = "p"  # p: L=n=p; balanced: L so sigma^L <= eps^2; corner-only: L=0
    solver: str = "cg"
    seed: int = 0
    allow_large_eps: bool = False

    def validate(self) -> None:
        if self.p_min < 1 or self.p_max < self.p_min:
            raise ValueError("need 1 <= p_min <= p_max")
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must lie in (0,1)")
        if self.c1 <= 0.0:
            raise ValueError("c1 must be positive")
        for e in self.eps:
            if e <= 0.0:
                raise ValueError("eps entries must be positive")
            if e > 1.0 and not self.allow_large_eps:
                raise ValueError(
                    "eps > 1 only makes sense for the regularly perturbed "
                    "check; set allow_large_eps"
                )
        if self.norm not in _NORMS:
            raise ValueError(f"norm must be one of {_NORMS}")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")
        if self.layers not in _LAYERS:
            raise ValueError(f"layers must be one of {_LAYERS}")


@dataclass
class Row:
    p: int
    N: int          # dimension of the homogeneous hp space
    error: float
    iters: int
    seconds: float


@dataclass
class ConvergenceTable:
    domain: str
    eps: float
    sigma: float
    norm: str
    mode: str
    rows: list[Row] = field(default_factory=list)

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]


@dataclass
class RateFit:
    mode: str   # "p" or "N^{1/4}"
    C: float
    b: float
    r2: float
    npoints: int


# ---------------------------------------------------------------------------
# mesh and solve plumbing

_DOMAIN_CACHE: dict = {}
_REF_CACHE: dict = {}


def _domain(config: ExperimentConfig):
    key = config.domain
    if key not in _DOMAIN_CACHE:
        if key in ("square", "lshape", "slit"):
            polygon, macro = builtin_layout(key)
            assignments = None
        else:
            polygon, macro, assignments = load_config(key)
        _DOMAIN_CACHE[key] = (polygon, macro, assignments)
    return _DOMAIN_CACHE[key]


def _layer_counts(config: ExperimentConfig, p: int, eps: float) -> tuple[int, int]:
    """(L, n) for a degree-p run."""
    if config.layers == "p":
        return p, p
    if config.layers == "corner-only":
        return 0, p
    # balanced-norm runs resolve eps^2: sigma^L <= eps^2
    L = max(p, scale_resolution_L(config.sigma, min(eps, 1.0) ** 2, config.c1))
    return L, max(p, L)


def mesh_for(config: ExperimentConfig, p: int, eps: float) -> Mesh:
    polygon, macro, assignments = _domain(config)
    L, n = _layer_counts(config, p, eps)
    params = PatchParams(sigma=config.sigma, L=L, n=n)
    return build_geo_bl_mesh(macro, polygon, params, assignments)


def _solve_cell(config: ExperimentConfig, mesh: Mesh, q: int, eps: float):
    ms = manufactured_layer_solution(eps)
    f = ms.f if config.mode == "manufactured" else 1.0
    system = assemble(mesh, q, eps, 1.0, f)
    try:
        fld, stats = system.solve(method=config.solver)
    except RuntimeError as exc:
        raise RuntimeError(f"solver failed at p={q}, eps={eps:g}: {exc}") from exc
    return fld, stats, ms


def _pick(norms: dict, which: str) -> float:
    return float(norms[which])


def run_experiment(config: ExperimentConfig) -> list[ConvergenceTable]:
    """One ConvergenceTable per eps, rows over p = p_min..p_max."""
    config.validate()
    tables = []
    for eps in config.eps:
        table = ConvergenceTable(
            domain=config.domain,
            eps=eps,
            sigma=config.sigma,
            norm=config.norm,
            mode=config.mode,
        )
        ref = reference_solution(config, eps) if config.mode == "reference" else None
        for p in range(config.p_min, config.p_max + 1):
            t0 = time.perf_counter()
            mesh = mesh_for(config, p, eps)
            fld, stats, ms = _solve_cell(config, mesh, p, eps)
            if config.mode == "manufactured":
                norms = error_norms(fld, ms.value, ms.grad, eps, 1.0)
            else:
                norms = field_difference_norms(ref, fld, eps, 1.0)
            row = Row(
                p=p,
                N=fld.dofmap.nfree,
                error=_pick(norms, config.norm),
                iters=stats["iterations"],
                seconds=time.perf_counter() - t0,
            )
            table.rows.append(row)
        ns = table.column("N")
        if any(b < a for a, b in zip(ns, ns[1:])):
            raise RuntimeError(f"dof count not nondecreasing in p: {ns}")
        tables.append(table)
    return tables


def reference_solution(config: ExperimentConfig, eps: float) -> DiscreteField:
    """Higher-order solve (q = L = n = p_max + 2) on the same layout, cached."""
    key = (config.domain, eps, config.sigma, config.p_max, config.layers, config.mode)
    if key not in _REF_CACHE:
        p_ref = config.p_max + 2
        ref_cfg = replace(config, layers="p" if config.layers != "corner-only" else config.layers)
        mesh = mesh_for(ref_cfg, p_ref, eps)
        fld, _, _ = _solve_cell(config, mesh, p_ref, eps)
        _REF_CACHE[key] = fld
    return _REF_CACHE[key]


# ---------------------------------------------------------------------------
# comparing fields that live on different refinements of one macro layout


class _QuadLocator:
    """Locate pattern-coordinate points inside one macro quad of a field."""

    def __init__(self, fld: DiscreteField, qid: int):
        self.fld = fld
        self.members = [
            ei for ei, el in enumerate(fld.mesh.elements) if el.macro_id == qid
        ]
        self.placements = [fld.mesh.element_map(ei).placement for ei in self.members]

    def eval(self, pat_pts: np.ndarray, tol: float = 1e-9):
        """Values and pattern-frame gradients at the given pattern points."""
        npts = len(pat_pts)
        vals = np.empty(npts)
        grads = np.empty((npts, 2))
        todo = np.ones(npts, dtype=bool)
        for ei, place in zip(self.members, self.placements):
            if not todo.any():
                break
            idx = np.nonzero(todo)[0]
            ref = place.to_reference(pat_pts[idx])
            el = self.fld.mesh.elements[ei]
            if el.shape == "r":
                inside = np.all(ref >= -tol, axis=1) & np.all(ref <= 1.0 + tol, axis=1)
            else:
                inside = (
                    (ref[:, 0] >= -tol)
                    & (ref[:, 0] <= 1.0 + tol)
                    & (ref[:, 1] >= -tol)
                    & (ref[:, 1] <= ref[:, 0] + tol)
                )
            if not inside.any():
                continue
            hit = idx[inside]
            basis = _basis_for(el.shape, self.fld.q)
            co = self.fld.coeffs[self.fld.dofmap.elem_dofs[ei]]
            rp = np.clip(ref[inside], 0.0, 1.0)
            vals[hit] = basis.eval(rp) @ co
            gref = np.einsum("pnd,n->pd", basis.grad(rp), co)
            grads[hit] = place.push_gradient(gref)
            todo[hit] = False
        if todo.any():
            raise ValueError(
                f"{int(todo.sum())} points not located in macro quad; "
                "fields must share the macro layout"
            )
        return vals, grads


def field_difference_norms(ref: DiscreteField, fld: DiscreteField, eps: float, c) -> dict:
    """Norms of ref - fld for fields on two refinements of one macro layout.

    Integration runs over the finer field's elements (the reference), with
    the coarser field evaluated through shared pattern coordinates.
    """
    if ref.mesh.oriented != fld.mesh.oriented:
        raise ValueError("fields live on different macro layouts")
    locators = {}
    l2 = h1 = mass = 0.0
    m = ref.q + 2
    for ei, el in enumerate(ref.mesh.elements):
        pts, w, B, G = _tables(el.shape, ref.q, m)
        emap = ref.mesh.element_map(ei)
        det, invJ = _inv_jacobians(emap.jacobian(pts))
        phys = emap.points(pts)
        wdet = w * det
        co = ref.coeffs[ref.dofmap.elem_dofs[ei]]
        vals = B @ co
        grads = np.einsum("pnd,n->pd", G @ invJ, co)

        qid = el.macro_id
        if qid not in locators:
            locators[qid] = _QuadLocator(fld, qid)
        pat = emap.placement.to_pattern(pts)
        ovals, ograds_pat = locators[qid].eval(pat)
        # push the coarse field's pattern gradients to physical coordinates
        _, invJb = _inv_jacobians(ref.mesh.quad_map(qid).jacobian(pat))
        ograds = np.einsum("pd,pde->pe", ograds_pat, invJb)

        dv = vals - ovals
        dg = grads - ograds
        l2 += float(wdet @ (dv * dv))
        h1 += float(wdet @ np.einsum("pd,pd->p", dg, dg))
        mass += float(wdet @ (_field_at(c, phys) * dv * dv))
    return {
        "l2": math.sqrt(l2),
        "h1": math.sqrt(h1),
        "energy": math.sqrt(eps * eps * h1 + mass),
        "balanced": math.sqrt(eps * h1 + l2),
    }


# ---------------------------------------------------------------------------
# rate fits and export


def fit_exponential(table: ConvergenceTable, mode: str = "p") -> RateFit:
    """Least squares of log(error) against p (or N^(1/4)); rows with p >= 2."""
    if mode not in ("p", "N^{1/4}"):
        raise ValueError("mode must be 'p' or 'N^{1/4}'")
    if len(table.rows) < 3:
        raise ValueError("need at least 3 rows to fit")
    rows = [r for r in table.rows if r.p >= 2]
    if any(r.error <= 0.0 for r in rows):
        raise ValueError("nonpositive errors cannot be fitted")
    x = np.array([r.p if mode == "p" else r.N ** 0.25 for r in rows])
    y = np.log([r.error for r in rows])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return RateFit(
        mode=mode, C=float(np.exp(intercept)), b=float(-slope) + 0.0, r2=r2, npoints=len(rows)
    )


def export(
    tables: list[ConvergenceTable],
    fits: list[RateFit] | None,
    out_dir: str,
    config: ExperimentConfig | None = None,
    zero_timings: bool = False,
) -> list[str]:
    """Write results.csv, rates.csv, a convergence plot, and mesh renderings.

    All output bytes are deterministic for fixed inputs, except that the
    measured seconds column reflects real time; pass zero_timings=True to
    blank it when byte-identical reruns matter.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []

    path = os.path.join(out_dir, "results.csv")
    lines = ["domain,eps,sigma,p,N,error,iters,seconds"]
    for t in tables:
        for r in t.rows:
            secs = 0.0 if zero_timings else r.seconds
            lines.append(
                f"{t.domain},{t.eps:g},{t.sigma:g},{r.p},{r.N},{r.error!r},{r.iters},{secs:.3f}"
            )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    written.append(path)

    if fits:
        path = os.path.join(out_dir, "rates.csv")
        lines = ["domain,eps,mode,C,b,r2,npoints"]
        for t, ft in zip(tables, fits):
            lines.append(
                f"{t.domain},{t.eps:g},{ft.mode},{ft.C!r},{ft.b!r},{ft.r2!r},{ft.npoints}"
            )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        written.append(path)

    if tables:
        series = [
            (f"eps={t.eps:g}", t.column("p"), t.column("error")) for t in tables
        ]
        path = os.path.join(out_dir, "convergence.svg")
        with open(path, "w") as fh:
            fh.write(convergence_svg(series))
        written.append(path)

    if config is not None and tables:
        stem = os.path.splitext(os.path.basename(config.domain))[0]
        for p in sorted({r.p for r in tables[0].rows}):
            mesh = mesh_for(config, p, tables[0].eps)
            path = os.path.join(out_dir, f"mesh_{stem}_p{p}.svg")
            with open(path, "w") as fh:
                fh.write(mesh_svg(mesh))
            written.append(path)
    return written
