"""Continuous hp finite elements on refined macro meshes.

Degrees of freedom follow the nodal bases: one per mesh node, q-1 per
facet (ordered away from the facet's lower-numbered node, so the two
elements sharing it agree), and the rest interior to elements.  Edge
restrictions of both the tensor and the triangle basis are univariate
Lagrange interpolants on Gauss-Lobatto points of the same degree,
which makes the glued space H1-conforming also across the
rectangle/triangle interfaces inside the patterns.

The assembled problem is

    eps^2 (A grad u, grad v) + (c u, v) = (f, v),   u = 0 on the boundary,

with A a symmetric 2x2 diffusion field (identity when omitted).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .macro import Mesh
from .meshcheck import facet_incidence
from .reference import rect_basis, rect_quadrature, tri_basis, tri_quadrature

__all__ = [
    "DofMap",
    "LinearSystem",
    "DiscreteField",
    "assemble",
    "solve_cg",
    "interpolate",
    "energy_norm",
    "error_norms",
]


@lru_cache(maxsize=64)
def _tables(shape: str, q: int, m: int):
    """Quadrature points/weights and basis value/gradient tables."""
    basis = rect_basis(q) if shape == "r" else tri_basis(q)
    pts, w = rect_quadrature(m) if shape == "r" else tri_quadrature(m)
    return pts, w, basis.eval(pts), basis.grad(pts)


def _basis_for(shape: str, q: int):
    return rect_basis(q) if shape == "r" else tri_basis(q)


class DofMap:
    """Global numbering: mesh nodes, then facet interiors, then bubbles."""

    def __init__(self, mesh: Mesh, q: int):
        if q < 1:
            raise ValueError("polynomial degree must be at least 1")
        self.mesh = mesh
        self.q = q
        nv = len(mesh.nodes)
        per_edge = q - 1

        facets = sorted(facet_incidence(mesh.elements).keys())
        self.facet_offset = {}
        off = nv
        for f in facets:
            self.facet_offset[f] = off
            off += per_edge

        self.elem_dofs: list[np.ndarray] = []
        for el in mesh.elements:
            basis = _basis_for(el.shape, q)
            gd = np.empty(basis.ndofs, dtype=np.int64)
            nc = len(el.nodes)
            for k, loc in enumerate(basis.corner_ids):
                gd[loc] = el.nodes[k]
            for k in range(nc):
                a, b = el.nodes[k], el.nodes[(k + 1) % nc]
                locs = basis.edge_ids[k][1:-1]
                start = self.facet_offset[(min(a, b), max(a, b))]
                ids = np.arange(start, start + per_edge)
                gd[locs] = ids if a < b else ids[::-1]
            ni = len(basis.interior_ids)
            gd[basis.interior_ids] = np.arange(off, off + ni)
            off += ni
            self.elem_dofs.append(gd)
        self.ndofs = off

        dirichlet = np.zeros(self.ndofs, dtype=bool)
        for a, b in mesh.boundary_facets:
            dirichlet[a] = dirichlet[b] = True
            start = self.facet_offset[(a, b)]
            dirichlet[start : start + per_edge] = True
        self.dirichlet = dirichlet
        self.free = np.nonzero(~dirichlet)[0]
        self.free_index = np.full(self.ndofs, -1, dtype=np.int64)
        self.free_index[self.free] = np.arange(len(self.free))
        self._points = None

    @property
    def nfree(self) -> int:
        return len(self.free)

    def dof_points(self) -> np.ndarray:
        """Physical coordinates of every degree of freedom."""
        if self._points is None:
            pts = np.empty((self.ndofs, 2))
            for ei, el in enumerate(self.mesh.elements):
                basis = _basis_for(el.shape, self.q)
                emap = self.mesh.element_map(ei)
                pts[self.elem_dofs[ei]] = emap.points(basis.nodes)
            self._points = pts
        return self._points


def _field_at(fn, pts: np.ndarray) -> np.ndarray:
    """Evaluate a scalar field given as callable f(x, y) or constant."""
    if callable(fn):
        return np.asarray(fn(pts[:, 0], pts[:, 1]), dtype=float) * np.ones(len(pts))
    return float(fn) * np.ones(len(pts))


def _inv_jacobians(J: np.ndarray):
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    inv = np.empty_like(J)
    inv[:, 0, 0] = J[:, 1, 1]
    inv[:, 0, 1] = -J[:, 0, 1]
    inv[:, 1, 0] = -J[:, 1, 0]
    inv[:, 1, 1] = J[:, 0, 0]
    inv /= det[:, None, None]
    return det, inv


@dataclass
class LinearSystem:
    dofmap: DofMap
    matrix: sp.csr_matrix  # free x free, symmetric positive definite
    rhs: np.ndarray

    def solve(self, method: str = "cg", tol: float = 1e-12, maxiter: int | None = None):
        """Solve for the free coefficients; returns (DiscreteField, stats)."""
        if method == "cg":
            x, iters, relres = solve_cg(self.matrix, self.rhs, tol=tol, maxiter=maxiter)
            stats = {"method": "cg", "iterations": iters, "relres": relres}
        elif method == "direct":
            x = spla.spsolve(self.matrix.tocsc(), self.rhs)
            stats = {"method": "direct", "iterations": 0, "relres": 0.0}
        else:
            raise ValueError(f"unknown solve method {method!r}")
        coeffs = np.zeros(self.dofmap.ndofs)
        coeffs[self.dofmap.free] = x
        return DiscreteField(self.dofmap, coeffs), stats


def assemble(
    mesh: Mesh,
    q: int,
    eps: float,
    c,
    f,
    diffusion=None,
    quad_order: int | None = None,
) -> LinearSystem:
    """Assemble eps^2 (A grad u, grad v) + (c u, v) = (f, v) on the free dofs.

    ``c`` and ``f`` are scalar fields (constants or callables f(x, y));
    ``diffusion`` maps quadrature points to (n, 2, 2) symmetric matrices,
    or is None for the identity.  Quadrature uses q + 2 points per
    direction unless overridden.
    """
    dofmap = DofMap(mesh, q)
    m = quad_order if quad_order is not None else q + 2
    eps2 = eps * eps

    rows, cols, vals = [], [], []
    b = np.zeros(dofmap.ndofs)
    for ei, el in enumerate(mesh.elements):
        pts, w, B, G = _tables(el.shape, q, m)
        emap = mesh.element_map(ei)
        det, invJ = _inv_jacobians(emap.jacobian(pts))
        if np.any(det <= 0.0):
            raise ValueError(f"element {ei} has a non-positive Jacobian")
        phys = emap.points(pts)
        wdet = w * det

        Gp = G @ invJ  # physical gradients, (npts, nbasis, 2)
        if diffusion is None:
            flux = Gp
        else:
            flux = Gp @ np.asarray(diffusion(phys), dtype=float)
        K = np.tensordot(flux * wdet[:, None, None], Gp, axes=([0, 2], [0, 2]))
        cw = _field_at(c, phys) * wdet
        M = B.T @ (B * cw[:, None])
        S = eps2 * K + M
        S = 0.5 * (S + S.T)

        gd = dofmap.elem_dofs[ei]
        nb = len(gd)
        rows.append(np.repeat(gd, nb))
        cols.append(np.tile(gd, nb))
        vals.append(S.ravel())
        b[gd] += B.T @ (_field_at(f, phys) * wdet)

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    fi = dofmap.free_index
    keep = (fi[rows] >= 0) & (fi[cols] >= 0)
    A = sp.coo_matrix(
        (vals[keep], (fi[rows[keep]], fi[cols[keep]])),
        shape=(dofmap.nfree, dofmap.nfree),
    ).tocsr()
    return LinearSystem(dofmap, A, b[dofmap.free])


def solve_cg(A: sp.csr_matrix, b: np.ndarray, tol: float = 1e-12, maxiter=None):
    """Jacobi-preconditioned conjugate gradients.

    Returns (x, iterations, relative residual); raises if the tolerance
    is not reached within the iteration cap.
    """
    n = len(b)
    if maxiter is None:
        maxiter = max(1000, 10 * n)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(n), 0, 0.0
    diag = A.diagonal()
    if np.any(diag <= 0.0):
        raise ValueError("matrix diagonal must be positive for Jacobi scaling")
    x = np.zeros(n)
    r = b.copy()
    z = r / diag
    p = z.copy()
    rz = float(r @ z)
    relres = 1.0
    for it in range(1, maxiter + 1):
        Ap = A @ p
        alpha = rz / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        relres = float(np.linalg.norm(r)) / bnorm
        if relres <= tol:
            return x, it, relres
        z = r / diag
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise RuntimeError(f"cg failed to converge: relres={relres:.3e} after {maxiter} iterations")


class DiscreteField:
    """A function in the hp space, stored by its global coefficients."""

    def __init__(self, dofmap: DofMap, coeffs: np.ndarray):
        self.dofmap = dofmap
        self.mesh = dofmap.mesh
        self.q = dofmap.q
        self.coeffs = np.asarray(coeffs, dtype=float)

    def element_values(self, ei: int, ref_pts: np.ndarray) -> np.ndarray:
        el = self.mesh.elements[ei]
        basis = _basis_for(el.shape, self.q)
        return basis.eval(ref_pts) @ self.coeffs[self.dofmap.elem_dofs[ei]]

    def element_gradients(self, ei: int, ref_pts: np.ndarray) -> np.ndarray:
        """Physical gradients at reference points of element ei."""
        el = self.mesh.elements[ei]
        basis = _basis_for(el.shape, self.q)
        emap = self.mesh.element_map(ei)
        _, invJ = _inv_jacobians(emap.jacobian(ref_pts))
        G = basis.grad(np.atleast_2d(ref_pts)) @ invJ
        return np.einsum("pnd,n->pd", G, self.coeffs[self.dofmap.elem_dofs[ei]])

    def __call__(self, points) -> np.ndarray:
        """Evaluate at physical points (slow; point location by search)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty(len(points))
        for k, p in enumerate(points):
            ei, ref = locate_point(self.mesh, p)
            out[k] = self.element_values(ei, ref[None, :])[0]
        return out


def locate_point(mesh: Mesh, p, tol: float = 1e-10):
    """Find (element index, reference coordinates) containing point p."""
    p = np.asarray(p, dtype=float)
    for qid in range(len(mesh.oriented)):
        bil = mesh.quad_map(qid)
        # invert the bilinear map by Newton from the cell center
        st = np.array([0.5, 0.5])
        ok = False
        for _ in range(30):
            r = bil(st[None, :])[0] - p
            if np.hypot(*r) < 1e-14:
                ok = True
                break
            J = bil.jacobian(st[None, :])[0]
            st = st - np.linalg.solve(J, r)
            if np.any(np.abs(st - 0.5) > 2.0):
                break
        else:
            ok = np.hypot(*(bil(st[None, :])[0] - p)) < 1e-10
        if not ok or np.any(st < -tol) or np.any(st > 1.0 + tol):
            continue
        for ei, el in enumerate(mesh.elements):
            if el.macro_id != qid:
                continue
            place = mesh.element_map(ei).placement
            ref = place.to_reference(st[None, :])[0]
            if el.shape == "r":
                inside = np.all(ref >= -tol) and np.all(ref <= 1.0 + tol)
            else:
                inside = (
                    ref[0] >= -tol and ref[0] <= 1.0 + tol and ref[1] >= -tol
                    and ref[1] <= ref[0] + tol
                )
            if inside:
                return ei, np.clip(ref, 0.0, 1.0)
    raise ValueError(f"point {p} not found in any element")


def interpolate(mesh: Mesh, q: int, fn, dofmap: DofMap | None = None) -> DiscreteField:
    """Nodal interpolant of fn(x, y) in the hp space (boundary values kept)."""
    dm = dofmap if dofmap is not None else DofMap(mesh, q)
    pts = dm.dof_points()
    coeffs = np.asarray(fn(pts[:, 0], pts[:, 1]), dtype=float)
    return DiscreteField(dm, coeffs)


# ---------------------------------------------------------------------------
# norms


def _integrate(field: DiscreteField, eps, c, diffusion, order, exact=None, exact_grad=None):
    """Shared kernel: integrates value and gradient square sums elementwise."""
    mesh, q = field.mesh, field.q
    m = order if order is not None else q + 3
    l2 = 0.0
    h1 = 0.0
    flux_sq = 0.0
    mass = 0.0
    for ei, el in enumerate(mesh.elements):
        pts, w, B, G = _tables(el.shape, q, m)
        emap = mesh.element_map(ei)
        det, invJ = _inv_jacobians(emap.jacobian(pts))
        phys = emap.points(pts)
        wdet = w * det
        co = field.coeffs[field.dofmap.elem_dofs[ei]]
        vals = B @ co
        grads = np.einsum("pnd,n->pd", G @ invJ, co)
        if exact is not None:
            vals = vals - exact(phys[:, 0], phys[:, 1])
        if exact_grad is not None:
            grads = grads - exact_grad(phys[:, 0], phys[:, 1])
        l2 += float(wdet @ (vals * vals))
        gsq = np.einsum("pd,pd->p", grads, grads)
        h1 += float(wdet @ gsq)
        if diffusion is None:
            flux_sq += float(wdet @ gsq)
        else:
            Ap = np.asarray(diffusion(phys), dtype=float)
            flux_sq += float(wdet @ np.einsum("pd,pde,pe->p", grads, Ap, grads))
        mass += float(wdet @ (_field_at(c, phys) * vals * vals))
    return l2, h1, flux_sq, mass, eps


def energy_norm(field: DiscreteField, eps: float, c, diffusion=None, order=None) -> float:
    """sqrt(eps^2 (A grad u, grad u) + (c u, u))."""
    _, _, flux_sq, mass, _ = _integrate(field, eps, c, diffusion, order)
    return math.sqrt(eps * eps * flux_sq + mass)


def error_norms(
    field: DiscreteField,
    exact,
    exact_grad,
    eps: float,
    c,
    diffusion=None,
    order=None,
) -> dict:
    """Norms of u_h - u for a smooth exact solution.

    Returns l2, h1 seminorm, the energy norm
    sqrt(eps^2 |A^(1/2) grad e|^2 + |c^(1/2) e|^2), and the balanced norm
    sqrt(eps |grad e|^2 + |e|^2).
    """
    l2, h1, flux_sq, mass, _ = _integrate(
        field, eps, c, diffusion, order, exact=exact, exact_grad=exact_grad
    )
    return {
        "l2": math.sqrt(l2),
        "h1": math.sqrt(h1),
        "energy": math.sqrt(eps * eps * flux_sq + mass),
        "balanced": math.sqrt(eps * h1 + l2),
    }
