"""Reference-element polynomial bases and elemental interpolation.

Two reference elements are used throughout:

* the unit square S = [0,1]^2 with the full tensor space Q_q, carrying
  a nodal basis on the (q+1)^2 grid of Gauss-Lobatto (GL) points;
* the triangle T = {0 <= y <= x <= 1} (vertices (0,0), (1,0), (1,1))
  with the total-degree space P_q, carrying a nodal basis whose edge
  nodes are exactly the GL points of each edge.

Both interpolation operators are projections onto their spaces, and both
restrict on every edge to univariate GL interpolation of the trace; this
trace property is what makes elementwise interpolants (and the finite
element spaces built from these bases) globally continuous.

The triangle nodes combine exact GL points on the edges with
warped-barycentric interior points (the classical warp-and-blend
distribution), and the nodal basis is realized through a generalized
Vandermonde matrix in an orthonormal Dubiner-type modal basis, which
keeps the Vandermonde solve well conditioned through q = 16 and beyond.
"""

from __future__ import annotations

import functools
import math

import numpy as np
from scipy.special import eval_jacobi, gammaln

from .gausslobatto import LagrangeBasis1D, gauss_lobatto_rule, gauss_legendre_rule

__all__ = [
    "RectBasis",
    "TriBasis",
    "PolyOnElement",
    "interp_square",
    "interp_triangle",
    "rect_quadrature",
    "tri_quadrature",
]


def shifted_gl(q: int) -> np.ndarray:
    """GL nodes mapped to [0, 1]."""
    nodes, _ = gauss_lobatto_rule(q)
    return 0.5 * (nodes + 1.0)


# ---------------------------------------------------------------------------
# orthonormal Jacobi helpers (beta = 0 throughout except for derivatives)


def _jacobi_norm(n: int, alpha: float, beta: float) -> float:
    """L2([-1,1], (1-x)^a (1+x)^b) norm^2 of the classical Jacobi P_n."""
    num = (
        (alpha + beta + 1.0) * math.log(2.0)
        + gammaln(n + alpha + 1.0)
        + gammaln(n + beta + 1.0)
        - gammaln(n + alpha + beta + 1.0)
        - gammaln(n + 1.0)
    )
    return math.exp(num) / (2.0 * n + alpha + beta + 1.0)


def _jacobi_on(n: int, alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
    """Orthonormal Jacobi polynomial."""
    return eval_jacobi(n, alpha, beta, x) / math.sqrt(_jacobi_norm(n, alpha, beta))


def _grad_jacobi_on(n: int, alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
    if n == 0:
        return np.zeros_like(x)
    return math.sqrt(n * (n + alpha + beta + 1.0)) * _jacobi_on(
        n - 1, alpha + 1.0, beta + 1.0, x
    )


# ---------------------------------------------------------------------------
# square


class RectBasis:
    """Nodal Q_q basis on [0,1]^2 at the tensor GL grid.

    Local node (i, j) has index j*(q+1) + i; node 0 sits at the origin
    and the boundary nodes of each edge are the GL points of that edge.
    """

    shape = "r"

    def __init__(self, q: int):
        self.q = q
        self.nodes_1d = shifted_gl(q)
        self.basis_1d = LagrangeBasis1D(self.nodes_1d)
        ii, jj = np.meshgrid(range(q + 1), range(q + 1), indexing="xy")
        self.nodes = np.column_stack(
            [self.nodes_1d[ii.ravel()], self.nodes_1d[jj.ravel()]]
        )
        self.ndofs = (q + 1) ** 2
        n = q + 1
        self.corner_ids = (0, q, n * n - 1, q * n)
        bottom = np.arange(n)
        right = q + n * np.arange(n)
        top = (n * n - 1) - np.arange(n)
        left = q * n - n * np.arange(n)
        # edges listed counterclockwise, endpoints included
        self.edge_ids = (bottom, right, top, left)
        self.interior_ids = np.array(
            [j * n + i for j in range(1, q) for i in range(1, q)], dtype=int
        )

    def eval(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        bx = self.basis_1d.eval(pts[:, 0])
        by = self.basis_1d.eval(pts[:, 1])
        return np.einsum("ni,nj->nji", bx, by).reshape(len(pts), self.ndofs)

    def grad(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        bx = self.basis_1d.eval(pts[:, 0])
        by = self.basis_1d.eval(pts[:, 1])
        dbx = self.basis_1d.eval_deriv(pts[:, 0])
        dby = self.basis_1d.eval_deriv(pts[:, 1])
        gx = np.einsum("ni,nj->nji", dbx, by).reshape(len(pts), self.ndofs)
        gy = np.einsum("ni,nj->nji", bx, dby).reshape(len(pts), self.ndofs)
        return np.stack([gx, gy], axis=-1)


# ---------------------------------------------------------------------------
# triangle

# blending exponents tuned per degree for the warp-and-blend distribution
_ALPHA_OPT = (
    0.0000, 0.0000, 1.4152, 0.1001, 0.2751, 0.9800, 1.0999, 1.2832,
    1.3648, 1.4773, 1.4959, 1.5743, 1.5770, 1.6223, 1.6258,
)


def _warp_factor(q: int, r: np.ndarray) -> np.ndarray:
    """Displacement warping equispaced points toward GL positions."""
    gl, _ = gauss_lobatto_rule(q)
    req = np.linspace(-1.0, 1.0, q + 1)
    lag = LagrangeBasis1D(req)
    warp = lag.eval(r) @ (gl - req)
    interior = np.abs(r) < 1.0 - 1e-10
    sf = 1.0 - np.where(interior, r, 0.0) ** 2
    return np.where(interior, warp / sf, 0.0)


def _warp_blend_barycentric(q: int) -> np.ndarray:
    """Interior warp-and-blend lattice in barycentric coordinates."""
    alpha = _ALPHA_OPT[q - 1] if q <= len(_ALPHA_OPT) else 5.0 / 3.0
    lam = []
    for i in range(1, q):
        for j in range(1, q - i):
            lam.append((1.0 - (i + j) / q, i / q, j / q))
    if not lam:
        return np.empty((0, 3))
    lam = np.array(lam)  # columns: l0, l1, l2
    l0, l1, l2 = lam[:, 0], lam[:, 1], lam[:, 2]
    # equilateral frame, vertices at angles 90/210/330 degrees
    verts = np.array(
        [[0.0, 1.0], [-math.sqrt(3.0) / 2.0, -0.5], [math.sqrt(3.0) / 2.0, -0.5]]
    )
    xy = lam @ verts
    # each warp displaces along one edge (a -> b), damped away from it
    # through the blend 4*lam_a*lam_b and boosted near the opposite
    # vertex c by the tuned factor (1 + (alpha*lam_c)^2)
    dirs = (verts[2] - verts[1], verts[0] - verts[2], verts[1] - verts[0])
    pairs = ((l1, l2, l0), (l2, l0, l1), (l0, l1, l2))
    for (a, b, c), d in zip(pairs, dirs):
        w = 4.0 * a * b * _warp_factor(q, b - a) * (1.0 + (alpha * c) ** 2)
        xy = xy + w[:, None] * (d / np.linalg.norm(d))[None, :]
    # back to barycentric by solving the affine system
    mat = np.column_stack([verts[1] - verts[0], verts[2] - verts[0]])
    loc = np.linalg.solve(mat, (xy - verts[0]).T).T
    return np.column_stack([1.0 - loc.sum(axis=1), loc[:, 0], loc[:, 1]])


class TriBasis:
    """Nodal P_q basis on the triangle with vertices (0,0), (1,0), (1,1).

    Node order: the three vertices, then the interiors of edges
    (0->1, 1->2, 2->0) each holding q-1 GL points in edge direction,
    then the interior warp-and-blend points.
    """

    shape = "t"
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])

    def __init__(self, q: int):
        self.q = q
        self.ndofs = (q + 1) * (q + 2) // 2
        g = shifted_gl(q)[1:-1]
        bary = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)]
        bary += [(1.0 - t, t, 0.0) for t in g]
        bary += [(0.0, 1.0 - t, t) for t in g]
        bary += [(t, 0.0, 1.0 - t) for t in g]
        interior = _warp_blend_barycentric(q)
        bary = np.vstack([np.array(bary), interior]) if len(interior) else np.array(bary)
        self.barycentric = bary
        self.nodes = bary @ self.verts
        ne = q - 1
        self.corner_ids = (0, 1, 2)
        self.edge_ids = (
            np.concatenate(([0], 3 + np.arange(ne), [1])),
            np.concatenate(([1], 3 + ne + np.arange(ne), [2])),
            np.concatenate(([2], 3 + 2 * ne + np.arange(ne), [0])),
        )
        self.interior_ids = np.arange(3 + 3 * ne, self.ndofs)
        self._modes = [(i, j) for i in range(q + 1) for j in range(q + 1 - i)]
        vand = self._modal(self.nodes)
        self._vinv = np.linalg.inv(vand)
        self.vandermonde_cond = float(np.linalg.cond(vand))

    def _collapsed(self, pts: np.ndarray):
        """Collapsed (a, b) coordinates of points in the reference triangle.

        Barycentric coordinates w.r.t. the vertices are (1-x, x-y, y);
        in the standard (-1,1)^2-collapsed frame this gives
        r = 2(x-y) - 1, s = 2y - 1, a = 2(1+r)/(1-s) - 1, b = s.
        """
        x, y = pts[:, 0], pts[:, 1]
        r = 2.0 * (x - y) - 1.0
        s = 2.0 * y - 1.0
        near_top = np.abs(1.0 - s) < 1e-14
        a = np.where(
            near_top, -1.0, 2.0 * (1.0 + r) / np.where(near_top, 1.0, 1.0 - s) - 1.0
        )
        return a, s

    def _modal(self, pts: np.ndarray) -> np.ndarray:
        a, b = self._collapsed(np.atleast_2d(pts))
        cols = []
        for i, j in self._modes:
            col = (
                math.sqrt(2.0)
                * _jacobi_on(i, 0.0, 0.0, a)
                * _jacobi_on(j, 2.0 * i + 1.0, 0.0, b)
                * (1.0 - b) ** i
            )
            cols.append(col)
        return np.column_stack(cols)

    def _modal_grad(self, pts: np.ndarray) -> np.ndarray:
        a, b = self._collapsed(np.atleast_2d(pts))
        npts = len(a)
        out = np.empty((npts, len(self._modes), 2))
        half_1mb = 0.5 * (1.0 - b)
        for k, (i, j) in enumerate(self._modes):
            fa = _jacobi_on(i, 0.0, 0.0, a)
            dfa = _grad_jacobi_on(i, 0.0, 0.0, a)
            gb = _jacobi_on(j, 2.0 * i + 1.0, 0.0, b)
            dgb = _grad_jacobi_on(j, 2.0 * i + 1.0, 0.0, b)
            pow_im1 = half_1mb ** (i - 1) if i > 0 else np.ones_like(b)
            dr = dfa * gb * pow_im1
            ds = dfa * (gb * 0.5 * (1.0 + a)) * pow_im1
            tmp = dgb * (half_1mb**i)
            if i > 0:
                tmp = tmp - 0.5 * i * gb * pow_im1
            ds = ds + fa * tmp
            scale = 2.0 ** (i + 0.5)
            # chain rule to the (x,y) frame of the reference triangle:
            # r = 2x - 2y - 1, s = 2y - 1
            out[:, k, 0] = scale * dr * 2.0
            out[:, k, 1] = scale * (-2.0 * dr + 2.0 * ds)
        return out

    def eval(self, pts: np.ndarray) -> np.ndarray:
        return self._modal(pts) @ self._vinv

    def grad(self, pts: np.ndarray) -> np.ndarray:
        g = self._modal_grad(pts)
        return np.einsum("pmd,mn->pnd", g, self._vinv)


@functools.lru_cache(maxsize=64)
def rect_basis(q: int) -> RectBasis:
    return RectBasis(q)


@functools.lru_cache(maxsize=64)
def tri_basis(q: int) -> TriBasis:
    return TriBasis(q)


# ---------------------------------------------------------------------------
# quadrature on the reference elements


@functools.lru_cache(maxsize=64)
def rect_quadrature(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre rule with m points per direction on [0,1]^2."""
    x, w = gauss_legendre_rule(m)
    xx, yy = np.meshgrid(x, x, indexing="xy")
    ww = np.outer(w, w)
    return np.column_stack([xx.ravel(), yy.ravel()]), ww.ravel()


@functools.lru_cache(maxsize=64)
def tri_quadrature(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Duffy-transformed tensor rule on the triangle 0 <= y <= x <= 1."""
    x, w = gauss_legendre_rule(m)
    u, v = np.meshgrid(x, x, indexing="xy")
    pts = np.column_stack([u.ravel(), (u * v).ravel()])
    ww = (np.outer(w, w) * u).ravel()
    return pts, ww


# ---------------------------------------------------------------------------
# elemental interpolants


class PolyOnElement:
    """Polynomial on a reference element in nodal form."""

    def __init__(self, basis, values: np.ndarray):
        self.basis = basis
        self.shape = basis.shape
        self.q = basis.q
        self.values = np.asarray(values, dtype=float)

    def eval(self, pts: np.ndarray) -> np.ndarray:
        return self.basis.eval(pts) @ self.values

    def grad(self, pts: np.ndarray) -> np.ndarray:
        return np.einsum("pnd,n->pd", self.basis.grad(pts), self.values)


def _sample(f, pts: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(f(pts[:, 0], pts[:, 1]), dtype=float)
        if vals.shape != (len(pts),):
            raise ValueError
        return vals
    except Exception:
        return np.array([float(f(x, y)) for x, y in pts])


def interp_square(f, q: int) -> PolyOnElement:
    """Tensor GL interpolant of f on [0,1]^2 (a projection onto Q_q)."""
    basis = rect_basis(q)
    return PolyOnElement(basis, _sample(f, basis.nodes))


def interp_triangle(f, q: int) -> PolyOnElement:
    """Nodal P_q interpolant on the reference triangle.

    Edge traces coincide with univariate GL interpolation of the edge
    restriction of f, so triangle and square interpolants agree along
    shared edges whenever the underlying function is continuous.
    """
    basis = tri_basis(q)
    return PolyOnElement(basis, _sample(f, basis.nodes))
