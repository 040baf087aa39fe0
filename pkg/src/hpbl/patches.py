"""Catalog of geometric refinement patterns on the reference square.

Every macro element of a boundary-layer mesh is the image of the unit
square S = (0,1)^2 carrying one of five refinement patterns, chosen by
how the macro element touches the domain boundary:

* ``TRIVIAL``        -- no refinement, the square itself;
* ``BOUNDARY_LAYER`` -- L geometric strips condensing toward y = 0;
* ``CORNER``         -- n rings of triangles condensing toward (0,0);
* ``TENSOR``         -- geometric tensor grid toward x = 0 and y = 0,
  with the innermost cell triangulated like a scaled corner pattern;
* ``MIXED``          -- geometric strips toward y = 0 that terminate on
  the diagonal, with a scaled corner pattern at the origin (used when
  only one of the two edges at a corner lies on the boundary).

Three half patterns (restrictions to the triangle T = {0 < y < x < 1}
or its mirror) let patterns be transplanted onto triangular macro
elements.  The part of the closure of S that is mapped onto the domain
boundary is recorded per pattern (attribute ``gamma``): the bottom edge,
the left edge and/or the origin.

All geometric-scale coordinates are powers of the grading factor sigma,
computed by repeated multiplication so that identical parameters give
bit-identical patterns and shared traces merge exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PatchKind",
    "PatchParams",
    "PatchElement",
    "PatchMesh",
    "ElementMetrics",
    "build_pattern",
    "build_half_patch",
    "patch_metrics",
    "patch_sums",
    "sigma_powers",
]

# components of the boundary-image set gamma
GAMMA_BOTTOM = "y=0"
GAMMA_LEFT = "x=0"
GAMMA_ORIGIN = "origin"


class PatchKind(enum.Enum):
    TRIVIAL = "trivial"
    BOUNDARY_LAYER = "boundary_layer"
    CORNER = "corner"
    TENSOR = "tensor"
    MIXED = "mixed"
    MIXED_HALF = "mixed_half"
    CORNER_HALF = "corner_half"
    CORNER_HALF_FLIP = "corner_half_flip"


_HALF_KINDS = {PatchKind.MIXED_HALF, PatchKind.CORNER_HALF, PatchKind.CORNER_HALF_FLIP}

_GAMMA = {
    PatchKind.TRIVIAL: frozenset(),
    PatchKind.BOUNDARY_LAYER: frozenset({GAMMA_BOTTOM}),
    PatchKind.CORNER: frozenset({GAMMA_ORIGIN}),
    PatchKind.TENSOR: frozenset({GAMMA_BOTTOM, GAMMA_LEFT, GAMMA_ORIGIN}),
    PatchKind.MIXED: frozenset({GAMMA_BOTTOM}),
    PatchKind.MIXED_HALF: frozenset({GAMMA_BOTTOM}),
    PatchKind.CORNER_HALF: frozenset({GAMMA_ORIGIN}),
    PatchKind.CORNER_HALF_FLIP: frozenset({GAMMA_ORIGIN}),
}


@dataclass(frozen=True)
class PatchParams:
    """Grading factor and layer counts of a refinement pattern.

    ``L`` is the number of boundary-layer scales, ``n >= L`` the number
    of corner scales.  Kinds that do not use a count ignore it.
    """

    sigma: float = 0.5
    L: int = 0
    n: int = 0

    def __post_init__(self):
        if not (0.0 < self.sigma < 1.0):
            raise ValueError(f"grading factor must lie in (0,1), got {self.sigma}")
        if not (isinstance(self.L, int) and isinstance(self.n, int)):
            raise ValueError("layer counts L, n must be integers")
        if self.L < 0 or self.n < 0:
            raise ValueError(f"layer counts must be >= 0, got L={self.L}, n={self.n}")
        if self.n < self.L:
            raise ValueError(f"need n >= L, got L={self.L}, n={self.n}")


def sigma_powers(sigma: float, k: int) -> list[float]:
    """[sigma^0, sigma^1, ..., sigma^k] by repeated multiplication."""
    out = [1.0]
    for _ in range(k):
        out.append(out[-1] * sigma)
    return out


@dataclass(frozen=True)
class PatchElement:
    """One cell of a pattern: ``shape`` is 't' or 'r', nodes are indices.

    Rectangle corners are listed counterclockwise from the lower left;
    triangles counterclockwise.
    """

    shape: str
    nodes: tuple[int, ...]


@dataclass
class PatchMesh:
    kind: PatchKind
    params: PatchParams
    nodes: np.ndarray  # (nnodes, 2)
    elements: list[PatchElement]
    gamma: frozenset[str]
    area: float  # area of the patterned region (1.0, or 0.5 for halves)

    def element_coords(self, e: PatchElement) -> np.ndarray:
        return self.nodes[list(e.nodes)]


class _NodePool:
    """Deduplicates nodes by exact coordinate equality, insertion-ordered."""

    def __init__(self):
        self._index: dict[tuple[float, float], int] = {}

    def add(self, x: float, y: float) -> int:
        key = (x, y)
        idx = self._index.get(key)
        if idx is None:
            idx = len(self._index)
            self._index[key] = idx
        return idx

    def array(self) -> np.ndarray:
        if not self._index:
            return np.empty((0, 2))
        return np.array(list(self._index.keys()), dtype=float)


def _emit_rect(pool, elements, x0, x1, y0, y1):
    ids = (pool.add(x0, y0), pool.add(x1, y0), pool.add(x1, y1), pool.add(x0, y1))
    elements.append(PatchElement("r", ids))


def _emit_tri(pool, elements, a, b, c):
    ids = (pool.add(*a), pool.add(*b), pool.add(*c))
    elements.append(PatchElement("t", ids))


def _corner_rings(pool, elements, levels):
    """Triangulate the square (0, levels[-1])^2 graded toward the origin.

    ``levels`` is an increasing list of scales; the innermost square
    (0, levels[0])^2 is split by the diagonal, and each ring between
    consecutive scales s < t is split into four triangles, two on each
    side of the diagonal.  The diagonal itself is always a mesh line.
    """
    s = levels[0]
    _emit_tri(pool, elements, (0.0, 0.0), (s, 0.0), (s, s))
    _emit_tri(pool, elements, (0.0, 0.0), (s, s), (0.0, s))
    for i in range(len(levels) - 1):
        s, t = levels[i], levels[i + 1]
        _emit_tri(pool, elements, (s, 0.0), (t, 0.0), (t, t))
        _emit_tri(pool, elements, (s, 0.0), (t, t), (s, s))
        _emit_tri(pool, elements, (0.0, s), (s, s), (t, t))
        _emit_tri(pool, elements, (0.0, s), (t, t), (0.0, t))


def _build_boundary_layer(pool, elements, params):
    pw = sigma_powers(params.sigma, params.L)
    ys = [0.0] + pw[::-1]  # 0, sigma^L, ..., sigma, 1
    for y0, y1 in zip(ys[:-1], ys[1:]):
        _emit_rect(pool, elements, 0.0, 1.0, y0, y1)


def _build_corner(pool, elements, params):
    pw = sigma_powers(params.sigma, params.n)
    _corner_rings(pool, elements, pw[::-1])


def _build_tensor(pool, elements, params):
    sigma, big_l, n = params.sigma, params.L, params.n
    pw = sigma_powers(sigma, n)
    grid = [0.0] + pw[big_l::-1]  # 0, sigma^L, ..., 1
    for j in range(len(grid) - 1):
        for i in range(len(grid) - 1):
            if i == 0 and j == 0:
                continue  # innermost cell is triangulated below
            _emit_rect(pool, elements, grid[i], grid[i + 1], grid[j], grid[j + 1])
    _corner_rings(pool, elements, pw[n:big_l - 1 if big_l > 0 else None:-1])


def _build_mixed(pool, elements, params):
    sigma, big_l, n = params.sigma, params.L, params.n
    pw = sigma_powers(sigma, n)
    # corner pattern in (0, sigma^L)^2
    _corner_rings(pool, elements, pw[n:big_l - 1 if big_l > 0 else None:-1])
    # columns of strips under the diagonal, one triangle closing each column
    for i in range(big_l):
        s, t = pw[i + 1], pw[i]
        levels = [0.0] + pw[big_l:i:-1]  # 0, sigma^L, ..., sigma^{i+1}
        for y0, y1 in zip(levels[:-1], levels[1:]):
            _emit_rect(pool, elements, s, t, y0, y1)
        _emit_tri(pool, elements, (s, s), (t, s), (t, t))
    # fans above the diagonal
    for i in range(big_l):
        s, t = pw[i + 1], pw[i]
        _emit_tri(pool, elements, (0.0, s), (s, s), (t, t))
        _emit_tri(pool, elements, (0.0, s), (t, t), (0.0, t))


_BUILDERS = {
    PatchKind.TRIVIAL: lambda pool, elements, params: _emit_rect(
        pool, elements, 0.0, 1.0, 0.0, 1.0
    ),
    PatchKind.BOUNDARY_LAYER: _build_boundary_layer,
    PatchKind.CORNER: _build_corner,
    PatchKind.TENSOR: _build_tensor,
    PatchKind.MIXED: _build_mixed,
}


def build_pattern(kind: PatchKind, params: PatchParams) -> PatchMesh:
    """Construct the refinement pattern ``kind`` on the unit square."""
    if kind in _HALF_KINDS:
        return build_half_patch(kind, params)
    pool = _NodePool()
    elements: list[PatchElement] = []
    _BUILDERS[kind](pool, elements, params)
    return PatchMesh(kind, params, pool.array(), elements, _GAMMA[kind], 1.0)


def _restrict_below_diagonal(full: PatchMesh, kind: PatchKind) -> PatchMesh:
    pool = _NodePool()
    elements: list[PatchElement] = []
    for e in full.elements:
        xy = full.element_coords(e)
        bx, by = xy.mean(axis=0)
        if by < bx:
            ids = tuple(pool.add(x, y) for x, y in xy)
            elements.append(PatchElement(e.shape, ids))
    return PatchMesh(kind, full.params, pool.array(), elements, _GAMMA[kind], 0.5)


def build_half_patch(kind: PatchKind, params: PatchParams) -> PatchMesh:
    """Restriction of a pattern to the triangle below the diagonal.

    ``MIXED_HALF`` and ``CORNER_HALF`` keep the elements of the mixed and
    corner patterns with barycenter below y = x (the diagonal is a mesh
    line of both, so this is a clean cut); ``CORNER_HALF_FLIP`` is the
    corner half mirrored across the diagonal, with vertex order reversed
    to stay counterclockwise.
    """
    if kind is PatchKind.MIXED_HALF:
        return _restrict_below_diagonal(build_pattern(PatchKind.MIXED, params), kind)
    if kind is PatchKind.CORNER_HALF:
        return _restrict_below_diagonal(build_pattern(PatchKind.CORNER, params), kind)
    if kind is PatchKind.CORNER_HALF_FLIP:
        half = _restrict_below_diagonal(build_pattern(PatchKind.CORNER, params), kind)
        pool = _NodePool()
        elements = []
        for e in half.elements:
            xy = half.nodes[list(e.nodes)][::-1]  # reverse to restore orientation
            ids = tuple(pool.add(y, x) for x, y in xy)
            elements.append(PatchElement(e.shape, ids))
        return PatchMesh(kind, params, pool.array(), elements, _GAMMA[kind], 0.5)
    raise ValueError(f"not a half-patch kind: {kind}")


# ---------------------------------------------------------------------------
# per-element geometry metrics and the layer-estimate summability quantities


@dataclass
class ElementMetrics:
    shape: str
    h: float  # diameter
    h_min: float
    h_max: float
    dist_gamma: float | None  # absent when the pattern has no boundary image
    dist_origin: float
    touches_gamma: bool
    touches_origin: bool


def _seg_point_dist(a: np.ndarray, b: np.ndarray, p: np.ndarray) -> float:
    ab = b - a
    t = float(np.dot(p - a, ab) / np.dot(ab, ab))
    t = min(1.0, max(0.0, t))
    return float(np.hypot(*(a + t * ab - p)))


def _poly_point_dist(xy: np.ndarray, p: np.ndarray) -> float:
    m = len(xy)
    return min(_seg_point_dist(xy[i], xy[(i + 1) % m], p) for i in range(m))


def _element_metrics(patch: PatchMesh, e: PatchElement) -> ElementMetrics:
    xy = patch.element_coords(e)
    m = len(xy)
    edge_len = [float(np.hypot(*(xy[(i + 1) % m] - xy[i]))) for i in range(m)]
    if e.shape == "r":
        hx, hy = edge_len[0], edge_len[1]
        h = math.hypot(hx, hy)
        h_min, h_max = min(hx, hy), max(hx, hy)
    else:
        h = max(edge_len)
        h_min = h_max = h
    dist_origin = _poly_point_dist(xy, np.zeros(2))
    touches_origin = any(x == 0.0 and y == 0.0 for x, y in xy)
    if touches_origin:
        dist_origin = 0.0
    dists = []
    if GAMMA_BOTTOM in patch.gamma:
        dists.append(float(xy[:, 1].min()))
    if GAMMA_LEFT in patch.gamma:
        dists.append(float(xy[:, 0].min()))
    if GAMMA_ORIGIN in patch.gamma:
        dists.append(dist_origin)
    dist_gamma = min(dists) if dists else None
    touches = dist_gamma == 0.0 if dist_gamma is not None else False
    return ElementMetrics(
        shape=e.shape,
        h=h,
        h_min=h_min,
        h_max=h_max,
        dist_gamma=dist_gamma,
        dist_origin=dist_origin,
        touches_gamma=touches,
        touches_origin=touches_origin,
    )


def patch_metrics(patch: PatchMesh) -> list[ElementMetrics]:
    """Diameters, side lengths and distances to the boundary image.

    Batch version of _element_metrics (same numbers, grouped by shape so
    numpy does the geometry); the result is cached on the patch because
    patch_sums and the invariant sweeps ask for it repeatedly.
    """
    cached = getattr(patch, "_metrics", None)
    if cached is not None:
        return cached
    out: list[ElementMetrics] = [None] * len(patch.elements)  # type: ignore[list-item]
    for shape in ("t", "r"):
        idx = [i for i, e in enumerate(patch.elements) if e.shape == shape]
        if not idx:
            continue
        conn = np.array([patch.elements[i].nodes for i in idx])
        xy = patch.nodes[conn]  # (m, 3 or 4, 2)
        edge = np.roll(xy, -1, axis=1) - xy
        elen = np.hypot(edge[..., 0], edge[..., 1])
        if shape == "r":
            hx, hy = elen[:, 0], elen[:, 1]
            h = np.hypot(hx, hy)
            h_min, h_max = np.minimum(hx, hy), np.maximum(hx, hy)
        else:
            h = elen.max(axis=1)
            h_min = h_max = h
        # clamped projection of the origin onto every edge
        len2 = np.einsum("med,med->me", edge, edge)
        t = np.clip(np.einsum("med,med->me", -xy, edge) / len2, 0.0, 1.0)
        closest = xy + t[..., None] * edge
        d_orig = np.hypot(closest[..., 0], closest[..., 1]).min(axis=1)
        touches_o = np.any((xy[..., 0] == 0.0) & (xy[..., 1] == 0.0), axis=1)
        d_orig = np.where(touches_o, 0.0, d_orig)
        dists = []
        if GAMMA_BOTTOM in patch.gamma:
            dists.append(xy[..., 1].min(axis=1))
        if GAMMA_LEFT in patch.gamma:
            dists.append(xy[..., 0].min(axis=1))
        if GAMMA_ORIGIN in patch.gamma:
            dists.append(d_orig)
        d_gamma = np.min(dists, axis=0) if dists else None
        for row, i in enumerate(idx):
            dg = float(d_gamma[row]) if d_gamma is not None else None
            out[i] = ElementMetrics(
                shape=shape,
                h=float(h[row]),
                h_min=float(h_min[row]),
                h_max=float(h_max[row]),
                dist_gamma=dg,
                dist_origin=float(d_orig[row]),
                touches_gamma=dg == 0.0 if dg is not None else False,
                touches_origin=bool(touches_o[row]),
            )
    patch._metrics = out  # type: ignore[attr-defined]
    return out


def patch_sums(
    patch: PatchMesh, delta: float, alpha: float, eps: float
) -> dict[str, float]:
    """The four summability quantities that drive the layer estimates.

    For ``delta`` in (0, 1] and decay rate ``alpha`` they are:

    * ``triangle_sum``      sum of h^delta over triangles away from 0,
    * ``rect_sum``          sum of (h_min/h_max) h_max^delta over rectangles,
    * ``triangle_exp_sum``  sum of (h/eps)^delta exp(-alpha h/eps) over
      triangles away from 0,
    * ``rect_exp_sum``      sum of (h_min/h_max)(h_max/eps)^delta
      exp(-alpha h_max/eps),

    each bounded uniformly in the layer counts (and in eps for the
    exponentially weighted pair).
    """
    if not (0.0 < delta <= 1.0):
        raise ValueError(f"delta must lie in (0,1], got {delta}")
    if alpha <= 0.0 or eps <= 0.0:
        raise ValueError("alpha and eps must be positive")
    tri_sum = tri_exp = rect_sum = rect_exp = 0.0
    for met in patch_metrics(patch):
        if met.shape == "t":
            if not met.touches_origin:
                tri_sum += met.h**delta
                tri_exp += (met.h / eps) ** delta * math.exp(-alpha * met.h / eps)
        else:
            ratio = met.h_min / met.h_max
            rect_sum += ratio * met.h_max**delta
            rect_exp += (
                ratio
                * (met.h_max / eps) ** delta
                * math.exp(-alpha * met.h_max / eps)
            )
    return {
        "triangle_sum": tri_sum,
        "rect_sum": rect_sum,
        "triangle_exp_sum": tri_exp,
        "rect_exp_sum": rect_exp,
    }
