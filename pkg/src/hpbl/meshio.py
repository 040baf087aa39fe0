"""Plain-text and SVG output for patterns, meshes, and convergence data.

The text format is line based: one node per line as ``v x y`` followed
by one element per line as ``t i j k`` (triangle) or ``r i j k l``
(rectangle, counterclockwise).  SVG output is deterministic for a given
input: coordinates are printed with fixed precision and elements in
storage order, one ``<polygon>`` per element.
"""

from __future__ import annotations

import math

import numpy as np

from .macro import Mesh
from .patches import PatchMesh

__all__ = [
    "mesh_text",
    "write_mesh_text",
    "mesh_svg",
    "write_mesh_svg",
    "convergence_svg",
]

_FILL = {
    "trivial": "#f4f4f4",
    "boundary_layer": "#cfe3f7",
    "corner": "#f7d9cf",
    "tensor": "#d6f0d0",
    "mixed": "#f3e6c2",
    "mixed_half": "#f3e6c2",
    "corner_half": "#f7d9cf",
    "corner_half_flip": "#f7d9cf",
}


def _element_rows(obj):
    """Yield (shape, node index tuple) for a PatchMesh or Mesh."""
    for el in obj.elements:
        yield el.shape, el.nodes


def mesh_text(obj) -> str:
    lines = [f"v {float(p[0])!r} {float(p[1])!r}" for p in np.asarray(obj.nodes)]
    for shape, ids in _element_rows(obj):
        lines.append(shape + " " + " ".join(map(str, ids)))
    return "\n".join(lines) + "\n"


def write_mesh_text(obj, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(mesh_text(obj))


def _element_outline(obj, ei: int, samples: int = 8) -> np.ndarray:
    """Polygon outline of one element in physical coordinates.

    Pattern rectangles stay straight-sided under a bilinear map, but a
    triangle edge that is not axis-aligned in pattern coordinates maps to
    a curve, so edges are sampled.
    """
    if isinstance(obj, Mesh):
        el = obj.elements[ei]
        corners = el.ref_coords
        bil = obj.quad_map(el.macro_id)
        pts = []
        k = len(corners)
        t = np.linspace(0.0, 1.0, samples, endpoint=False)[:, None]
        for i in range(k):
            seg = corners[i][None, :] * (1.0 - t) + corners[(i + 1) % k][None, :] * t
            pts.append(bil(seg))
        return np.vstack(pts)
    el = obj.elements[ei]
    return obj.nodes[list(el.nodes)]


def _kind_of(obj, ei: int) -> str:
    if isinstance(obj, Mesh):
        return obj.assignments[obj.elements[ei].macro_id].kind.value
    return obj.kind.value


def mesh_svg(obj, width: int = 640) -> str:
    """Render a PatchMesh or Mesh; one polygon per element, boundary in red."""
    nodes = np.asarray(obj.nodes)
    lo = nodes.min(axis=0)
    hi = nodes.max(axis=0)
    span = np.maximum(hi - lo, 1e-30)
    margin = 0.04 * span.max()
    lo = lo - margin
    hi = hi + margin
    scale = width / (hi[0] - lo[0])
    height = int(math.ceil((hi[1] - lo[1]) * scale))

    def xy(p):
        return (
            (p[0] - lo[0]) * scale,
            (hi[1] - p[1]) * scale,  # svg y grows downward
        )

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">'
    ]
    for ei in range(len(obj.elements)):
        ring = _element_outline(obj, ei)
        pts = " ".join("%.3f,%.3f" % xy(p) for p in ring)
        fill = _FILL.get(_kind_of(obj, ei), "#ffffff")
        out.append(
            f'<polygon points="{pts}" fill="{fill}" stroke="#444444" '
            'stroke-width="0.6"/>'
        )
    if isinstance(obj, Mesh):
        for a, b in sorted(obj.boundary_facets):
            xa, ya = xy(obj.nodes[a])
            xb, yb = xy(obj.nodes[b])
            out.append(
                f'<line x1="{xa:.3f}" y1="{ya:.3f}" x2="{xb:.3f}" y2="{yb:.3f}" '
                'stroke="#cc2222" stroke-width="1.6"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_mesh_svg(obj, path: str, width: int = 640) -> None:
    with open(path, "w") as fh:
        fh.write(mesh_svg(obj, width))


def convergence_svg(series, width: int = 560, height: int = 420, xlabel: str = "p") -> str:
    """Semi-log convergence plot: one polyline per labelled series.

    ``series`` is a list of (label, xs, errors); errors must be positive.
    """
    pad = 56
    xs_all = [x for _, xs, _ in series for x in xs]
    es_all = [e for _, _, es in series for e in es]
    if not xs_all:
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}"><text x="20" y="30">no data</text></svg>\n'
        )
    if min(es_all) <= 0.0:
        raise ValueError("convergence plot needs positive errors")
    x0, x1 = min(xs_all), max(xs_all)
    y0 = math.floor(math.log10(min(es_all)))
    y1 = math.ceil(math.log10(max(es_all)))
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(e):
        t = (math.log10(e) - y0) / (y1 - y0)
        return height - pad - t * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    # frame and decade grid lines
    out.append(
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" '
        f'height="{height - 2 * pad}" fill="none" stroke="#222222"/>'
    )
    for d in range(y0, y1 + 1):
        y = sy(10.0**d)
        out.append(
            f'<line x1="{pad}" y1="{y:.2f}" x2="{width - pad}" y2="{y:.2f}" '
            'stroke="#dddddd"/>'
        )
        out.append(
            f'<text x="{pad - 6}" y="{y + 4:.2f}" text-anchor="end" '
            f'font-size="11">1e{d}</text>'
        )
    for x in sorted(set(xs_all)):
        out.append(
            f'<text x="{sx(x):.2f}" y="{height - pad + 16}" text-anchor="middle" '
            f'font-size="11">{x:g}</text>'
        )
    out.append(
        f'<text x="{width / 2:.0f}" y="{height - 12}" text-anchor="middle" '
        f'font-size="12">{xlabel}</text>'
    )
    for k, (label, xs, es) in enumerate(series):
        color = colors[k % len(colors)]
        pts = " ".join(f"{sx(x):.2f},{sy(e):.2f}" for x, e in zip(xs, es))
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            'stroke-width="1.5"/>'
        )
        for x, e in zip(xs, es):
            out.append(
                f'<circle cx="{sx(x):.2f}" cy="{sy(e):.2f}" r="2.5" fill="{color}"/>'
            )
        out.append(
            f'<text x="{width - pad + 4}" y="{sy(es[-1]) + 4:.2f}" font-size="11" '
            f'fill="{color}">{label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
