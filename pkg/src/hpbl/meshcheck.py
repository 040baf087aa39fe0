"""Conformity checks shared by patterns and assembled meshes.

A mesh of straight-edged cells is conforming when every interior facet
is shared by exactly two elements (traversed once in each direction)
and no node lies in the open interior of another element's facet.
Facets are undirected node-index pairs; the hanging-node test is
geometric and therefore assumes the supplied node coordinates are exact
for the facets (true for patterns, and for meshes when checked patch by
patch in pattern coordinates).
"""

from __future__ import annotations

from collections import defaultdict

import numpy as np

__all__ = ["facet_incidence", "hanging_nodes", "conformity_violations"]


def facet_incidence(elements) -> dict[tuple[int, int], list[tuple[int, tuple[int, int]]]]:
    """Map each undirected facet to the (element, directed pair) list."""
    fmap: dict[tuple[int, int], list] = defaultdict(list)
    for ei, e in enumerate(elements):
        ids = e.nodes if hasattr(e, "nodes") else tuple(e)
        m = len(ids)
        for k in range(m):
            a, b = ids[k], ids[(k + 1) % m]
            fmap[(min(a, b), max(a, b))].append((ei, (a, b)))
    return dict(fmap)


def hanging_nodes(nodes: np.ndarray, elements, tol: float = 1e-12) -> list[tuple[int, tuple[int, int]]]:
    """Nodes lying strictly inside some facet, as (node, facet) pairs.

    All node-facet pairs are tested at once (facets in blocks to keep the
    broadcast arrays small on big meshes).  The tolerance is relative to
    each facet's length: geometric patterns have facets many orders of
    magnitude apart in size.
    """
    out = []
    nodes = np.asarray(nodes, dtype=float)
    facets = list(facet_incidence(elements))
    if not facets or len(nodes) == 0:
        return out
    fa = np.array([f[0] for f in facets])
    fb = np.array([f[1] for f in facets])
    block = 256
    for lo in range(0, len(facets), block):
        sl = slice(lo, min(lo + block, len(facets)))
        a = nodes[fa[sl]]  # (F, 2)
        ab = nodes[fb[sl]] - a
        len2 = np.einsum("fd,fd->f", ab, ab)
        diff = nodes[:, None, :] - a[None, :, :]  # (N, F, 2)
        t = np.einsum("nfd,fd->nf", diff, ab) / len2
        proj = a[None] + t[..., None] * ab[None]
        off = nodes[:, None, :] - proj
        dist = np.hypot(off[..., 0], off[..., 1])
        inside = (dist <= tol * np.sqrt(len2)[None, :]) & (t > tol) & (t < 1.0 - tol)
        cols = np.arange(sl.stop - sl.start)
        inside[fa[sl], cols] = False
        inside[fb[sl], cols] = False
        for n_idx, f_idx in zip(*np.nonzero(inside)):
            out.append((int(n_idx), facets[lo + f_idx]))
    return out


def conformity_violations(nodes: np.ndarray, elements, tol: float = 1e-12) -> list[str]:
    """Human-readable list of conformity defects (empty when conforming)."""
    problems = []
    for facet, uses in facet_incidence(elements).items():
        if len(uses) > 2:
            problems.append(f"facet {facet} shared by {len(uses)} elements")
        elif len(uses) == 2 and uses[0][1] == uses[1][1]:
            problems.append(f"facet {facet} traversed twice in the same direction")
    for node, facet in hanging_nodes(nodes, elements, tol):
        problems.append(f"node {node} hangs on facet {facet}")
    return problems
