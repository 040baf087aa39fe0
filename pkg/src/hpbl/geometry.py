"""Polygonal domains described by their boundary walk.

A polygon is stored as the counterclockwise walk of its boundary; the
interior always lies to the left of each directed edge.  Slit domains
are supported by letting the walk traverse geometrically coincident
edges twice (once per side) and repeat vertex coordinates; the two
sides are distinguished by which side of the directed edge the interior
lies on, never by coordinates alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Polygon"]

TOL = 1e-12


def _angle_mod(phi: float) -> float:
    """Reduce an angle to [0, 2*pi)."""
    out = math.fmod(phi, 2.0 * math.pi)
    return out + 2.0 * math.pi if out < 0.0 else out


@dataclass
class Polygon:
    vertices: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2 or len(self.vertices) < 3:
            raise ValueError("polygon needs an (m, 2) array of at least 3 vertices")
        if self.area() <= 0.0:
            raise ValueError("polygon boundary walk must be counterclockwise")

    @property
    def m(self) -> int:
        return len(self.vertices)

    def edge(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices[j], self.vertices[(j + 1) % self.m]

    def area(self) -> float:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    def outgoing_angle(self, j: int) -> float:
        a, b = self.edge(j)
        return math.atan2(b[1] - a[1], b[0] - a[0])

    def interior_angle(self, j: int) -> float:
        """Angle swept inside the domain at vertex j, in (0, 2*pi].

        A slit tip (incoming and outgoing edges geometrically coincident)
        has interior angle exactly 2*pi.
        """
        u = self.vertices[(j + 1) % self.m] - self.vertices[j]
        w = self.vertices[j - 1] - self.vertices[j]
        ang = math.atan2(u[0] * w[1] - u[1] * w[0], u[0] * w[0] + u[1] * w[1])
        ang = _angle_mod(ang)
        return 2.0 * math.pi if ang == 0.0 else ang

    def sector_offset(self, j: int, direction: np.ndarray) -> float:
        """CCW angle from the outgoing boundary edge at vertex j to ``direction``."""
        return _angle_mod(math.atan2(direction[1], direction[0]) - self.outgoing_angle(j))

    def sector_contains(self, j: int, direction: np.ndarray, slack: float = 1e-9) -> bool:
        phi = self.sector_offset(j, direction)
        return slack < phi < self.interior_angle(j) - slack

    def vertex_candidates(self, p, tol: float = TOL) -> list[int]:
        p = np.asarray(p, dtype=float)
        d = np.hypot(*(self.vertices - p).T)
        return [int(j) for j in np.nonzero(d <= tol)[0]]

    def vertex_at(self, p, toward=None, tol: float = TOL) -> int | None:
        """Vertex index at point p, or None.

        When the walk visits the same coordinates more than once (slit
        domains), ``toward`` -- any interior point of the region the
        caller sits in -- picks the copy whose interior sector contains
        that direction.
        """
        cands = self.vertex_candidates(p, tol)
        if not cands:
            return None
        if len(cands) == 1 or toward is None:
            return cands[0]
        d = np.asarray(toward, dtype=float) - np.asarray(p, dtype=float)
        for j in cands:
            if self.sector_contains(j, d):
                return j
        return cands[0]

    def point_on_boundary(self, p, tol: float = TOL) -> bool:
        p = np.asarray(p, dtype=float)
        for j in range(self.m):
            a, b = self.edge(j)
            d = b - a
            length = math.hypot(*d)
            off = abs((p[0] - a[0]) * d[1] - (p[1] - a[1]) * d[0]) / length
            if off > tol * max(1.0, length):
                continue
            t = float(np.dot(p - a, d)) / (length * length)
            if -tol <= t <= 1.0 + tol:
                return True
        return False

    def supporting_edge(self, a, b, interior_pt, tol: float = TOL) -> int | None:
        """Boundary edge containing segment [a, b] with the correct side.

        ``interior_pt`` must be a point inside the element claiming the
        segment; it disambiguates the two coincident sides of a slit.
        """
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        c = np.asarray(interior_pt, dtype=float)
        for j in range(self.m):
            va, vb = self.edge(j)
            d = vb - va
            length = math.hypot(*d)
            scale = tol * max(1.0, length)
            if abs((a[0] - va[0]) * d[1] - (a[1] - va[1]) * d[0]) / length > scale:
                continue
            if abs((b[0] - va[0]) * d[1] - (b[1] - va[1]) * d[0]) / length > scale:
                continue
            ta = float(np.dot(a - va, d)) / (length * length)
            tb = float(np.dot(b - va, d)) / (length * length)
            if not (-tol <= min(ta, tb) and max(ta, tb) <= 1.0 + tol):
                continue
            side = (c[0] - va[0]) * d[1] - (c[1] - va[1]) * d[0]
            if side < 0.0:  # interior point strictly left of the directed edge
                return j
        return None
