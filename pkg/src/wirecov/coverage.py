"""Unconstrained locational optimization: Voronoi partition of a convex
workspace, the quadratic coverage cost, and the centroidal descent law."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DuplicateGenerators
from .geometry import EPS_REL, ConvexPolygon, _clip_ring, polygon_moments


@dataclass(frozen=True)
class VoronoiPartition:
    """Cells, centroids and masses for a set of generator points."""

    cells: tuple
    centroids: tuple
    masses: tuple
    moments: tuple  # PolygonMoments per cell


def voronoi_partition(X, points):
    """Voronoi cells of ``points`` inside the convex polygon X.

    Each cell is built by clipping X with the perpendicular-bisector
    half-planes against every other generator (O(N^2), exact for the small
    team sizes used here).
    """
    pts = [(float(p[0]), float(p[1])) for p in points]
    n = len(pts)
    tol = EPS_REL * X.diameter
    for i in range(n):
        for j in range(i + 1, n):
            if math.hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]) < tol:
                raise DuplicateGenerators(f"generators {i} and {j} coincide")

    cells = []
    moments = []
    base = list(X.verts)
    for i, (px, py) in enumerate(pts):
        ring = base
        for j, (qx, qy) in enumerate(pts):
            if j == i or ring is None:
                continue
            # keep |x - p| <= |x - q|  <=>  (q - p) . x <= (|q|^2 - |p|^2)/2
            nx, ny = qx - px, qy - py
            c = 0.5 * (qx * qx + qy * qy - px * px - py * py)
            ring = _clip_ring(ring, nx, ny, c)
        if ring is None:
            raise DuplicateGenerators(f"generator {i} has an empty cell")
        cells.append(ConvexPolygon._from_trusted(ring))
        moments.append(polygon_moments(cells[-1]))

    return VoronoiPartition(
        cells=tuple(cells),
        centroids=tuple(m.centroid for m in moments),
        masses=tuple(m.area for m in moments),
        moments=tuple(moments),
    )


def locational_cost(partition, points):
    """Sum over robots of the integral of |x - p_i|^2 over cell i."""
    total = 0.0
    for m, p in zip(partition.moments, points):
        total += m.second_moment_about((float(p[0]), float(p[1])))
    return total


def lloyd_control(partition, points, k_p):
    """Centroidal descent velocities u_i = k_p (rho_i - p_i)."""
    if k_p <= 0.0:
        raise ValueError("k_p must be positive")
    out = []
    for (cx, cy), p in zip(partition.centroids, points):
        out.append((k_p * (cx - float(p[0])), k_p * (cy - float(p[1]))))
    return out
