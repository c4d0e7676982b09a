"""The continuous onto-wires map built from per-triangle conformal maps.

For each polygon P_k of the wire tessellation and each of its sides, the
triangle spanned by the side and the polygon centroid carries a conformal
map from the upper half-plane.  A workspace point is sent to the real axis
by dropping the imaginary part of its preimage and back through the map,
with the strip outside the prevertices clamped to the side endpoints.  The
result is a continuous surjection of the workspace (minus the centroids)
onto the wire set that restricts to the identity on the wires.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .conformal import build_triangle_map
from .errors import ApexExcluded, NoConvergence
from .geometry import dist, nearest_point_on_segment, point_locate


@dataclass(frozen=True)
class WirePoint:
    """A point bound to one arrangement segment of the wire set."""

    position: tuple
    segment_id: int
    arclength: float


class CowMap:
    """Holds the tessellation and one triangle map per (polygon, side)."""

    def __init__(self, wire_set, tess):
        self.wire_set = wire_set
        self.tess = tess
        self.diam = tess.diameter
        maps = []
        for k, poly in enumerate(tess.polygons):
            g = tess.centroids[k]
            maps.append(tuple(build_triangle_map(s.p1, s.p2, g)
                              for s in tess.sides[k]))
        self.maps = tuple(maps)

    # accept a best-effort inversion residual near the side endpoints,
    # where the preimage offset drops below double resolution at w = +-1
    def _accept_res(self, m, x):
        r_vertex = min(abs(x - m.p1), abs(x - m.p2))
        return 2e-9 * m.diam + 0.3 * r_vertex

    def _locate(self, x, apex_project):
        """Region index, triangle map and (possibly apex-projected) point."""
        p = (float(x[0]), float(x[1]))
        k, j = point_locate(self.tess, p)
        g = self.tess.centroids[k]
        m = self.maps[k][j]
        if dist(p, g) <= m.apex_guard:
            if not apex_project:
                raise ApexExcluded(
                    f"point {p} within guard of region centroid {g}")
            d = dist(p, g)
            if d == 0.0:
                side = self.tess.sides[k][j]
                mid = ((side.p1[0] + side.p2[0]) / 2.0,
                       (side.p1[1] + side.p2[1]) / 2.0)
                ux, uy = mid[0] - g[0], mid[1] - g[1]
            else:
                ux, uy = p[0] - g[0], p[1] - g[1]
            nn = math.hypot(ux, uy)
            r = 1.000001 * m.apex_guard
            p = (g[0] + r * ux / nn, g[1] + r * uy / nn)
        return k, j, m, p

    def _strip_coord(self, m, p):
        """Preimage of p under the region map, as a complex number."""
        z, res = m.inverse_best(complex(p[0], p[1]))
        if res > self._accept_res(m, complex(p[0], p[1])):
            raise NoConvergence(
                f"inversion residual {res:.3e} at {p}", residual=res)
        return z

    def map_point(self, x, apex_project=False):
        """Wire point for workspace point x.

        Raises ApexExcluded within the guard disk of the region centroid
        unless ``apex_project`` is set, in which case x is first projected
        radially onto the guard circle (keeps simulation runs total).
        """
        k, j, m, p = self._locate(x, apex_project)
        side = self.tess.sides[k][j]
        z = self._strip_coord(m, p)
        if z.real <= m.w1:
            pos = side.p1
        elif z.real >= m.w2:
            pos = side.p2
        else:
            pos = m.forward_point(z.real)
        seg = self.wire_set.all_segments[side.segment_id]
        return WirePoint(position=pos, segment_id=side.segment_id,
                         arclength=seg.arclength_of(pos))

    def directional_factor(self, x, apex_project=False):
        """Tangential pushforward factor f'(Re z) / f'(z); 0 when clamped."""
        _, _, m, p = self._locate(x, apex_project)
        z = self._strip_coord(m, p)
        if z.real <= m.w1 + 1e-12 or z.real >= m.w2 - 1e-12:
            return 0.0 + 0.0j
        if z.imag == 0.0:
            return 1.0 + 0.0j
        return m.derivative(z.real) / m.derivative(z)

    def mapped_velocity(self, x, u, apex_project=False):
        """Velocity of the wire point when the source point moves with u.

        Real-linear chain rule through the projection onto the real axis:
        the pulled-back velocity u / f'(z) moves the preimage, only its real
        part moves Re z, and f'(Re z) pushes that motion onto the side.
        Zero in the clamped cases.
        """
        _, _, m, p = self._locate(x, apex_project)
        z = self._strip_coord(m, p)
        if z.real <= m.w1 + 1e-12 or z.real >= m.w2 - 1e-12:
            return (0.0, 0.0)
        uc = complex(float(u[0]), float(u[1]))
        if z.imag == 0.0:
            v = complex((uc / m.derivative(z.real)).real) \
                * m.derivative(z.real)
        else:
            v = m.derivative(z.real) * complex((uc / m.derivative(z)).real)
        return (v.real, v.imag)


def build_cow_map(wire_set, tess):
    return CowMap(wire_set, tess)


def cow_map_point(cow, x):
    return cow.map_point(x)


def cow_directional_factor(cow, x):
    return cow.directional_factor(x)


def mapped_velocity(cow, x, u):
    return cow.mapped_velocity(x, u)


def nearest_wire_point(wire_set, p):
    """Nearest point of the wire set (Euclidean projection) and its segment.

    This is the discontinuous projection the onto-wires map replaces; kept
    as an oracle and for the contrast tests across medial axes.
    """
    best = None
    best_d = math.inf
    for sid, seg in enumerate(wire_set.all_segments):
        q, d = nearest_point_on_segment(p, (seg.p, seg.q))
        if d < best_d:
            best_d = d
            best = WirePoint(position=q, segment_id=sid,
                             arclength=seg.arclength_of(q))
    return best
