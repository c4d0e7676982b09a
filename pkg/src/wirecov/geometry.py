"""Planar primitives: convex polygons, half-plane clipping, wire-induced
tessellations and edge Voronoi cells.

All coordinates are plain ``(x, y)`` float tuples; polygons store their
vertices counter-clockwise.  Everything here is immutable after construction
and safe for concurrent read-only use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

from .errors import DegenerateWire, OutOfWorkspace

# Relative positional tolerance, scaled by the workspace diameter.
EPS_REL = 1e-9


def _as_point(p):
    """Coerce a length-2 sequence to a float tuple."""
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"non-finite coordinates: {p!r}")
    return (x, y)


def dist(p, q):
    return math.hypot(p[0] - q[0], p[1] - q[1])


class ConvexPolygon:
    """Convex polygon with CCW vertex order.

    Vertices are deduplicated on construction; convexity is verified up to a
    small tolerance relative to the polygon scale (clipping can produce
    near-collinear vertices, which are accepted).
    """

    __slots__ = ("verts", "__dict__")

    def __init__(self, vertices, _trusted=False):
        verts = [_as_point(v) for v in vertices]
        if not _trusted:
            verts = _dedupe_ring(verts)
            if len(verts) < 3:
                raise ValueError("polygon needs at least 3 distinct vertices")
            scale2 = _ring_scale(verts) ** 2
            area2 = 0.0
            for i in range(len(verts)):
                a = verts[i]
                b = verts[(i + 1) % len(verts)]
                c = verts[(i + 2) % len(verts)]
                cr = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
                if cr < -1e-12 * scale2:
                    raise ValueError("vertices are not in convex CCW order")
                area2 += a[0] * b[1] - b[0] * a[1]
            if area2 <= 0.0:
                raise ValueError("vertex ring is clockwise or degenerate")
        self.verts = tuple(verts)

    @classmethod
    def _from_trusted(cls, verts):
        return cls(verts, _trusted=True)

    def __len__(self):
        return len(self.verts)

    def __iter__(self):
        return iter(self.verts)

    def __repr__(self):
        return f"ConvexPolygon({list(self.verts)!r})"

    @cached_property
    def area(self):
        return polygon_moments(self).area

    @cached_property
    def centroid(self):
        return polygon_moments(self).centroid

    @cached_property
    def diameter(self):
        """Max pairwise vertex distance (polygon scale)."""
        vs = self.verts
        return max(dist(vs[i], vs[j]) for i in range(len(vs)) for j in range(i + 1, len(vs)))

    def edges(self):
        vs = self.verts
        n = len(vs)
        return [(vs[i], vs[(i + 1) % n]) for i in range(n)]

    def contains(self, p, tol=None):
        """True if p is inside or on the boundary (within ``tol``)."""
        if tol is None:
            tol = EPS_REL * self.diameter
        return self.signed_inset(p) >= -tol

    def signed_inset(self, p):
        """Min signed distance of p to the edge lines (>0 strictly inside)."""
        px, py = p
        best = math.inf
        vs = self.verts
        n = len(vs)
        for i in range(n):
            ax, ay = vs[i]
            bx, by = vs[(i + 1) % n]
            ex, ey = bx - ax, by - ay
            elen = math.hypot(ex, ey)
            if elen == 0.0:
                continue
            d = (ex * (py - ay) - ey * (px - ax)) / elen
            if d < best:
                best = d
        return best


def _dedupe_ring(verts):
    """Drop consecutive duplicates (cyclically) at 1e-12 * scale."""
    if len(verts) < 2:
        return verts
    tol = 1e-12 * max(_ring_scale(verts), 1e-300)
    out = []
    for v in verts:
        if not out or dist(v, out[-1]) > tol:
            out.append(v)
    while len(out) > 1 and dist(out[0], out[-1]) <= tol:
        out.pop()
    return out


def _ring_scale(verts):
    xs = [v[0] for v in verts]
    ys = [v[1] for v in verts]
    return max(max(xs) - min(xs), max(ys) - min(ys), 1e-300)


# ---------------------------------------------------------------------------
# Clipping and moments
# ---------------------------------------------------------------------------

def clip_halfplane(poly, n, c, tol=None):
    """Intersect ``poly`` with the half-plane ``{x : n . x <= c}``.

    Returns a new ConvexPolygon, or None when the intersection has zero
    area.  ``n`` need not be normalized.
    """
    verts = poly.verts if isinstance(poly, ConvexPolygon) else [_as_point(v) for v in poly]
    out = _clip_ring(verts, float(n[0]), float(n[1]), float(c), tol)
    if out is None:
        return None
    return ConvexPolygon._from_trusted(out)


def _clip_ring(verts, nx, ny, c, tol=None):
    """Sutherland-Hodgman step for one half-plane, on a raw vertex ring."""
    nn = math.hypot(nx, ny)
    if nn == 0.0:
        raise ValueError("zero normal vector")
    if tol is None:
        tol = EPS_REL * _ring_scale(verts) * nn
    m = len(verts)
    d = [nx * v[0] + ny * v[1] - c for v in verts]
    if all(di <= tol for di in d):
        return list(verts)
    if all(di >= -tol for di in d):
        return None
    out = []
    for i in range(m):
        j = (i + 1) % m
        di, dj = d[i], d[j]
        if di <= tol:
            out.append(verts[i])
        if (di < -tol and dj > tol) or (di > tol and dj < -tol):
            t = di / (di - dj)
            vi, vj = verts[i], verts[j]
            out.append((vi[0] + t * (vj[0] - vi[0]), vi[1] + t * (vj[1] - vi[1])))
    out = _dedupe_ring(out)
    if len(out) < 3:
        return None
    # reject slivers of essentially zero area
    area2 = 0.0
    for i in range(len(out)):
        a = out[i]
        b = out[(i + 1) % len(out)]
        area2 += a[0] * b[1] - b[0] * a[1]
    if area2 <= (tol / nn) * _ring_scale(out) * 2.0:
        return None
    return out


@dataclass(frozen=True)
class PolygonMoments:
    """Area, mass centroid and the polar second moment about the centroid.

    ``second_moment_about(q)`` evaluates the integral of |x - q|^2 over the
    polygon via the parallel-axis identity, so repeated queries are cheap.
    """

    area: float
    centroid: tuple
    inertia_centroid: float

    def second_moment_about(self, q):
        dx = self.centroid[0] - q[0]
        dy = self.centroid[1] - q[1]
        return self.inertia_centroid + self.area * (dx * dx + dy * dy)


def polygon_moments(poly):
    """Exact area, centroid and second moment of a convex polygon.

    Fan triangulation from the first vertex; each triangle contributes its
    closed-form area, centroid and polar moment A*(a^2+b^2+c^2)/36 about its
    own centroid.
    """
    verts = poly.verts if isinstance(poly, ConvexPolygon) else [_as_point(v) for v in poly]
    x0, y0 = verts[0]
    area = 0.0
    cx = cy = 0.0
    tri = []  # (area_t, gx, gy, inertia_t)
    for i in range(1, len(verts) - 1):
        x1, y1 = verts[i]
        x2, y2 = verts[i + 1]
        a_t = 0.5 * ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))
        gx = (x0 + x1 + x2) / 3.0
        gy = (y0 + y1 + y2) / 3.0
        s2 = ((x1 - x0) ** 2 + (y1 - y0) ** 2
              + (x2 - x1) ** 2 + (y2 - y1) ** 2
              + (x0 - x2) ** 2 + (y0 - y2) ** 2)
        tri.append((a_t, gx, gy, a_t * s2 / 36.0))
        area += a_t
        cx += a_t * gx
        cy += a_t * gy
    if area <= 0.0:
        raise ValueError("polygon has non-positive area")
    cx /= area
    cy /= area
    inertia = 0.0
    for a_t, gx, gy, i_t in tri:
        inertia += i_t + a_t * ((gx - cx) ** 2 + (gy - cy) ** 2)
    return PolygonMoments(area=area, centroid=(cx, cy), inertia_centroid=inertia)


def nearest_point_on_segment(p, seg):
    """Euclidean-nearest point of the closed segment and its distance."""
    (ax, ay), (bx, by) = seg
    ex, ey = bx - ax, by - ay
    ee = ex * ex + ey * ey
    if ee == 0.0:
        raise ValueError("segment endpoints coincide")
    t = ((p[0] - ax) * ex + (p[1] - ay) * ey) / ee
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    q = (ax + t * ex, ay + t * ey)
    return q, dist(p, q)


# ---------------------------------------------------------------------------
# Wires and the induced tessellation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Wire:
    """Affine wire {x : a . x + b = 0} clipped to the workspace.

    ``a`` is unit length; ``segments`` holds the chord(s) of the line inside
    the workspace (one chord for a convex workspace).
    """

    a: tuple
    b: float
    segments: tuple = ()


@dataclass(frozen=True)
class Segment:
    """A maximal arrangement edge: piece of a wire or of the boundary."""

    p: tuple
    q: tuple
    owner: tuple  # ("wire", wire_index) or ("boundary", edge_index)

    @cached_property
    def length(self):
        return dist(self.p, self.q)

    @cached_property
    def tangent(self):
        L = self.length
        return ((self.q[0] - self.p[0]) / L, (self.q[1] - self.p[1]) / L)

    def point_at(self, s):
        tx, ty = self.tangent
        return (self.p[0] + s * tx, self.p[1] + s * ty)

    def arclength_of(self, x):
        tx, ty = self.tangent
        s = (x[0] - self.p[0]) * tx + (x[1] - self.p[1]) * ty
        return min(max(s, 0.0), self.length)


@dataclass(frozen=True)
class WireSet:
    """All traversable segments: interior wires plus the boundary of X."""

    wires: tuple
    boundary_segments: tuple
    all_segments: tuple
    dropped: tuple = ()  # indices of wire specs that missed the interior


@dataclass(frozen=True)
class Side:
    """One side of a tessellation polygon, with its arrangement segment id."""

    p1: tuple
    p2: tuple
    segment_id: int


@dataclass(frozen=True)
class Tessellation:
    """Convex faces of the wire-line arrangement inside the workspace."""

    workspace: ConvexPolygon
    polygons: tuple
    centroids: tuple
    sides: tuple  # sides[k][j] -> Side
    side_adjacency: dict = field(compare=False)

    @cached_property
    def diameter(self):
        return self.workspace.diameter


def normalize_wire(a, b):
    """Scale (a, b) so |a| = 1 and flip signs into a canonical half."""
    ax, ay = float(a[0]), float(a[1])
    nn = math.hypot(ax, ay)
    if nn == 0.0:
        raise ValueError("wire normal must be nonzero")
    ax, ay, b = ax / nn, ay / nn, float(b) / nn
    if ax < 0.0 or (ax == 0.0 and ay < 0.0):
        ax, ay, b = -ax, -ay, -b
    return (ax, ay), b


def _line_chord(X, a, b, tol):
    """Clip the line a.x + b = 0 to convex X; None if it misses the interior."""
    pts = []
    verts = X.verts
    n = len(verts)
    d = [a[0] * v[0] + a[1] * v[1] + b for v in verts]
    for i in range(n):
        j = (i + 1) % n
        di, dj = d[i], d[j]
        if abs(di) <= tol:
            pts.append(verts[i])
        elif (di < -tol and dj > tol) or (di > tol and dj < -tol):
            t = di / (di - dj)
            vi, vj = verts[i], verts[j]
            pts.append((vi[0] + t * (vj[0] - vi[0]), vi[1] + t * (vj[1] - vi[1])))
    if len(pts) < 2:
        return None
    # extreme points along the line direction
    tx, ty = -a[1], a[0]
    proj = [(p[0] * tx + p[1] * ty, p) for p in pts]
    proj.sort(key=lambda z: z[0])
    lo, hi = proj[0][1], proj[-1][1]
    if dist(lo, hi) <= 10.0 * tol:
        return None
    return (lo, hi)


def build_tessellation(X, wires):
    """Split X by wire lines into the arrangement faces.

    Parameters
    ----------
    X : ConvexPolygon
        Workspace.
    wires : iterable of (a, b)
        Wire lines given by normal vector and offset; normalized here.

    Returns
    -------
    (WireSet, Tessellation)

    Raises
    ------
    DegenerateWire
        If two wires describe the same line within 1e-9 on normalized (a, b).
    """
    tol = EPS_REL * X.diameter
    norm = [normalize_wire(a, b) for (a, b) in wires]
    for i in range(len(norm)):
        for j in range(i + 1, len(norm)):
            (ai, bi), (aj, bj) = norm[i], norm[j]
            if (abs(ai[0] - aj[0]) < 1e-9 and abs(ai[1] - aj[1]) < 1e-9
                    and abs(bi - bj) < 1e-9):
                raise DegenerateWire(f"wires {i} and {j} are the same line")

    kept = []
    dropped = []
    for i, (a, b) in enumerate(norm):
        chord = _line_chord(X, a, b, tol)
        if chord is None:
            dropped.append(i)
        else:
            kept.append(Wire(a=a, b=b, segments=(chord,)))

    # recursive half-plane splitting by each kept wire line
    rings = [list(X.verts)]
    for w in kept:
        (ax, ay), b = w.a, w.b
        new_rings = []
        for ring in rings:
            neg = _clip_ring(ring, ax, ay, -b, tol)
            pos = _clip_ring(ring, -ax, -ay, b, tol)
            if neg is not None:
                new_rings.append(neg)
            if pos is not None:
                new_rings.append(pos)
        rings = new_rings

    polygons = tuple(ConvexPolygon._from_trusted(r) for r in rings)
    centroids = tuple(p.centroid for p in polygons)

    # classify every face side: which wire or boundary edge owns it
    bedges = X.edges()

    def _owner_of(mid):
        for wi, w in enumerate(kept):
            if abs(w.a[0] * mid[0] + w.a[1] * mid[1] + w.b) < 10.0 * tol:
                return ("wire", wi)
        best = None
        best_d = math.inf
        for ei, e in enumerate(bedges):
            _, d_e = nearest_point_on_segment(mid, e)
            if d_e < best_d:
                best_d, best = d_e, ("boundary", ei)
        if best_d > 10.0 * tol:
            raise AssertionError(f"side midpoint {mid} on neither wire nor boundary")
        return best

    # dedup sides shared by two faces into arrangement segments
    segments = []
    sides = []
    adjacency = {}
    for k, poly in enumerate(polygons):
        poly_sides = []
        for j, (p1, p2) in enumerate(poly.edges()):
            sid = None
            for cand_id, seg in enumerate(segments):
                if ((dist(seg.p, p1) < 10 * tol and dist(seg.q, p2) < 10 * tol)
                        or (dist(seg.p, p2) < 10 * tol and dist(seg.q, p1) < 10 * tol)):
                    sid = cand_id
                    break
            if sid is None:
                mid = ((p1[0] + p2[0]) / 2.0, (p1[1] + p2[1]) / 2.0)
                segments.append(Segment(p=p1, q=p2, owner=_owner_of(mid)))
                sid = len(segments) - 1
            adjacency.setdefault(sid, []).append((k, j))
            poly_sides.append(Side(p1=p1, p2=p2, segment_id=sid))
        sides.append(tuple(poly_sides))

    boundary = tuple(Segment(p=e[0], q=e[1], owner=("boundary", i))
                     for i, e in enumerate(bedges))
    wire_set = WireSet(wires=tuple(kept), boundary_segments=boundary,
                       all_segments=tuple(segments), dropped=tuple(dropped))
    tess = Tessellation(workspace=X, polygons=polygons, centroids=centroids,
                        sides=tuple(sides), side_adjacency=adjacency)
    return wire_set, tess


def edge_voronoi_cells(poly):
    """Voronoi cells of the sides of a convex polygon.

    Cell j holds the points whose nearest side (by segment distance) is side
    j.  For a convex polygon these cells are convex: each is obtained by
    clipping against the angle bisector of the supporting lines of side j and
    every other side, keeping the branch nearer to side j.
    """
    verts = poly.verts
    n = len(verts)
    # inward line representation: n_in . x + c >= 0 inside, |n_in| = 1
    lines = []
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        elen = math.hypot(ex, ey)
        nin = (-ey / elen, ex / elen)
        lines.append((nin, -(nin[0] * ax + nin[1] * ay)))

    cells = []
    for j in range(n):
        ring = list(verts)
        (nj, cj) = lines[j]
        for jb in range(n):
            if jb == j or ring is None:
                continue
            (nb, cb) = lines[jb]
            # keep {x : dist_j(x) <= dist_jb(x)} using inward signed distances
            dx, dy = nj[0] - nb[0], nj[1] - nb[1]
            if math.hypot(dx, dy) < 1e-12:
                continue  # effectively the same supporting line
            ring = _clip_ring(ring, dx, dy, cb - cj)
        if ring is None:
            raise AssertionError(f"empty edge Voronoi cell for side {j}")
        cells.append(ConvexPolygon._from_trusted(ring))
    return cells


def point_locate(tess, p, tol=None):
    """Index (k, j) of the triangle region (side j of polygon k) holding p.

    Ties on shared boundaries resolve to the lexicographically smallest
    (k, j).  Raises OutOfWorkspace when p is outside X beyond tolerance.
    """
    if tol is None:
        tol = EPS_REL * tess.diameter
    if not tess.workspace.contains(p, tol):
        raise OutOfWorkspace(f"point {p} outside workspace")
    px, py = p
    best = None
    best_m = -math.inf
    for k, poly in enumerate(tess.polygons):
        if not poly.contains(p, 10.0 * tol):
            continue
        gx, gy = tess.centroids[k]
        for j, side in enumerate(tess.sides[k]):
            m = _triangle_inset(px, py, side.p1, side.p2, (gx, gy))
            if m >= -tol:
                return (k, j)
            if m > best_m:
                best_m, best = m, (k, j)
    if best is not None and best_m > -1e5 * tol:
        return best
    raise OutOfWorkspace(f"point {p} not located in any region")


def _triangle_inset(px, py, a, b, c):
    """Min signed edge distance of (px,py) in CCW triangle a,b,c."""
    best = math.inf
    for (ux, uy), (vx, vy) in ((a, b), (b, c), (c, a)):
        ex, ey = vx - ux, vy - uy
        elen = math.hypot(ex, ey)
        if elen == 0.0:
            return -math.inf
        d = (ex * (py - uy) - ey * (px - ux)) / elen
        if d < best:
            best = d
    return best
