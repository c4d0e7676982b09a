"""Numerical conformal map of the upper half-plane onto a triangle.

The map sends the canonical domain H = {z : Im z >= 0} onto the closed
triangle (p1, p2, apex) so that the prevertices w1 = -1 and w2 = +1 go to p1
and p2 and the point at infinity goes to the apex.  Putting the third
prevertex at infinity leaves an integrand with only two endpoint
singularities,

    F(z) = (z + 1)^(a1 - 1) * (1 - z)^(a2 - 1),

where a1, a2 are the interior angles at p1, p2 divided by pi.  F is positive
on (-1, 1); the rotation of the base side is folded into the constant C.
Branches are taken continuous from the upper half-plane.

Points in the image plane are complex numbers (x + i*y); the rest of the
package converts to coordinate tuples at the boundary.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import roots_jacobi

from .errors import (
    ApexExcluded,
    DegenerateTriangle,
    NoConvergence,
    QuadratureFailure,
    SingularPoint,
)

APEX_GUARD_REL = 1e-6  # inversion guard radius around the apex, rel. diameter
_N_NODES = 32
_MAX_DEPTH = 48
_LOG_Z_CAP = math.log(1e280)  # hard cap on the saturation radius

_GL_X, _GL_W = np.polynomial.legendre.leggauss(_N_NODES)


def _log_upper(w):
    """log with branch continuous from the upper half-plane (arg in [0, pi])."""
    w = np.asarray(w, dtype=complex)
    a = np.angle(w)
    a = np.where((w.imag == 0.0) & (w.real < 0.0), math.pi, a)
    return np.log(np.abs(w)) + 1j * a


def _log_lower(w):
    """log with branch continuous from the lower half-plane (arg in [-pi, 0])."""
    w = np.asarray(w, dtype=complex)
    a = np.angle(w)
    a = np.where((w.imag == 0.0) & (w.real < 0.0), -math.pi, a)
    return np.log(np.abs(w)) + 1j * a


def _as_complex(p):
    if isinstance(p, complex):
        return p
    return complex(float(p[0]), float(p[1]))


class SCTriangleMap:
    """Forward/inverse/derivative of the half-plane-to-triangle map.

    Built by :func:`build_triangle_map`.  Immutable after construction
    (including the warm-start grid); all evaluations are pure.
    """

    w1 = -1.0
    w2 = 1.0

    def __init__(self, p1, p2, apex):
        p1 = _as_complex(p1)
        p2 = _as_complex(p2)
        apex = _as_complex(apex)
        base = p2 - p1
        cross = (base.conjugate() * (apex - p1)).imag
        self.diam = max(abs(base), abs(apex - p1), abs(apex - p2))
        if abs(base) == 0.0 or cross <= 1e-12 * self.diam ** 2:
            raise DegenerateTriangle(
                "triangle is degenerate or apex not left of p1->p2")

        def _angle(at, u, v):
            du, dv = u - at, v - at
            c = (du.conjugate() * dv).imag
            d = (du.conjugate() * dv).real
            return math.atan2(abs(c), d) / math.pi

        a1 = _angle(p1, p2, apex)
        a2 = _angle(p2, apex, p1)
        a3 = 1.0 - a1 - a2
        if min(a1, a2, a3) <= 0.0:
            raise DegenerateTriangle(f"invalid angle fractions {(a1, a2, a3)}")
        self.p1, self.p2, self.apex = p1, p2, apex
        self.alpha = (a1, a2, a3)
        self.n_nodes = _N_NODES

        # Gauss-Jacobi rules: full interval (both endpoint exponents) for the
        # base integral, and one-sided rules for panels leaving each prevertex.
        xg, wg = roots_jacobi(_N_NODES, a2 - 1.0, a1 - 1.0)
        self.I0 = float(np.sum(wg))
        self._gj_left = roots_jacobi(_N_NODES, 0.0, a1 - 1.0)
        self._gj_right = roots_jacobi(_N_NODES, 0.0, a2 - 1.0)
        self._gj_left_lo = roots_jacobi(24, 0.0, a1 - 1.0)
        self._gj_right_lo = roots_jacobi(24, 0.0, a2 - 1.0)

        self.A = p1
        self.C = base / self.I0
        self.apex_guard = APEX_GUARD_REL * self.diam
        # absolute tolerance in integral space for a 1e-10*diam image target
        self._qtol = 0.5e-10 * self.diam / abs(self.C)
        self._inv_tol = 1e-11 * self.diam
        # beyond _r_far the straight path is replaced by a radial tail rule
        # whose regularizing substitution needs |z|^(-a3) <= 1/2
        self._r_far = max(16.0, 2.0 ** (1.0 / a3))
        # saturation radius: the distance to the apex decays like
        # |C| |z|^(-a3) / a3, so past z_sat the apex is exact to tolerance
        log_zsat = (math.log(abs(self.C) / a3) - math.log(1e-11 * self.diam)) / a3
        self.z_saturation = math.exp(min(max(log_zsat, math.log(1e6)), _LOG_Z_CAP))
        self._grid_z, self._grid_x = self._build_grid()

    # -- integrand ---------------------------------------------------------

    def _F(self, z):
        a1, a2, _ = self.alpha
        lg = (a1 - 1.0) * _log_upper(np.asarray(z, dtype=complex) + 1.0) \
            + (a2 - 1.0) * _log_lower(1.0 - np.asarray(z, dtype=complex))
        return np.exp(lg)

    # -- quadrature --------------------------------------------------------

    def _gj_panel(self, w, h, lo=False):
        """Integral of F over the straight panel [w, w + h] leaving the
        prevertex w in {-1, +1}; the endpoint singularity is absorbed by the
        Jacobi weight."""
        a1, a2, _ = self.alpha
        if w == -1.0:
            x, wt = self._gj_left_lo if lo else self._gj_left
            sig = (x + 1.0) / 2.0
            g = np.exp((a2 - 1.0) * _log_lower(1.0 - (-1.0 + h * sig)))
            scale = np.exp(a1 * _log_upper(h)) * 2.0 ** (-a1)
            return complex(scale * np.sum(wt * g))
        else:
            x, wt = self._gj_right_lo if lo else self._gj_right
            sig = (x + 1.0) / 2.0
            # chi = 1 - (-h) sig going from 1 toward 1 + h
            hc = -h  # 1 - chi runs along -h * sigma
            g = np.exp((a1 - 1.0) * _log_upper(1.0 + (1.0 - hc * sig)))
            scale = -np.exp(a2 * _log_lower(hc)) * 2.0 ** (-a2)
            return complex(scale * np.sum(wt * g))

    def _gl_panel(self, a, b):
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        return half * complex(np.sum(_GL_W * self._F(mid + half * _GL_X)))

    def _gl_adaptive(self, a, b, tol, depth=0):
        whole = self._gl_panel(a, b)
        m = 0.5 * (a + b)
        left = self._gl_panel(a, m)
        right = self._gl_panel(m, b)
        if abs(whole - (left + right)) <= tol:
            return left + right
        if depth >= _MAX_DEPTH:
            raise QuadratureFailure(
                f"panel [{a}, {b}] not converged at depth {depth}")
        return (self._gl_adaptive(a, m, 0.5 * tol, depth + 1)
                + self._gl_adaptive(m, b, 0.5 * tol, depth + 1))

    def _integral_from_prevertex(self, w, z, tol):
        """Integral of F from the prevertex w to z along the straight path."""
        L = abs(z - w)
        if L == 0.0:
            return 0.0 + 0.0j
        u = (z - w) / L
        total = 0.0 + 0.0j
        # head panel no longer than half the gap to the other singularity
        h = min(L, 1.0)
        head = self._gj_panel(w, h * u)
        if abs(head - self._gj_panel(w, h * u, lo=True)) > tol:
            # rare: shrink the head and cover the rest adaptively
            head = (self._gj_panel(w, 0.25 * h * u)
                    + self._gl_adaptive(w + 0.25 * h * u, w + h * u, 0.5 * tol))
        total += head
        if h < L:
            total += self._gl_adaptive(w + h * u, z, tol)
        return total

    # -- public evaluations --------------------------------------------------

    def forward(self, z):
        """Image of z in the closed triangle.

        z may be real or complex with Im z >= 0 (tiny negative parts are
        clamped).  Far from the real axis the image approaches the apex like
        |z|^(-a3); beyond ``z_saturation`` the apex is returned directly
        (the difference is below the quadrature tolerance there).
        """
        z = complex(z)
        if z.imag < 0.0:
            if z.imag < -1e-9:
                raise ValueError(f"z = {z} not in the upper half-plane")
            z = complex(z.real, 0.0)
        if abs(z) > self.z_saturation:
            return self.apex
        if abs(z) >= self._r_far:
            return self.apex - self.C * self._tail_integral(z)
        if abs(z - self.w2) <= abs(z - self.w1):
            return self.p2 + self.C * self._integral_from_prevertex(
                self.w2, z, self._qtol)
        return self.p1 + self.C * self._integral_from_prevertex(
            self.w1, z, self._qtol)

    def _tail_H(self, z, w):
        """Integrand of the radial tail rule in the variable w in (0, 1]:
        chi = z w^(-1/a3) regularizes the |chi|^(-1-a3) decay, leaving a
        function with a finite limit at w = 0.  Evaluated in log space; when
        chi would overflow a double, log(chi +- 1) ~ log(chi) is exact to
        machine precision anyway."""
        a1, a2, a3 = self.alpha
        w = np.asarray(w, dtype=float)
        lw = np.log(w)
        log_mag = math.log(abs(z)) - lw / a3  # log |chi|
        theta = math.atan2(z.imag, z.real)    # arg chi = arg z in [0, pi]
        safe = log_mag < 500.0
        chi = z * np.exp(np.where(safe, -lw / a3, 0.0))
        lg_exact = (a1 - 1.0) * _log_upper(chi + 1.0) \
            + (a2 - 1.0) * _log_lower(1.0 - chi)
        lg_asym = (a1 - 1.0) * (log_mag + 1j * theta) \
            + (a2 - 1.0) * (log_mag + 1j * (theta - math.pi))
        lg = np.where(safe, lg_exact, lg_asym) + (-1.0 / a3 - 1.0) * lw
        return np.exp(lg)

    def _tail_integral(self, z, tol=None, a=0.0, b=1.0, depth=0):
        """Integral of F from z radially out to infinity."""
        a3 = self.alpha[2]
        if tol is None:
            tol = self._qtol * a3 / abs(z) if abs(z) < 1e300 else 0.0

        def panel(lo, hi):
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            return half * complex(np.sum(_GL_W * self._tail_H(
                z, mid + half * _GL_X)))

        whole = panel(a, b)
        m = 0.5 * (a + b)
        halves = panel(a, m) + panel(m, b)
        if abs(whole - halves) <= tol or depth >= _MAX_DEPTH:
            if depth >= _MAX_DEPTH and abs(whole - halves) > tol:
                raise QuadratureFailure("radial tail rule not converged")
            return (z / a3) * halves if depth == 0 else halves
        out = (self._tail_integral(z, 0.5 * tol, a, m, depth + 1)
               + self._tail_integral(z, 0.5 * tol, m, b, depth + 1))
        return (z / a3) * out if depth == 0 else out

    def derivative(self, z):
        """df/dz = C (z+1)^(a1-1) (1-z)^(a2-1); singular at the prevertices."""
        z = complex(z)
        if min(abs(z - self.w1), abs(z - self.w2)) < 1e-13:
            raise SingularPoint(f"derivative singular at z = {z}")
        return self.C * complex(self._F(z))

    def forward_point(self, z):
        v = self.forward(z)
        return (v.real, v.imag)

    def inverse(self, x):
        """Preimage in the closed upper half-plane of a triangle point x.

        Damped Newton warm-started from the forward-image grid; near the two
        finite prevertices the iteration runs in the regularizing variable
        u = (z - w)^alpha where the map has a simple nonzero derivative.
        Raises ApexExcluded inside the apex guard disk and NoConvergence
        (with the final residual) when tolerance is not reached.  Very close
        to a sharp corner no double-precision z can satisfy the tolerance
        (the preimage offset falls below the ulp at the prevertex); such
        points surface as NoConvergence here, while :meth:`inverse_best`
        returns the best representable preimage.
        """
        z, res = self.inverse_best(x)
        if res > 1e-9 * self.diam:
            raise NoConvergence(
                f"inverse at {x} stalled with residual {res:.3e}",
                residual=res)
        return z

    def inverse_best(self, x):
        """Best-effort preimage: returns (z, residual) without a tolerance
        check.  Still raises ApexExcluded inside the apex guard."""
        x = _as_complex(x)
        if abs(x - self.apex) < self.apex_guard:
            raise ApexExcluded(f"point {x} within apex guard")
        if abs(x - self.p1) < 1e-13 * self.diam:
            return complex(self.w1), 0.0
        if abs(x - self.p2) < 1e-13 * self.diam:
            return complex(self.w2), 0.0

        k = int(np.argmin(np.abs(self._grid_x - x)))
        z = complex(self._grid_z[k])
        z, res = self._newton(z, x, 100)
        if res > 1e-9 * self.diam:
            z2, res2 = self._continuation(x, complex(self._grid_z[k]),
                                          complex(self._grid_x[k]))
            if res2 < res:
                z, res = z2, res2
        if z.imag < 0.0:
            z = complex(z.real, 0.0)
        return z, res

    # -- internals -----------------------------------------------------------

    def _newton(self, z, x, max_iter):
        """Damped Newton for f(z) = x; returns (z, final residual).

        Plain Newton oscillates or diverges near the finite prevertices when
        the corner angle is below pi/2, so the first time the iterate enters
        a prevertex neighbourhood the solve restarts in the regularized
        corner variable.
        """
        fz = self.forward(z)
        res = abs(fz - x)
        tried = {self.w1: False, self.w2: False, "apex": False}
        for _ in range(max_iter):
            if res < self._inv_tol:
                return z, res
            switched = False
            for w in (self.w1, self.w2):
                if abs(z - w) < 0.2 and not tried[w]:
                    tried[w] = True
                    zv, rv = self._newton_vertex(z, x, w, max_iter)
                    if rv < res:
                        z, res = zv, rv
                        fz = self.forward(z)
                    switched = True
            if abs(z) > 0.5 * self._r_far and not tried["apex"]:
                tried["apex"] = True
                zv, rv = self._newton_apex(z, x, max_iter)
                if rv < res:
                    z, res = zv, rv
                    fz = self.forward(z)
                switched = True
            if res < self._inv_tol:
                return z, res
            if switched and (abs(z - self.w1) < 0.2 or abs(z - self.w2) < 0.2
                             or abs(z) > self._r_far):
                # corner solve already found the best representable point
                return z, res
            dz = (fz - x) / (self.C * complex(self._F(z)))
            lam = 1.0
            improved = False
            while lam > 1e-4:
                zn = z - lam * dz
                if zn.imag < 0.0:
                    zn = complex(zn.real, 0.0)
                fn = self.forward(zn)
                rn = abs(fn - x)
                if rn < res:
                    z, fz, res = zn, fn, rn
                    improved = True
                    break
                lam *= 0.5
            if not improved:
                return z, res
        return z, res

    def _newton_vertex(self, z, x, w, max_iter):
        """Newton in u = (z - w)^alpha, where f(u) has a regular derivative."""
        a1, a2, _ = self.alpha
        alpha = a1 if w == self.w1 else a2
        if z == w:
            u = 0.0 + 0.0j
        elif w == self.w1:
            u = np.exp(alpha * _log_upper(z + 1.0)).item()
        else:
            u = np.exp(alpha * _log_lower(1.0 - z)).item()

        def _z_of(u):
            if u == 0.0:
                return complex(w)
            if w == self.w1:
                return -1.0 + u ** (1.0 / alpha)
            return 1.0 - u ** (1.0 / alpha)

        def _dfdu(zc):
            if w == self.w1:
                return (self.C / alpha) * np.exp(
                    (a2 - 1.0) * _log_lower(1.0 - zc)).item()
            return -(self.C / alpha) * np.exp(
                (a1 - 1.0) * _log_upper(1.0 + zc)).item()

        zc = _z_of(u)
        fz = self.forward(zc)
        res = abs(fz - x)
        for _ in range(max_iter):
            if res < self._inv_tol:
                return zc, res
            du = (fz - x) / _dfdu(zc)
            lam = 1.0
            improved = False
            while lam > 1e-4:
                un = u - lam * du
                zn = _z_of(un)
                if zn.imag < 0.0:
                    zn = complex(zn.real, 0.0)
                    if zn == w:
                        un = 0.0 + 0.0j
                    elif w == self.w1:
                        un = np.exp(alpha * _log_upper(zn + 1.0)).item()
                    else:
                        un = np.exp(alpha * _log_lower(1.0 - zn)).item()
                fn = self.forward(zn)
                rn = abs(fn - x)
                if rn < res:
                    u, zc, fz, res = un, zn, fn, rn
                    improved = True
                    break
                lam *= 0.5
            if not improved:
                return zc, res
        return zc, res

    def _newton_apex(self, z, x, max_iter):
        """Newton in the apex chart u = z^(-a3), regular at infinity."""
        a3 = self.alpha[2]
        u = np.exp(-a3 * _log_upper(z)).item()

        def _z_of(u):
            # arg u in [-a3 pi, 0] maps back to arg z in [0, pi]
            return np.exp(-_log_lower(u) / a3).item() if u != 0 else math.inf

        zc = z
        fz = self.forward(zc)
        res = abs(fz - x)
        for _ in range(max_iter):
            if res < self._inv_tol:
                return zc, res
            # df/du = f'(z) dz/du = -C F(z) z^(1+a3) / a3 (finite at infinity);
            # joint log evaluation keeps huge |z| from overflowing
            a1, a2, _ = self.alpha
            lg = (a1 - 1.0) * _log_upper(zc + 1.0) \
                + (a2 - 1.0) * _log_lower(1.0 - zc) \
                + (1.0 + a3) * _log_upper(zc)
            dfdu = -self.C * np.exp(lg).item() / a3
            du = (fz - x) / dfdu
            lam = 1.0
            improved = False
            while lam > 1e-4:
                un = u - lam * du
                if un == 0.0 or abs(un) > 1.0:
                    lam *= 0.5
                    continue
                # clamp the sector: arg(un) must stay in [-a3 pi, 0]
                ang = math.atan2(un.imag, un.real)
                if ang > 0.0:
                    un = abs(un) + 0.0j
                elif ang < -a3 * math.pi:
                    un = abs(un) * complex(math.cos(-a3 * math.pi),
                                           math.sin(-a3 * math.pi))
                zn = _z_of(un)
                if abs(zn) > self.z_saturation:
                    lam *= 0.5
                    continue
                fn = self.forward(zn)
                rn = abs(fn - x)
                if rn < res:
                    u, zc, fz, res = un, zn, fn, rn
                    improved = True
                    break
                lam *= 0.5
            if not improved:
                return zc, res
        return zc, res

    def _continuation(self, x, z0, x0):
        """Track the preimage along the segment x0 -> x from a known pair."""
        z, cur = z0, 0.0
        ds = 0.5
        res = abs(self.forward(z0) - x)
        while cur < 1.0:
            s = min(1.0, cur + ds)
            target = x0 + s * (x - x0)
            zn, rn = self._newton(z, target, 30)
            if rn < 1e-9 * self.diam:
                z, cur = zn, s
                ds = min(2.0 * ds, 1.0)
            else:
                ds *= 0.5
                if ds < 1e-4:
                    return z, abs(self.forward(z) - x)
        return z, abs(self.forward(z) - x)

    def _build_grid(self):
        """Forward-image warm-start grid: 64 x 64 points of H covering the
        triangle; evaluated with a fixed coarse composite rule (accuracy only
        needs to seed Newton)."""
        t = np.linspace(-1.0, 1.0, 64)
        xs = np.tan(t * math.atan(30.0))
        ys = np.logspace(-3.0, math.log10(60.0), 64)
        zz = (xs[None, :] + 1j * ys[:, None]).ravel()
        xx = self._coarse_forward_batch(zz)
        return zz, xx

    def _coarse_forward_batch(self, zs):
        """Vectorized low-accuracy forward for many z (warm grid only)."""
        a1, a2, _ = self.alpha
        zs = np.asarray(zs, dtype=complex)
        out = np.empty_like(zs)
        near2 = np.abs(zs - self.w2) <= np.abs(zs - self.w1)
        for right, base_pt in ((False, self.p1), (True, self.p2)):
            sel = near2 if right else ~near2
            if not np.any(sel):
                continue
            z = zs[sel]
            w = self.w2 if right else self.w1
            L = np.abs(z - w)
            u = np.where(L > 0, (z - w) / np.where(L > 0, L, 1.0), 0.0)
            h = np.minimum(L, 1.0)
            # head panel in the regularized variable
            if right:
                xj, wj = self._gj_right
                sig = (xj + 1.0) / 2.0
                hc = -(h * u)
                g = np.exp((a1 - 1.0) * _log_upper(
                    2.0 - hc[:, None] * sig[None, :]))
                head = -np.exp(a2 * _log_lower(hc)) * 2.0 ** (-a2) \
                    * (g @ wj)
            else:
                xj, wj = self._gj_left
                sig = (xj + 1.0) / 2.0
                hc = h * u
                g = np.exp((a2 - 1.0) * _log_lower(
                    1.0 - (-1.0 + hc[:, None] * sig[None, :])))
                head = np.exp(a1 * _log_upper(hc)) * 2.0 ** (-a1) * (g @ wj)
            total = head
            # fixed geometric tail panels
            start = w + h * u
            rem = z - start
            fr = (0.0, 1.0 / 7.0, 3.0 / 7.0, 1.0)
            for f0, f1 in zip(fr[:-1], fr[1:]):
                a_end = start + f0 * rem
                b_end = start + f1 * rem
                mid = 0.5 * (a_end + b_end)
                hlf = 0.5 * (b_end - a_end)
                pts = mid[:, None] + hlf[:, None] * _GL_X[None, :]
                lg = (a1 - 1.0) * _log_upper(pts + 1.0) \
                    + (a2 - 1.0) * _log_lower(1.0 - pts)
                total = total + hlf * (np.exp(lg) @ _GL_W)
            out[sel] = base_pt + self.C * total
        return out


def build_triangle_map(p1, p2, apex):
    """Construct the half-plane-to-triangle map for vertices (p1, p2, apex).

    The triangle must be non-degenerate and counter-clockwise, i.e. the apex
    lies strictly left of the directed base p1 -> p2.
    """
    return SCTriangleMap(p1, p2, apex)
