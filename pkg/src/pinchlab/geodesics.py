"""Geodesics of dr^2 + phi^2 g_{S^{n-1}} via the Clairaut reduction.

Rotational symmetry confines every geodesic to a totally geodesic
2-dimensional slice, so the state is (r, theta) with a single fiber angle and
the conserved Clairaut constant c = phi^2 theta_dot.  Shooting integrates the
full second-order system (without using the conservation laws), so the
Clairaut and unit-speed residuals are genuine diagnostics of integration
quality.

The distance search sweeps a fixed grid of launch angles (256 by default),
evaluates every geodesic class through the first-order form of the reduction
(arc integrals with a sqrt substitution at turning points, so the integrable
endpoint singularity is removed exactly), brackets each class/target crossing
and refines it by bracketed bisection (Brent).  Winning candidates are re-shot
through the ODE integrator to produce the returned paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import DomainError, IntegrationError, SearchError
from .profiles import CAP, DOUBLED_SPHERE

DEFAULT_SHOOT_TOL = 1e-12
DEFAULT_DISTANCE_TOL = 1e-6
DEFAULT_N_ANGLES = 256
_POLE = 1e-12
_TINY = 1e-300

_GL_CACHE = {}


def _leggauss(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _wrap_angle(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi


@dataclass
class GeodesicPath:
    """A unit-speed geodesic sampled along arclength."""

    clairaut_c: float
    samples: np.ndarray            # (N, 4) columns t, r, theta, rdot
    length: float
    clairaut_residual: float
    speed_residual: float
    meridian: bool
    thetadot: np.ndarray = field(repr=False, default=None)
    _state_fn: object = field(repr=False, default=None)
    _phi2: object = field(repr=False, default=None)

    def state(self, t):
        """(r, rdot, theta, thetadot) at arclength t."""
        return self._state_fn(t)

    @property
    def conservation_residuals(self):
        return (self.clairaut_residual, self.speed_residual)

    def dump_csv(self, out):
        close = False
        if isinstance(out, (str, bytes)):
            out, close = open(out, "w"), True
        try:
            out.write("t,r,theta,rdot,clairaut_residual,speed_residual\n")
            for (t, r, th, rd), td in zip(self.samples, self.thetadot):
                p2 = self._phi2(r)
                cres = abs(p2 * td - self.clairaut_c)
                sres = abs(rd * rd + p2 * td * td - 1.0)
                out.write(",".join(f"{v:.17g}" for v in (t, r, th, rd, cres, sres)))
                out.write("\n")
        finally:
            if close:
                out.close()


# ---------------------------------------------------------------------------
# shooting


def _meridian_state_fn(m, r0, d0, theta0):
    R = m.r_max
    doubled = m.topology == DOUBLED_SPHERE

    def state(t):
        x = r0 + d0 * np.asarray(t, dtype=float)
        if doubled:
            y = np.mod(x, 2.0 * R)
            r = np.where(y <= R, y, 2.0 * R - y)
            rd = np.where(y <= R, d0, -d0) * 1.0
            # each pole passage (x crossing a multiple of R) flips the meridian
            bounces = np.abs(np.floor(x / R) - math.floor(r0 / R)) if d0 > 0 \
                else np.abs(np.ceil(x / R) - math.ceil(r0 / R))
            th = theta0 + math.pi * bounces
        else:
            r = np.abs(x)
            rd = np.where(x >= 0, d0, -d0) * 1.0
            th = theta0 + math.pi * (x < 0)
        return r, rd, th, np.zeros_like(r)

    return state


def shoot(m, r0, alpha, T, tol=DEFAULT_SHOOT_TOL, theta0=0.0, n_samples=1025):
    """Integrate the geodesic launched from radius ``r0`` at angle ``alpha``
    (measured from the outward radial direction) for arclength ``T``."""
    if T <= 0:
        raise DomainError("arclength must be positive")
    sa, ca = math.sin(alpha), math.cos(alpha)
    if abs(sa) < 1e-15:
        sa = 0.0
    if r0 < _POLE and sa != 0.0:
        raise DomainError("non-meridian launch from the pole")
    if r0 < 0 or r0 > m.r_max + 1e-12:
        raise DomainError("launch radius outside the manifold domain")

    ts = np.linspace(0.0, T, n_samples)
    phi2 = lambda rr, m=m: float(m.phi(rr)) ** 2

    if sa == 0.0:
        d0 = 1.0 if ca >= 0 else -1.0
        if m.topology == CAP:
            top = r0 + T if d0 > 0 else T - r0
            if top > m.r_max:
                reached = (m.r_max - r0) if d0 > 0 else (r0 + m.r_max)
                raise IntegrationError("meridian leaves the configured cap domain",
                                       reached=reached)
        st = _meridian_state_fn(m, r0, d0, theta0)
        r, rd, th, td = st(ts)
        samples = np.column_stack([ts, r, th, rd])
        return GeodesicPath(0.0, samples, T, 0.0, 0.0, True, thetadot=td,
                            _state_fn=st, _phi2=phi2)

    phi0 = float(m.phi(r0))
    c = phi0 * sa
    y0 = [r0, ca, theta0, sa / phi0]

    phi_s = m.phi.scalar_fn(0)
    dphi_s = m.phi.scalar_fn(1)

    def rhs(t, y):
        r, rd, th, td = y
        p = phi_s(r)
        dp = dphi_s(r)
        return [rd, p * dp * td * td, td, -2.0 * dp / p * rd * td]

    events = None
    if m.topology == CAP:
        def leave(t, y):
            return m.r_max - y[0]
        leave.terminal = True
        events = [leave]

    sol = solve_ivp(rhs, (0.0, T), y0, method="DOP853", rtol=tol,
                    atol=tol * 1e-2, dense_output=True, events=events)
    if not sol.success:
        raise IntegrationError(f"geodesic integration failed: {sol.message}",
                               reached=float(sol.t[-1]))
    if sol.status == 1:
        raise IntegrationError("geodesic left the configured cap domain",
                               reached=float(sol.t_events[0][0]))

    r, rd, th, td = sol.sol(ts)
    phi = m.phi.eval(np.clip(r, 0.0, m.r_max))
    clair = float(np.max(np.abs(phi**2 * td - c)))
    speed = float(np.max(np.abs(rd**2 + phi**2 * td**2 - 1.0)))
    samples = np.column_stack([ts, r, th, rd])

    def st(t, sol=sol):
        y = sol.sol(t)
        return y[0], y[1], y[2], y[3]

    return GeodesicPath(c, samples, T, clair, speed, False, thetadot=td,
                        _state_fn=st, _phi2=phi2)


# ---------------------------------------------------------------------------
# first-order (quadrature) evaluation of candidate geodesics
#
# For a unit-speed geodesic with Clairaut constant c on a monotone-r arc,
#     dtheta/dr = c / (phi^2 sqrt(1 - c^2/phi^2)),   dt/dr = 1/sqrt(...).
# Every candidate reduces to the single primitive  up_to(c, r) = integral
# from the lower turning radius r_-(c) up to r (crossing the warping peak if
# needed), with the substitution r = r_* -/+ s^2 about turning points:
#     direct arc lo->hi  :  up_to(hi) - up_to(lo)
#     one turn down      :  up_to(r1) + up_to(r2)
#     one turn up        :  2 H - up_to(r1) - up_to(r2),   H = full half-swing


class _Geometry:
    """Unimodal-warping helper: turning radii and arc integrals."""

    def __init__(self, m):
        self.m = m
        self.doubled = m.topology == DOUBLED_SPHERE
        self.R = m.r_max
        half = m.L if self.doubled else m.r_max
        self.mid = half
        grid = np.linspace(0.0, half, 4097)
        dphi = m.phi.eval(grid, 1)
        if np.any(dphi < -1e-9):
            raise SearchError("distance search requires a unimodal warping profile")
        flat = np.nonzero(dphi <= 1e-13)[0]
        if flat.size and flat[0] == 0:
            raise SearchError("warping profile is flat at the pole")
        if flat.size:
            i = int(flat[0])
            lo, hi = grid[i - 1], grid[i]
            for _ in range(80):
                mm = 0.5 * (lo + hi)
                if float(m.phi(mm, 1)) > 1e-13:
                    lo = mm
                else:
                    hi = mm
            self.r_inc_end = hi
        else:
            self.r_inc_end = half
        self.c_max = float(m.phi(self.r_inc_end))
        js = set(m.phi.junctions())
        if self.doubled:
            js |= {2.0 * m.L - j for j in m.phi.junctions()}
        self.junctions = sorted(j for j in js if 0.0 < j < m.r_max)
        # monotone table of the increasing flank for turning-radius brackets
        self._tab_r = np.linspace(0.0, self.r_inc_end, 4097)
        self._tab_phi = m.phi.eval(self._tab_r)

    # -- turning radii ----------------------------------------------------

    def turn_lo(self, c):
        """Radius on the increasing flank where phi = c (scalar, accurate)."""
        i = int(np.searchsorted(self._tab_phi, c))
        i = min(max(i, 1), len(self._tab_r) - 1)
        lo, hi = self._tab_r[i - 1], self._tab_r[i]
        f = lambda r: float(self.m.phi(r)) - c
        flo, fhi = f(lo), f(hi)
        k = 1
        while flo * fhi > 0 and k < 8:
            lo = self._tab_r[max(i - 1 - k, 0)]
            hi = self._tab_r[min(i + k, len(self._tab_r) - 1)]
            flo, fhi = f(lo), f(hi)
            k += 1
        if flo == 0.0:
            rm = float(lo)
        else:
            rm = float(brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16))
        # Newton polish: brentq's absolute xtol is not enough relative
        # precision for pole-adjacent turning radii (rm ~ c), and the arc
        # integrals are sqrt-sensitive to relative errors in rm
        for _ in range(3):
            dp = float(self.m.phi(rm, 1))
            if dp <= 0.0:
                break
            step = (float(self.m.phi(rm)) - c) / dp
            if rm - step < 0.0:
                break
            rm -= step
            if abs(step) < 1e-17 * max(rm, 1e-300):
                break
        return rm

    def turn_lo_vec(self, c):
        lo = np.zeros_like(c)
        hi = np.full_like(c, self.r_inc_end)
        for _ in range(60):
            mm = 0.5 * (lo + hi)
            above = self.m.phi.eval(mm) > c
            hi = np.where(above, mm, hi)
            lo = np.where(above, lo, mm)
        rm = 0.5 * (lo + hi)
        for _ in range(3):
            dp = self.m.phi.eval(rm, 1)
            step = np.where(dp > 0.0, (self.m.phi.eval(rm) - c) / np.maximum(dp, 1e-300), 0.0)
            rm = np.where(rm - step >= 0.0, rm - step, rm)
        return rm

    # -- quadrature kernels -----------------------------------------------

    def _kernel_s(self, c, rstar, sgn, s):
        """Integrand pair (g_theta, g_t) at substituted nodes r = rstar + sgn s^2.

        Near the turning point the direct 1 - c^2/phi^2 is pure cancellation
        noise, so it is replaced there by the midpoint-derivative form
        q = sgn s^2 phi'(rstar + sgn s^2/2) (phi + c)/phi^2, which is exact to
        O(s^4) relative and keeps the substituted integrand smooth down to
        s = 0.
        """
        r = np.clip(rstar + sgn * s * s, 0.0, self.R)
        p = self.m.phi.eval(r)
        cb = np.broadcast_to(np.asarray(c, dtype=float), p.shape)
        q = 1.0 - (cb / p) ** 2
        small = q < 1e-10
        if np.any(small):
            rmid = np.clip(np.broadcast_to(rstar + sgn * s * s * 0.5, p.shape),
                           0.0, self.R)
            dp = self.m.phi.eval(rmid[small], 1)
            sb = np.broadcast_to(s, p.shape)
            q[small] = sgn * sb[small] ** 2 * dp \
                * (p[small] + cb[small]) / p[small] ** 2
        q = np.maximum(q, 1e-30)
        g = 1.0 / np.sqrt(q)
        return g * cb / p**2, g

    def _anchored(self, c, rstar, sgn, r_far, order=32):
        """(dtheta, dt) over radii between the turning point ``rstar`` and
        ``r_far`` under r = rstar + sgn s^2, scalar c.

        The panel adjacent to s = 0 is refined geometrically: the integrand
        lives on multiplicative s-scales (sqrt of the distance to a pole or
        of the flank slope), which uniform panels cannot resolve.  The depth
        adapts so the innermost panel resolves the turning layer.
        """
        s_top = math.sqrt(max(sgn * (r_far - rstar), 0.0))
        if s_top == 0.0:
            return 0.0, 0.0
        a, b = (rstar, r_far) if sgn > 0 else (r_far, rstar)
        pts = {s_top}
        for j in self.junctions:
            if a < j < b:
                pts.add(math.sqrt(sgn * (j - rstar)))
        knots = sorted(pts)
        # width-cap the outer panels
        edges = [knots[0]]
        for s1 in knots[1:]:
            k = max(1, int(math.ceil((s1 - edges[-1]) / 0.7)))
            edges.extend(np.linspace(edges[-1], s1, k + 1)[1:])
        # geometric refinement of [0, first edge]; depth covers the layer
        # scale sqrt(rstar) (pole-adjacent turns have rstar ~ c)
        layer = math.sqrt(max(min(rstar, self.R - rstar), 1e-28))
        levels = int(min(60, max(30, math.log2(max(edges[0], 1e-10) / layer) + 10)))
        geo = edges[0] * np.power(2.0, -np.arange(levels, 0, -1.0))
        E = np.concatenate([[0.0], geo, np.asarray(edges)])
        s0, s1 = E[:-1], E[1:]
        x, w = _leggauss(order)
        mid = 0.5 * (s0 + s1)[:, None]
        half = 0.5 * (s1 - s0)[:, None]
        s = mid + half * x
        wt = half * w * 2.0 * s
        gth, gt = self._kernel_s(c, rstar, sgn, s)
        return float((wt * gth).sum()), float((wt * gt).sum())

    # -- accurate scalar primitive ----------------------------------------

    def up_to(self, c, r, rm=None):
        """(dtheta, dt) from the lower turning radius r_-(c) to radius r."""
        if rm is None:
            rm = self.turn_lo(c)
        th, tt = self._anchored(c, rm, +1.0, min(r, self.mid))
        if self.doubled and r > self.mid + 1e-16:
            rp = self.R - rm
            ta, la = self._anchored(c, rp, -1.0, self.mid)
            tb, lb = self._anchored(c, rp, -1.0, r)
            th, tt = th + (ta - tb), tt + (la - lb)
        return th, tt

    def half_swing(self, c, rm=None):
        """(dtheta, dt) over a full swing r_-(c) -> r_+(c)."""
        if rm is None:
            rm = self.turn_lo(c)
        a = self._anchored(c, rm, +1.0, self.mid)
        b = self._anchored(c, self.R - rm, -1.0, self.mid)
        return a[0] + b[0], a[1] + b[1]

    def class_eval(self, cls, r1, r2, c):
        """(dtheta, length) of the class-``cls`` candidate, accurately."""
        rm = self.turn_lo(c)
        u1 = self.up_to(c, r1, rm=rm)
        u2 = self.up_to(c, r2, rm=rm)
        if cls == "direct":
            return abs(u2[0] - u1[0]), abs(u2[1] - u1[1])
        if cls == "turn_lo":
            return u1[0] + u2[0], u1[1] + u2[1]
        if cls == "turn_hi":
            h = self.half_swing(c, rm=rm)
            return 2 * h[0] - u1[0] - u2[0], 2 * h[1] - u1[1] - u2[1]
        raise ValueError(cls)

    # -- vectorized scan primitive (bracket-grade accuracy) ----------------

    _scan_template = None

    def _scan_nodes(self):
        """Fixed relative s-nodes/weights on [0, 1], geometric toward 0."""
        if self._scan_template is None:
            x, w = _leggauss(6)
            edges = np.concatenate([[0.0], np.power(2.0, -np.arange(14, -1, -1.0))])
            s, ws = [], []
            for s0, s1 in zip(edges, edges[1:]):
                s.append(0.5 * (s0 + s1) + 0.5 * (s1 - s0) * x)
                ws.append(0.5 * (s1 - s0) * w)
            self._scan_template = (np.concatenate(s), np.concatenate(ws))
        return self._scan_template

    def _anchored_vec(self, c, rstar, sgn, r_far):
        """Vectorized (dtheta, dt) between turning point and ``r_far``."""
        st, wt = self._scan_nodes()
        s_top = np.sqrt(np.maximum(sgn * (np.asarray(r_far) - rstar), 0.0))
        s = s_top[:, None] * st
        ww = s_top[:, None] * wt * 2.0 * s
        gth, gt = self._kernel_s(np.asarray(c)[:, None],
                                 np.asarray(rstar)[:, None], sgn, s)
        return (ww * gth).sum(axis=1), (ww * gt).sum(axis=1)

    def up_to_vec(self, c, rm, r):
        th, tt = self._anchored_vec(c, rm, +1.0, np.full_like(c, min(r, self.mid)))
        if self.doubled and r > self.mid + 1e-16:
            rp = self.R - rm
            ta, la = self._anchored_vec(c, rp, -1.0, np.full_like(c, self.mid))
            tb, lb = self._anchored_vec(c, rp, -1.0, np.full_like(c, r))
            th, tt = th + (ta - tb), tt + (la - lb)
        return th, tt

    def half_swing_vec(self, c, rm):
        ta, la = self._anchored_vec(c, rm, +1.0, np.full_like(c, self.mid))
        tb, lb = self._anchored_vec(c, self.R - rm, -1.0,
                                    np.full_like(c, self.mid))
        return ta + tb, la + lb


# ---------------------------------------------------------------------------
# distance


_GEOM_CACHE = {}


def _geometry(m):
    key = id(m)
    hit = _GEOM_CACHE.get(key)
    if hit is None or hit[0] is not m:
        if len(_GEOM_CACHE) > 32:
            _GEOM_CACHE.clear()
        _GEOM_CACHE[key] = hit = (m, _Geometry(m))
    return hit[1]


def _pole_kind(m, r):
    if r < _POLE:
        return "north"
    if m.topology == DOUBLED_SPHERE and abs(r - m.r_max) < _POLE:
        return "south"
    return None


def distance(m, p, q, n_angles=DEFAULT_N_ANGLES, tol=DEFAULT_DISTANCE_TOL,
             return_paths=True):
    """Distance between points (r, theta) and the realizing geodesics found.

    Pole queries reduce to meridians exactly.  General queries sweep the
    launch-angle grid, bracket every geodesic class that can hit the target
    angle and refine by bracketed bisection; all minimizers found within the
    angle-grid resolution are returned.
    """
    r1, th1 = float(p[0]), float(p[1])
    r2, th2 = float(q[0]), float(q[1])
    for r in (r1, r2):
        if r < -1e-12 or r > m.r_max + 1e-12:
            raise DomainError("point outside the manifold domain")
    r1, r2 = max(r1, 0.0), max(r2, 0.0)

    pk, qk = _pole_kind(m, r1), _pole_kind(m, r2)
    if pk or qk:
        if qk and not pk:
            r1, th1, r2, th2 = r2, th2, r1, th1
            pk, qk = qk, pk
        d = r2 if pk == "north" else m.r_max - r2
        if d < 1e-15:
            return 0.0, []
        if not return_paths:
            return d, []
        if pk == "north":
            path = shoot(m, 0.0, 0.0, d, theta0=th2)
        else:
            path = shoot(m, m.r_max, math.pi, d, theta0=th2)
        return d, [path]

    dtheta = abs(_wrap_angle(th2 - th1))
    geom = _geometry(m)
    cmax_pair = min(float(m.phi(r1)), float(m.phi(r2)),
                    geom.c_max * (1.0 - 1e-13))

    candidates = []   # (length, cls, c, target)

    if abs(r1 - r2) < 1e-12 and abs(float(m.phi(r1, 1))) < 1e-12 and dtheta > 0:
        candidates.append((float(m.phi(r1)) * dtheta, "parallel", None, dtheta))
    if dtheta < 1e-12 and abs(r1 - r2) > 0:
        candidates.append((abs(r1 - r2), "meridian", None, 0.0))
    if abs(dtheta - math.pi) < 1e-12:
        candidates.append((r1 + r2, "meridian_np", None, math.pi))
        if m.topology == DOUBLED_SPHERE:
            candidates.append((2.0 * m.r_max - r1 - r2, "meridian_sp", None,
                               math.pi))

    classes = ["direct", "turn_lo"]
    if m.topology == DOUBLED_SPHERE:
        classes.append("turn_hi")

    alphas = (np.arange(n_angles) + 0.5) * (math.pi / 2.0) / n_angles
    cgrid = cmax_pair * np.sin(alphas)
    # extra nodes approaching the grazing limit c -> cmax geometrically
    near = cmax_pair * (1.0 - np.power(10.0, -np.arange(2.0, 13.0)))
    cgrid = np.unique(np.concatenate([[cmax_pair * 1e-8], cgrid,
                                      near[near > cgrid[-1]]]))
    targets = [t for t in (dtheta, 2.0 * math.pi - dtheta)
               if 1e-12 < t < 2.0 * math.pi - 1e-12]

    rm = geom.turn_lo_vec(cgrid)
    sth1, stt1 = geom.up_to_vec(cgrid, rm, r1)
    sth2, stt2 = geom.up_to_vec(cgrid, rm, r2)
    # scan tables prepended with the exact meridian limits at c = 0
    cgrid0 = np.concatenate([[0.0], cgrid])
    scan = {
        "direct": (np.concatenate([[0.0], np.abs(sth2 - sth1)]),
                   np.concatenate([[abs(r2 - r1)], np.abs(stt2 - stt1)])),
        "turn_lo": (np.concatenate([[math.pi], sth1 + sth2]),
                    np.concatenate([[r1 + r2], stt1 + stt2])),
    }
    if m.topology == DOUBLED_SPHERE:
        hth, htt = geom.half_swing_vec(cgrid, rm)
        scan["turn_hi"] = (np.concatenate([[math.pi], 2.0 * hth - sth1 - sth2]),
                           np.concatenate([[2.0 * m.r_max - r1 - r2],
                                           2.0 * htt - stt1 - stt2]))

    brackets = []
    for cls in classes:
        fvals, tvals = scan[cls]
        for target in targets:
            fv = fvals - target
            for i in np.nonzero(fv[:-1] * fv[1:] <= 0)[0]:
                if fv[i] == 0.0 and fv[i + 1] == 0.0:
                    continue
                approx = min(tvals[i], tvals[i + 1])
                brackets.append((float(approx), cls, target, int(i)))

    # refine cheapest-first; stop once a bracket cannot beat the best length
    brackets.sort()
    best = min((cand[0] for cand in candidates), default=math.inf)
    for approx, cls, target, i in brackets:
        if approx > best + 0.1:
            break
        c_star = _refine(geom, cls, r1, r2, target, cgrid0, int(i))
        if c_star is None:
            continue
        length = geom.class_eval(cls, r1, r2, c_star)[1]
        best = min(best, length)
        candidates.append((length, cls, c_star, target))

    if not candidates:
        raise SearchError("no geodesic candidate found between the given points")

    candidates.sort(key=lambda t: t[0])
    d = candidates[0][0]
    winners, seen = [], set()
    for cand in candidates:
        if cand[0] > d + tol:
            break
        key = round(cand[0] / tol)
        if key in seen:
            continue
        seen.add(key)
        winners.append(cand)
    if not return_paths:
        return d, []
    paths = []
    for length, cls, c, target in winners:
        path = _materialize(m, cls, c, r1, th1, r2, th2, length, target)
        if path is not None:
            paths.append(path)
    return d, paths


def _refine(geom, cls, r1, r2, target, cgrid, i):
    f = lambda c: geom.class_eval(cls, r1, r2, c)[0] - target
    lo, hi = cgrid[i], cgrid[i + 1]
    if lo == 0.0:
        # the c = 0 row holds the analytic meridian limit; quadrature needs
        # a strictly positive Clairaut constant
        lo = hi * 1e-6
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        # the scan is low-order; allow the bracket to shift by one cell
        lo = cgrid[max(i - 1, 1)]
        hi = cgrid[min(i + 2, len(cgrid) - 1)]
        flo, fhi = f(lo), f(hi)
        if flo * fhi > 0:
            return None
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    try:
        c_star = float(brentq(f, lo, hi, xtol=1e-13, rtol=8.9e-16, maxiter=200))
    except ValueError:
        return None
    # reject pseudo-roots where f merely jumps through zero
    if abs(f(c_star)) > 1e-5 * max(1.0, target):
        return None
    return c_star


def _materialize(m, cls, c, r1, th1, r2, th2, length, target):
    """Re-shoot a winning candidate through the ODE integrator."""
    raw = _wrap_angle(th2 - th1)
    sgn_th = 1.0 if abs(raw - target) <= abs(raw + target) else -1.0
    if cls == "parallel":
        alpha = sgn_th * math.pi / 2.0
        return shoot(m, r1, alpha, length, theta0=th1)
    if cls in ("meridian", "meridian_np", "meridian_sp"):
        if cls == "meridian":
            alpha = 0.0 if r2 >= r1 else math.pi
        elif cls == "meridian_np":
            alpha = math.pi
        else:
            alpha = 0.0
        return shoot(m, r1, alpha, length, theta0=th1)
    sa = min(c / float(m.phi(r1)), 1.0)
    up = r2 >= r1 if cls == "direct" else cls == "turn_hi"
    alpha = math.asin(sa) if up else math.pi - math.asin(sa)
    if sgn_th < 0:
        alpha = -alpha
    try:
        return shoot(m, r1, alpha, length, theta0=th1)
    except IntegrationError:
        return None


# ---------------------------------------------------------------------------
# injectivity radius and farthest point


def inj_at_pole(m, tol=1e-8):
    """First conjugate distance along a meridian from the pole.

    The tangential Jacobi field from a rotational pole is proportional to the
    (doubled) warping profile, so this is its first positive zero; since all
    geodesics from the pole are meridians, it equals the injectivity radius.
    """
    if m.topology == CAP:
        return math.inf
    R = m.r_max

    def h(t):
        # odd continuation of the warping profile past the far pole
        return float(m.phi(t)) if t <= R else -float(m.phi(2.0 * R - t))

    grid = np.linspace(1e-6, R + 0.25, 4097)
    vals = np.array([h(t) for t in grid])
    neg = np.nonzero(vals <= 0)[0]
    if not neg.size:
        raise SearchError("no conjugate point found along the meridian")
    i = int(neg[0])
    lo, hi = grid[i - 1], grid[i]
    while hi - lo > tol * 0.5:
        mid = 0.5 * (lo + hi)
        if h(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def farthest_from_pole(m, grid_size=4096):
    """((r, theta), arclength) of the point maximizing distance from the pole."""
    if m.topology == CAP:
        raise DomainError("no farthest point on a complete non-compact cap")
    R = m.r_max
    rs = np.linspace(0.0, R, grid_size + 1)
    # distance from the pole along meridians (exp is injective up to 2L)
    dist = np.minimum(rs, 2.0 * R - rs)
    i = int(np.argmax(dist))
    return (float(rs[i]), 0.0), float(dist[i])
