"""Second variation of energy, curvature line integrals and geodesic index.

The index machinery works along a sampled geodesic path.  Rotational symmetry
splits the perpendicular directions into two classes,

* in-slice: the plane is the 2-dimensional slice itself, whose curvature is
  sec_rad = -phi''/phi;
* fiber-orthogonal ((n-2) directions): the plane mixes the radial and
  tangential sectional values with weight w(t) = rdot(t)^2.

Along a meridian both classes coincide (w = 1), giving the single tangential
Jacobi equation psi'' + sec_rad(r(t)) psi = 0 with multiplicity n-1.

The index is computed two independent ways: counting interior conjugate
points of the Jacobi equation (JACOBI_ZEROS) and counting negative
eigenvalues of the discretized index form int (psi')^2 - K psi^2
(EIGEN_COUNT); the verify/acceptance suites require the two to agree.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigvalsh_tridiagonal

from .errors import DomainError
from .curvature import curvature_table

QUAD_TOL = 1e-9
JACOBI_ZERO_TOL = 1e-8

JACOBI_ZEROS = "JACOBI_ZEROS"
EIGEN_COUNT = "EIGEN_COUNT"

RICCI = "RICCI"
SEC_PERP = "SEC_PERP"


# ---------------------------------------------------------------------------
# quadrature


def quad_piecewise(f, a, b, breakpoints=(), tol=QUAD_TOL, n0=16, max_doublings=16):
    """Composite Simpson over [a, b], forced nodes at ``breakpoints``.

    Each smooth subinterval is refined by doubling until two successive
    Simpson values differ by less than ``tol``; ``f`` must accept arrays.
    """
    pts = sorted({float(a), float(b), *(p for p in breakpoints if a < p < b)})
    total = 0.0
    for lo, hi in zip(pts, pts[1:]):
        if hi - lo < 1e-15:
            continue
        n = n0
        prev = None
        for _ in range(max_doublings):
            x = np.linspace(lo, hi, n + 1)
            y = f(x)
            h = (hi - lo) / n
            s = h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())
            if prev is not None and abs(s - prev) < tol * 0.5:
                break
            prev = s
            n *= 2
        total += s
    return total


# ---------------------------------------------------------------------------
# test fields


@dataclass(frozen=True)
class TestField:
    """Piecewise-smooth variation field vanishing at both endpoints.

    The Berger shape is sin on the first quarter period, a unit plateau, and
    a mirrored quarter sine at the far end.
    """

    total_length: float

    @property
    def breakpoints(self):
        r = self.total_length
        return (0.0, math.pi / 2, r - math.pi / 2, r)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        r = self.total_length
        return np.where(t <= math.pi / 2, np.sin(t),
                        np.where(t < r - math.pi / 2, 1.0, -np.sin(t - r)))

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        r = self.total_length
        return np.where(t <= math.pi / 2, np.cos(t),
                        np.where(t < r - math.pi / 2, 0.0, -np.cos(t - r)))

    def __call__(self, t):
        return self.value(t)


def berger_test_field(r):
    """The sin / plateau / -sin field on [0, r]; requires r >= pi."""
    if r < math.pi - 1e-12:
        raise DomainError("Berger test field needs total length >= pi")
    return TestField(float(r))


def second_variation(K, psi, length=None, breakpoints=(), tol=QUAD_TOL):
    """int (psi')^2 - psi^2 K dt for a field vanishing at both ends.

    ``psi`` is a :class:`TestField` or a (value, derivative) pair of
    callables, in which case ``length`` is required.  ``K`` is the sectional
    curvature sampled along the geodesic, as a callable of arclength.
    """
    if isinstance(psi, TestField):
        val, der = psi.value, psi.derivative
        length = psi.total_length
        bps = set(psi.breakpoints)
    else:
        val, der = psi
        if length is None:
            raise DomainError("length is required for a user-supplied field")
        bps = set()
    bps.update(breakpoints)

    def f(t):
        return der(t) ** 2 - val(t) ** 2 * np.asarray(K(t), dtype=float)

    return quad_piecewise(f, 0.0, length, sorted(bps), tol=tol)


# ---------------------------------------------------------------------------
# curvature along a path


def _path_breakpoints(m, path, grid=2048):
    """Arclengths where the path crosses a profile junction (forced quad nodes)."""
    ts = np.linspace(0.0, path.length, grid + 1)
    r, _, _, _ = path.state(ts)
    r = np.asarray(r, dtype=float)
    out = set()
    for j in m.phi.junctions():
        d = r - j
        for i in np.nonzero(d[:-1] * d[1:] < 0)[0]:
            lo, hi = ts[i], ts[i + 1]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if (float(path.state(mid)[0]) - j) * d[i] > 0:
                    lo = mid
                else:
                    hi = mid
            out.add(0.5 * (lo + hi))
        # tangential crossings (the meridian touches a junction exactly)
        for i in np.nonzero(np.abs(d) < 1e-12)[0]:
            out.add(float(ts[i]))
    return sorted(out)


def path_curvature(m, path, kind=RICCI, direction="fiber"):
    """Curvature integrand along the path, as a vectorized callable of arclength.

    ``RICCI``: Ric(gdot, gdot) = a^2 ric_rr + (1 - a^2) ric_tt with a = rdot.
    ``SEC_PERP``: sec of the plane spanned by gdot and a perpendicular
    parallel field; ``direction`` picks the in-slice class (w = 1) or the
    fiber-orthogonal class (w = rdot^2).
    """
    if kind not in (RICCI, SEC_PERP):
        raise DomainError(f"unknown integrand {kind!r}")
    if direction not in ("slice", "fiber"):
        raise DomainError(f"unknown direction class {direction!r}")

    def K(t):
        scalar = np.isscalar(t)
        r, rd, _, _ = path.state(np.atleast_1d(np.asarray(t, dtype=float)))
        r = np.clip(np.atleast_1d(np.asarray(r, dtype=float)), 0.0, m.r_max)
        tab = curvature_table(m, r)
        a2 = np.clip(np.atleast_1d(np.asarray(rd, dtype=float)) ** 2, 0.0, 1.0)
        if kind == RICCI:
            out = a2 * tab["ric_rr"] + (1.0 - a2) * tab["ric_tt"]
        else:
            w = np.ones_like(a2) if direction == "slice" else a2
            out = w * tab["sec_rad"] + (1.0 - w) * tab["sec_tan"]
        return float(out[0]) if scalar else out

    return K


def line_integral(m, path, kind=RICCI, direction="fiber", tol=QUAD_TOL):
    """Composite quadrature of the chosen curvature along the path."""
    K = path_curvature(m, path, kind, direction)
    bps = _path_breakpoints(m, path)
    return quad_piecewise(K, 0.0, path.length, bps, tol=tol)


# ---------------------------------------------------------------------------
# Jacobi equation and index


def jacobi_conjugate_points(K, length, tol=JACOBI_ZERO_TOL, breakpoints=(),
                            rtol=1e-11, grid=4096):
    """Interior zeros of psi'' + K psi = 0, psi(0) = 0, psi'(0) = 1.

    Zeros are bracketed on a sample grid and refined by bisection of the
    dense solution; a zero within ``tol`` of the endpoint is excluded
    (Morse convention counts only interior conjugate points).
    """
    def rhs(t, y):
        return [y[1], -float(np.asarray(K(t)).reshape(-1)[0]) * y[0]]

    sol = solve_ivp(rhs, (0.0, length), [0.0, 1.0], method="DOP853",
                    rtol=rtol, atol=1e-13, dense_output=True,
                    max_step=length / 16.0)
    psi = lambda t: float(sol.sol(t)[0])
    ts = np.unique(np.concatenate([np.linspace(0.0, length, grid + 1),
                                   np.asarray(list(breakpoints), dtype=float)]))
    vals = sol.sol(ts)[0]
    zeros = []
    for i in np.nonzero(vals[:-1] * vals[1:] < 0)[0]:
        lo, hi = ts[i], ts[i + 1]
        while hi - lo > tol * 0.25:
            mid = 0.5 * (lo + hi)
            if psi(mid) * vals[i] > 0:
                lo = mid
            else:
                hi = mid
        zeros.append(0.5 * (lo + hi))
    return [z for z in zeros if tol < z < length - tol]


def eigen_index(K, length, n_nodes=1500):
    """Negative-eigenvalue count of the discretized form int (psi')^2 - K psi^2.

    Second-difference discretization with Dirichlet ends.  Eigenvalues within
    the O(h^2) discretization error of zero are not counted, matching the
    Morse convention for endpoint conjugate points.
    """
    h = length / (n_nodes + 1)
    t = np.linspace(h, length - h, n_nodes)
    Kv = np.asarray(K(t), dtype=float)
    diag = 2.0 / h**2 - Kv
    off = np.full(n_nodes - 1, -1.0 / h**2)
    cutoff = -10.0 * h**2 * max(1.0, float(np.max(np.abs(Kv))))
    ev = eigvalsh_tridiagonal(diag, off, select="v",
                              select_range=(-np.inf, 0.0))
    return int(np.count_nonzero(ev < cutoff))


@dataclass(frozen=True)
class IndexResult:
    conjugate_points: tuple
    multiplicity: int
    index: int
    method: str
    cross_check_agree: bool = True
    classes: dict = field(default_factory=dict)

    def to_dict(self, length=None):
        d = {"multiplicity": self.multiplicity,
             "conjugate_points": list(self.conjugate_points),
             "index": self.index,
             "method": self.method,
             "cross_check_agree": self.cross_check_agree}
        if length is not None:
            d["length"] = length
        return d

    def to_json(self, length=None):
        return json.dumps(self.to_dict(length), sort_keys=True)


def geodesic_index(m, path, n_nodes=1500):
    """Index of the path with Dirichlet ends, with the eigenvalue cross-check.

    Meridians use the single tangential Jacobi equation with multiplicity
    n-1; other paths are evaluated per perpendicular direction class.
    """
    bps = _path_breakpoints(m, path)
    if path.meridian or m.n == 2:
        classes = [("all", m.n - 1, "slice")]
    else:
        classes = [("slice", 1, "slice"), ("fiber", m.n - 2, "fiber")]

    conj, index_j, index_e, detail = [], 0, 0, {}
    for name, mult, direction in classes:
        K = path_curvature(m, path, SEC_PERP, direction)
        zeros = jacobi_conjugate_points(K, path.length, breakpoints=bps)
        ne = eigen_index(K, path.length, n_nodes=n_nodes)
        conj.extend(zeros)
        index_j += mult * len(zeros)
        index_e += mult * ne
        detail[name] = {"multiplicity": mult, "conjugate_points": zeros,
                        "negative_eigenvalues": ne}
    mult = classes[0][1] if len(classes) == 1 else 1
    return IndexResult(tuple(sorted(conj)), mult, index_j, JACOBI_ZEROS,
                       cross_check_agree=index_j == index_e, classes=detail)


# ---------------------------------------------------------------------------
# loop index (weighted sectional lower bound mechanism)


def loop_index_check(m, loop, eps=None):
    """Check the loop implication: length > pi/eps forces index >= n-1.

    The loop must be based at the pole, which must be a zero of the field
    (so the boundary term of int sec_X cancels and int sec_X = int sec per
    perpendicular parallel direction).
    """
    from .curvature import x_field_norm

    r_start = float(loop.state(0.0)[0])
    r_end = float(loop.state(loop.length)[0])
    if r_start > 1e-9 or r_end > 1e-9:
        raise DomainError("loop must start and end at the pole")
    if x_field_norm(m, 0.0) > 1e-12:
        raise DomainError("loop base point must be a zero of the field")
    if eps is None:
        eps = m.meta.get("eps")
    if eps is None or eps <= 0:
        raise DomainError("loop check needs a positive eps")

    threshold = math.pi / eps
    dirs = ["slice"] if (loop.meridian or m.n == 2) else ["slice", "fiber"]
    sec_integrals = {d: line_integral(m, loop, SEC_PERP, d) for d in dirs}
    res = geodesic_index(m, loop)
    applicable = loop.length > threshold
    satisfied = (not applicable) or res.index >= m.n - 1
    return {
        "length": loop.length,
        "threshold": threshold,
        "sec_integral_per_direction": sec_integrals,
        "index": res.index,
        "index_result": res,
        "applicable": applicable,
        "lemma_satisfied": satisfied,
        "status": "SATISFIED" if applicable and satisfied
                  else ("NOT_APPLICABLE" if not applicable else "VIOLATED"),
    }
