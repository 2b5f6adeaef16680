"""Closed-form curvature of dr^2 + phi^2 g_{S^{n-1}} with a radial potential.

For the rotationally symmetric metric the curvature tensor is determined by
two sectional values,

    sec_rad = -phi''/phi          (planes containing the radial direction)
    sec_tan = (1 - phi'^2)/phi^2  (planes tangent to the fiber sphere)

from which the Ricci eigenvalues, the Bakry-Emery eigenvalues and the three
weighted plane values follow.  Everything here is a pure function of an
immutable manifold, vectorized over radius arrays.

Mode separation: the Bakry-Emery quantities (``bakry_*``) always use the
unscaled potential, while the weighted sectional quantities (``wsec_*``) and
the field norm apply the manifold's ``potential_scale``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, fields

import numpy as np

from .errors import DomainError
from .profiles import LINEAR, SINE

POLE_TOL = 1e-6

CSV_COLUMNS = ("r", "phi", "dphi", "ddphi", "f", "df", "ddf",
               "sec_rad", "sec_tan", "ric_rr", "ric_tt",
               "bakry_rr", "bakry_tt", "wsec_rT", "wsec_Tr", "wsec_TT", "xnorm")


@dataclass(frozen=True)
class CurvatureSample:
    r: float
    phi: float
    dphi: float
    ddphi: float
    f: float
    df: float
    ddf: float
    sec_rad: float
    sec_tan: float
    ric_rr: float
    ric_tt: float
    bakry_rr: float
    bakry_tt: float
    wsec_rT: float
    wsec_Tr: float
    wsec_TT: float
    xnorm: float


assert tuple(f.name for f in fields(CurvatureSample)) == CSV_COLUMNS


def _pole_segment(m, at_far_pole):
    """The analytic cap segment governing the pole limit, or None."""
    seg = m.phi.segments[0]
    return seg if seg.kind in (SINE, LINEAR) else None


def curvature_table(m, r):
    """All 17 curvature columns at radii ``r`` (array), as a dict of arrays.

    At an analytic pole (SINE or LINEAR cap) the 0/0 ratios are replaced by
    their closed-form limits; a non-analytic pole raises DomainError.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    n = m.n
    s = m.potential_scale

    phi = m.phi.eval(r, 0)
    dphi = m.phi.eval(r, 1)
    ddphi = m.phi.eval(r, 2)
    fv = m.f.eval(r, 0)
    df = m.f.eval(r, 1)
    ddf = m.f.eval(r, 2)

    # distance to the nearest pole of the profile
    pole_dist = np.minimum(r, m.r_max - r) if m.topology == "DOUBLED_SPHERE" else r
    at_pole = pole_dist < POLE_TOL
    if np.any(at_pole):
        seg = _pole_segment(m, False)
        if seg is None:
            raise DomainError("curvature at a non-analytic pole")
        sec_rad_pole = 1.0 if seg.kind == SINE else 0.0
        sec_tan_pole = sec_rad_pole

    safe_phi = np.where(at_pole, 1.0, phi)
    sec_rad = -ddphi / safe_phi
    sec_tan = (1.0 - dphi**2) / safe_phi**2
    ratio = df * dphi / safe_phi          # f' phi'/phi, limit f'' at the pole
    if np.any(at_pole):
        sec_rad = np.where(at_pole, sec_rad_pole, sec_rad)
        sec_tan = np.where(at_pole, sec_tan_pole, sec_tan)
        ratio = np.where(at_pole, ddf, ratio)

    ric_rr = (n - 1) * sec_rad
    ric_tt = sec_rad + (n - 2) * sec_tan
    bakry_rr = ric_rr + ddf
    bakry_tt = ric_tt + ratio
    wsec_rT = sec_rad + s * ddf
    wsec_Tr = sec_rad + s * ratio
    wsec_TT = sec_tan + s * ratio
    xnorm = s * np.abs(df)

    return {
        "r": r, "phi": phi, "dphi": dphi, "ddphi": ddphi,
        "f": fv, "df": df, "ddf": ddf,
        "sec_rad": sec_rad, "sec_tan": sec_tan,
        "ric_rr": ric_rr, "ric_tt": ric_tt,
        "bakry_rr": bakry_rr, "bakry_tt": bakry_tt,
        "wsec_rT": wsec_rT, "wsec_Tr": wsec_Tr, "wsec_TT": wsec_TT,
        "xnorm": xnorm,
    }


def curvature_sample(m, r):
    """All curvature quantities at a single radius."""
    t = curvature_table(m, float(r))
    return CurvatureSample(**{k: float(v[0]) for k, v in t.items()})


def sec_plane(m, r, w):
    """Sectional curvature of a plane with radial-wedge weight ``w`` in [0, 1]."""
    w = np.asarray(w, dtype=float)
    if np.any(w < 0) or np.any(w > 1):
        raise DomainError("plane weight must lie in [0, 1]")
    t = curvature_table(m, r)
    out = w * t["sec_rad"] + (1.0 - w) * t["sec_tan"]
    return float(out[0]) if out.size == 1 else out


def x_field_norm(m, r):
    """|X| = potential_scale * |f'(r)|."""
    t = curvature_table(m, r)
    out = t["xnorm"]
    return float(out[0]) if np.isscalar(r) else out


def dump_csv(m, r, out):
    """17-column full-precision CSV (header mandatory) at radii ``r``."""
    t = curvature_table(m, r)
    close = False
    if isinstance(out, (str, bytes)):
        out, close = open(out, "w"), True
    try:
        out.write(",".join(CSV_COLUMNS) + "\n")
        cols = [t[c] for c in CSV_COLUMNS]
        for row in zip(*cols):
            out.write(",".join(f"{v:.17g}" for v in row) + "\n")
    finally:
        if close:
            out.close()


def csv_string(m, r):
    buf = io.StringIO()
    dump_csv(m, r, buf)
    return buf.getvalue()
