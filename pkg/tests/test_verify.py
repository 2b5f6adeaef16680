import math

import numpy as np
import pytest

from pinchlab import (DomainError, INFEASIBLE, build_model, critical_radius,
                      criticality_certificate, diameter_gap,
                      inj_gap_hypothesis, klingenberg_delta_search,
                      verify_pinch, verify_quadratic_growth)
from pinchlab.verify import make_report, pinch_report_doc


# -- pinch verification -----------------------------------------------------


def test_gaussian_pinch_passes(gaussian3):
    rep = verify_pinch(gaussian3, "RICCI", eps=0.5, grid_size=2000)
    assert rep.passed
    assert rep.achieved_lower == pytest.approx(1.0, abs=1e-12)
    assert rep.achieved_upper == pytest.approx(0.0, abs=1e-12)
    assert rep.violations == ()


def test_family_pinch_passes(family10):
    rep = verify_pinch(family10, grid_size=5000)
    assert rep.passed
    assert rep.achieved_lower >= 7.2 - 1e-6
    delta = family10.meta["delta"]
    assert rep.achieved_upper <= 9.0 * (1.0 + 5.0 * delta**2)
    assert rep.tol_lower == 1e-6
    assert rep.tol_upper == pytest.approx(9.0 * 5.0 * delta**2)


def test_family_sec_mode_pinch_measures_cylinder_zero(family10_sec):
    # the family only has the radial weighted bound; planes not containing
    # the radial direction as first argument drop to 0 on the cylinder, and
    # the verifier reports that rather than hiding it
    rep = verify_pinch(family10_sec, "SEC", grid_size=5000)
    assert not rep.passed
    assert rep.achieved_lower == pytest.approx(0.0, abs=1e-12)
    assert any(v["quantity"] in ("wsec_Tr", "wsec_TT") and v["r"] > math.pi / 2
               for v in rep.violations)


def test_round_sphere_sec_pinch_passes(sphere3):
    rep = verify_pinch(sphere3, "SEC", eps=1.0, grid_size=2000)
    assert rep.passed
    # sec_tan carries ~1e-11 of 0/0 cancellation noise close to the poles
    assert rep.achieved_lower == pytest.approx(1.0, abs=1e-10)
    assert rep.achieved_upper == pytest.approx(1.0, abs=1e-10)


def test_family_range_discrepancy_fails():
    # the cylinder violates the lower bound for eps near the stated range cap
    m = build_model("family", 3, 0.9, 0.02)
    rep = verify_pinch(m, grid_size=5000)
    assert not rep.passed
    assert rep.violations
    v = [x for x in rep.violations if x["quantity"] == "bakry_tt"
         and x["r"] > math.pi / 2 - 1e-9]
    assert v
    A = m.meta["A"]
    assert v[0]["value"] == pytest.approx(1.0 / A**2, abs=1e-6)


def test_pinch_grid_size_validated(gaussian3):
    with pytest.raises(DomainError):
        verify_pinch(gaussian3, grid_size=50)


def test_round_sphere_divergence_consistency(sphere3):
    # on a compact model the achieved lower bound never exceeds 1 + tol
    rep = verify_pinch(sphere3, eps=1.0, grid_size=2000)
    assert rep.passed
    assert rep.achieved_lower / 2.0 <= 1.0 + 1e-6   # per-eigenvalue scale n-1


# -- criticality ------------------------------------------------------------


def test_critical_radius_values(gaussian3, family10):
    assert critical_radius(family10) == pytest.approx(math.pi / 0.8, abs=1e-12)
    assert critical_radius(gaussian3, 0.0, eps=0.5) \
        == pytest.approx(2 * math.pi, abs=1e-12)


def test_critical_radius_requires_positive_eps(sphere3):
    with pytest.raises(DomainError):
        critical_radius(sphere3, eps=-1.0)


def test_gaussian_certificate_noncritical(gaussian3):
    cert = criticality_certificate(gaussian3, (0.0, 0.0), (5.0, 0.0), eps=0.5)
    assert cert.min_inner == pytest.approx(5.0, abs=1e-9)
    assert cert.noncritical


def test_family_far_pole_certificate(family10):
    q = (family10.r_max, 0.0)
    cert = criticality_certificate(family10, (0.0, 0.0), q)
    assert cert.min_inner == pytest.approx(0.0, abs=1e-12)
    assert not cert.noncritical
    expected = -9 * math.pi + 9 * 0.8 * 2 * family10.L
    assert cert.xnorm_lower == pytest.approx(expected, abs=1e-9)
    assert cert.xnorm_lower <= 0.0


def test_sphere_zero_field_certificate(sphere3):
    cert = criticality_certificate(sphere3, (1.0, 0.0), (2.0, 1.0), eps=1.0)
    assert cert.min_inner == pytest.approx(0.0, abs=1e-12)
    assert not cert.noncritical


def test_certificate_residual_and_soundness_sampled(gaussian3, family10):
    rng = np.random.default_rng(11)
    # residual: g(X(q), gdot) >= bound on minimal geodesics
    for _ in range(50):
        q = (rng.uniform(0.2, 40.0), rng.uniform(-math.pi, math.pi))
        cert = criticality_certificate(gaussian3, (0.0, 0.0), q, eps=0.5)
        assert cert.min_inner - cert.xnorm_lower >= -1e-6
        if cert.dist > cert.threshold:
            assert cert.noncritical
    for _ in range(20):
        q = (rng.uniform(0.2, family10.r_max - 0.2),
             rng.uniform(-math.pi, math.pi))
        cert = criticality_certificate(family10, (0.0, 0.0), q)
        assert cert.min_inner - cert.xnorm_lower >= -1e-6


def test_gaussian_xnorm_lower_unbounded(gaussian3):
    # the certificate lower bound grows without bound along a radial ray
    eps = 0.5
    rs = np.linspace(2 * math.pi + 0.1, 50.0, 40)
    vals = [criticality_certificate(gaussian3, (0.0, 0.0), (r, 0.0),
                                    eps=eps).xnorm_lower for r in rs]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 10.0


# -- gap theorems -----------------------------------------------------------


def test_family_diameter_gap(family10):
    gap = diameter_gap(family10)
    assert gap.farthest == pytest.approx(3.866991, abs=1e-6)
    assert gap.zero_bound == pytest.approx(2 * math.pi / 0.8, abs=1e-12)
    assert gap.diameter_ok
    assert gap.berger_check


def test_round_sphere_diameter_gap(sphere3):
    gap = diameter_gap(sphere3, eps=1.0)
    assert gap.farthest == pytest.approx(math.pi, abs=1e-6)
    assert gap.farthest <= 2 * math.pi
    assert gap.diameter_ok


def test_diameter_gap_needs_compact(gaussian3):
    with pytest.raises(DomainError):
        diameter_gap(gaussian3)


def test_gap_ratio_delta_sweep():
    for delta in (0.08, 0.04, 0.02):
        m = build_model("family", 10, 0.8, delta)
        gap = diameter_gap(m)
        ratio = gap.farthest / gap.zero_bound
        assert abs(ratio - 0.5) <= 0.05


def test_inj_gap_hypothesis(family10, sphere3):
    rep = inj_gap_hypothesis(family10)
    assert rep["inj_p"] == pytest.approx(3.866991, abs=1e-6)
    assert rep["threshold"] == pytest.approx(math.pi / 0.8, abs=1e-12)
    assert not rep["hypothesis_met"]
    rep = inj_gap_hypothesis(sphere3, eps=1.0)
    assert rep["hypothesis_met"]
    assert rep["boundary_case"]


def test_inj_threshold_ratio_tends_to_one():
    ratios = []
    for delta in (0.08, 0.04, 0.02, 0.01):
        m = build_model("family", 10, 0.8, delta)
        rep = inj_gap_hypothesis(m)
        ratios.append(rep["inj_p"] / rep["threshold"])
    assert all(b > a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] < 1.0
    assert ratios[-1] > 0.98


# -- quadratic growth -------------------------------------------------------


def test_gaussian_growth(gaussian3):
    rep = verify_quadratic_growth(gaussian3, t_max=50.0, eps=0.5)
    assert rep["pass"]
    # spot value of the bound at t = 10
    t = 10.0
    bound = -(2 * math.pi) * t + 0.5 * 2 * 0.5 * t**2
    assert bound == pytest.approx(50 - 20 * math.pi, abs=1e-12)
    assert bound <= 0.5 * t**2


def test_family_growth(family10):
    rep = verify_quadratic_growth(family10)
    assert rep["pass"]


# -- Klingenberg delta search -----------------------------------------------


def test_klingenberg_family(family10):
    res = klingenberg_delta_search(family10, l=3.0)
    assert res != INFEASIBLE
    assert res["delta_max"] == pytest.approx(math.pi / 10, abs=1e-6)
    assert res["binding"] == "field_bound"
    assert res["delta"] == pytest.approx(res["delta_max"] / 2)
    assert all(v >= 0 for v in res["margins"].values())


def test_klingenberg_loop_length_binds(family10):
    res = klingenberg_delta_search(family10, l=2 * math.pi - 0.3)
    assert res["binding"] == "loop_length"
    assert res["delta_max"] == pytest.approx(0.1, abs=1e-12)


def test_klingenberg_infeasible_at_half(family10):
    assert klingenberg_delta_search(family10, eps=0.5, l=3.0) == INFEASIBLE


def test_klingenberg_needs_zero_at_pole(gaussian3):
    m = build_model("round_sphere", 3)
    res = klingenberg_delta_search(m, eps=0.9, l=3.0)
    assert res != INFEASIBLE   # X = 0 everywhere, N(delta) = 0


# -- report schema ----------------------------------------------------------


def test_report_schema(family10):
    rep = verify_pinch(family10, grid_size=1000)
    doc = pinch_report_doc(family10, rep)
    assert set(doc) == {"suite", "model", "params", "pass", "margins",
                        "violations", "resolution", "tolerances"}
    assert doc["pass"] is True
    assert doc["model"]["n"] == 10
    doc2 = make_report("x", family10, {}, False, {}, [{"r": 1.0,
                                                       "quantity": "q",
                                                       "value": 0.0,
                                                       "bound": 1.0}])
    assert doc2["violations"][0]["quantity"] == "q"
