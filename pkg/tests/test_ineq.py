import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperlab import geom, ineq
from hyperlab import measure as ms
from hyperlab.ambient import UnsupportedAmbient, product, space_form
from hyperlab.ambient import sc as S_c

NORTH = np.array([1.0, 0.0, 0.0])


def whole(ch):
    return ms.whole(ch)


# -- reports ----------------------------------------------------------------------------


def test_report_margin_and_equality():
    rep = ineq.Report.build("x", 1.0, 1.0005)
    assert rep.margin == pytest.approx(5e-4) and rep.equality and not rep.violated()
    bad = ineq.Report.build("x", 2.0, 1.0)
    assert bad.violated() and not bad.equality and bad.relative_margin == pytest.approx(-1 / 3)


def test_report_to_dict_drops_related():
    rep = ineq.Report.build("x", 0.0, 1.0)
    rep.related.append(ineq.Report.build("y", 0.0, 1.0))
    assert "related" not in rep.to_dict() and len(rep.all()) == 2


# -- divergence identity ---------------------------------------------------------------


@pytest.mark.parametrize("name", ["plane", "sphere", "cylinder", "graph"])
def test_identity_trace_is_m(name):
    res, data = ineq.divergence_identity_check(geom.catalog(name))
    assert res <= 1e-6
    assert np.allclose(data["trace"], 2.0, atol=1e-6)


def test_newton_trace_on_sphere():
    res, data = ineq.divergence_identity_check(geom.sphere(), "P1")
    assert res <= 1e-6 and np.allclose(data["trace"], 2.0, atol=1e-6)


def test_random_symmetric_operator_on_cylinder():
    B = np.random.default_rng(3).normal(size=(2, 2))
    res, _ = ineq.divergence_identity_check(geom.cylinder(), B + B.T)
    assert res <= 1e-6


@pytest.mark.parametrize("c", [-1.0, 1.0])
def test_curved_support_field(c):
    res, _ = ineq.divergence_identity_check(geom.geodesic_sphere(0.7, c), "identity")
    assert res <= 1e-6


def test_non_symmetric_operator_rejected():
    with pytest.raises(ValueError):
        ineq.divergence_identity_check(geom.sphere(), np.array([[1.0, 1.0], [0.0, 1.0]]))


# -- Poincare inequality in space forms ---------------------------------------------------


@pytest.mark.parametrize("r", [0, 1])
def test_geodesic_sphere_equality(r):
    ch = geom.geodesic_sphere(1.0, 0.0)
    rep = ineq.poincare_spaceform(ch, whole(ch), r)
    hr = rep.related[0]  # H_r form: int H_r = 4 pi = S_0(1) int H_{r+1}
    assert hr.lhs == pytest.approx(4 * math.pi, rel=1e-6)
    assert hr.rhs == pytest.approx(4 * math.pi, rel=1e-6)
    assert rep.equality and hr.equality and hr.flags["applicable"]


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("c", [0.0, -1.0])
@pytest.mark.parametrize("m", [2, 3])
def test_equality_on_geodesic_spheres(R, c, m):
    ch = geom.geodesic_sphere(R, c, m=m)
    region = whole(ch)
    for r in range(m):
        rep = ineq.poincare_spaceform(ch, region, r)
        assert abs(rep.lhs / rep.rhs - 1) <= 1e-3, (r, rep.lhs, rep.rhs)


def test_ramp_on_hemisphere_is_strict():
    ch = geom.sphere()
    hemi = ms.intrinsic_ball(ch, NORTH, math.pi / 2)
    rep = ineq.poincare_spaceform(ch, hemi, 0, u=ms.Ramp(hemi, 0.1))
    assert rep.margin > 0 and not rep.equality


def test_hr_form_flagged_by_positivity():
    ch = geom.graph("x0**2 - x1**2")  # saddle: P_1 changes sign
    rep = ineq.poincare_spaceform(ch, whole(ch), 1)
    hr = rep.related[0]
    assert hr.inequality_id == "poincare-hr(r=1)"
    assert hr.flags["applicable"] is False and not rep.flags["P_r nonneg on samples"]


def test_curvature_mismatch_rejected():
    ch = geom.sphere()
    with pytest.raises(ValueError):
        ineq.poincare_spaceform(ch, whole(ch), 0, c=-1.0)


def test_order_out_of_range():
    ch = geom.sphere()
    with pytest.raises(ValueError):
        ineq.poincare_spaceform(ch, whole(ch), 2)


def test_catalog_margins_nonnegative():
    cases = [
        (geom.sphere(), ms.intrinsic_ball(geom.sphere(), NORTH, 1.0)),
        (geom.cylinder(), ms.intrinsic_ball(geom.cylinder(), [0.0, 0.0], 0.8)),
        (geom.plane(), ms.intrinsic_ball(geom.plane(), np.zeros(2), 0.6)),
    ]
    for ch, reg in cases:
        for r in range(2):
            for u in (None, ms.Ramp(reg, 0.2)):
                rep = ineq.poincare_spaceform(ch, reg, r, u=u)
                assert rep.flags["u compactly supported"] == (u is not None)
                for x in rep.all():
                    assert not (x.violated() and x.flags["applicable"]), x


def scaled_paraboloid(s):
    u, v = sp.symbols("u v", real=True)
    S = sp.Float(s)
    ch = geom.from_sympy("paraboloid", (u, v), [S * u, S * v, S * (u**2 + v**2 / 2)], 0.0, [-1, -1], [1, 1])
    return geom.orient_toward(ch, [0.0, 0.0], [0.0, 0.0, 10.0 * s])


@settings(max_examples=8, deadline=None)
@given(st.floats(0.25, 4.0))
def test_scale_covariance(s):
    base, big = scaled_paraboloid(1.0), scaled_paraboloid(s)
    for r in (0, 1):
        a = ineq.poincare_spaceform(base, whole(base), r).related[0]
        b = ineq.poincare_spaceform(big, whole(big), r).related[0]
        assert b.lhs / b.rhs == pytest.approx(a.lhs / a.rhs, rel=1e-9)
        assert b.lhs == pytest.approx(s ** (2 - r) * a.lhs, rel=1e-9)


# -- isoperimetric chain ---------------------------------------------------------------------


def test_iso_hemisphere():
    ch = geom.sphere()
    rep = ineq.iso_chain(ch, ms.intrinsic_ball(ch, NORTH, math.pi / 2), 0)
    assert rep.lhs == pytest.approx(2 * math.pi, abs=1e-6)
    assert rep.rhs == pytest.approx(4 * math.pi, abs=1e-5)


def test_iso_cap():
    ch = geom.sphere()
    th = math.pi / 4
    rep = ineq.iso_chain(ch, ms.intrinsic_ball(ch, NORTH, th), 0)
    assert rep.lhs == pytest.approx(2 * math.pi * (1 - math.cos(th)), abs=1e-6)
    assert rep.rhs == pytest.approx(math.sin(th) * (2 * math.pi * math.sin(th) + 2 * math.pi * (1 - math.cos(th))),
                                    abs=1e-5)


def test_iso_flat_disk():
    ch = geom.plane()
    rep = ineq.iso_chain(ch, ms.intrinsic_ball(ch, np.zeros(2), 1.0), 0)
    assert rep.lhs == pytest.approx(math.pi, abs=1e-6)
    assert rep.rhs == pytest.approx(2 * math.pi, abs=1e-6)


def test_iso_related_forms():
    ch = geom.sphere()
    rep = ineq.iso_chain(ch, ms.intrinsic_ball(ch, NORTH, 1.0), 1)
    ids = [r.inequality_id for r in rep.all()]
    assert ids == ["iso-chain(r=1)", "iso-chain(r=0)", "iso-scal(r=1)"]
    assert not any(r.violated() for r in rep.all())


def test_iso_closed_surface_has_empty_boundary():
    ch = geom.sphere()
    rep = ineq.iso_chain(ch, whole(ch), 0)
    assert rep.flags["empty-boundary"]


# -- ball volumes --------------------------------------------------------------------------


@pytest.mark.parametrize("R", [0.3, 1.0])
def test_ball_plane(R):
    rep = ineq.ball_volume_bounds(geom.plane(extent=2.0), np.zeros(2), R)
    assert rep.lhs == pytest.approx(math.pi, abs=1e-6)
    assert rep.rhs == pytest.approx(2 * math.pi, abs=1e-6)


def test_ball_unit_sphere():
    R = math.pi / 2
    rep = ineq.ball_volume_bounds(geom.sphere(), NORTH, R)
    assert rep.lhs == pytest.approx(2 * math.pi / R**2, abs=1e-6)
    assert rep.details["max|A|"] == pytest.approx(math.sqrt(2))
    assert all(r.margin > 0 for r in rep.all())


def test_ball_cylinder_alpha():
    rep = ineq.ball_volume_bounds(geom.cylinder(), [0.0, 0.0], 0.5)
    alpha = [r for r in rep.all() if r.inequality_id == "ball-alpha"]
    assert rep.details["alpha"] == pytest.approx(0.5)
    assert alpha and alpha[0].margin > 0
    assert alpha[0].lhs == pytest.approx(math.pi, rel=1e-6)
    assert alpha[0].rhs == pytest.approx(2 * math.pi / 0.5, rel=1e-6)


def test_ball_truncation_flag():
    rep = ineq.ball_volume_bounds(geom.sphere(), NORTH, 4.0)
    assert rep.flags["truncated"]


# -- Einstein ambients -------------------------------------------------------------------


def test_flat_einstein_matches_spaceform():
    ch = geom.sphere()
    reg = ms.intrinsic_ball(ch, NORTH, 1.0)
    a = ineq.poincare_einstein(reg, space_form(0.0, 2))
    b = ineq.poincare_spaceform(ch, reg, 1)
    assert a.lhs == pytest.approx(b.lhs, rel=1e-10)
    assert a.rhs == pytest.approx(b.rhs, rel=1e-10)


def test_einstein_geodesic_sphere_equality():
    ch = geom.geodesic_sphere(1.0, 0.0)
    rep = ineq.poincare_einstein(whole(ch), space_form(0.0, 2))
    assert rep.equality


def test_sampled_totally_geodesic_candidate():
    n = 20
    lam = np.zeros((n, 2))
    data = ineq.SampledData(np.full(n, 0.1), lam, np.linspace(0, 1, n), 2.0)
    rep = ineq.poincare_einstein(data, space_form(0.0, 2))
    assert rep.rhs == 0.0 and rep.lhs == 0.0
    assert rep.flags["totally-geodesic candidate"]


def test_sampled_data_unit_sphere():
    # lumped samples of the unit sphere: S_1 = 2, rho = 1, G = t
    n = 400
    data = ineq.SampledData(np.full(n, 4 * math.pi / n), np.ones((n, 2)), np.ones(n), 2.0)
    rep = ineq.poincare_einstein(data, space_form(0.0, 2))
    assert rep.lhs == pytest.approx(8 * math.pi)
    assert rep.rhs == pytest.approx(8 * math.pi)


def test_einstein_needs_constant():
    amb = product(1.0, 2, 0.0, 1)
    with pytest.raises(UnsupportedAmbient):
        ineq.poincare_einstein(ineq.SampledData(np.ones(1), np.ones((1, 2)), np.zeros(1), 1.0), amb)


def test_sc_consistency_of_constant():
    ch = geom.geodesic_sphere(0.8, -1.0)
    rep = ineq.poincare_spaceform(ch, whole(ch), 0)
    assert rep.details["C0"] == pytest.approx(S_c(-1.0, rep.details["diameter"] / 2) / 2)


def test_constant_u_with_boundary_not_admissible():
    # constant u does not vanish on the cap boundary, so the inequality may fail
    ch = geom.sphere()
    rep = ineq.poincare_spaceform(ch, ms.intrinsic_ball(ch, NORTH, 1.0), 0)
    assert rep.violated() and rep.flags["applicable"] is False
