import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperlab import geom, ineq
from hyperlab import measure as ms
from hyperlab.symfun import elementary_symmetric

NORTH = np.array([1.0, 0.0, 0.0])  # u0 = 0 pole of the catalog sphere


def H1(s):
    return elementary_symmetric(s.lambdas)[:, 1] / s.region.m


def test_sphere_area():
    a = ms.area(ms.whole(geom.sphere()))
    assert a == pytest.approx(4 * math.pi, abs=1e-6)
    assert a.achieved <= 1e-6


def test_hemisphere_mean_curvature():
    hemi = ms.intrinsic_ball(geom.sphere(), NORTH, math.pi / 2)
    assert ms.integrate(hemi, H1) == pytest.approx(2 * math.pi, abs=1e-6)


def test_zero_integrand():
    assert ms.integrate(ms.whole(geom.cylinder()), 0.0) == 0.0


def test_weight():
    # e^{-f} with f constant 1 scales the area
    a = ms.integrate(ms.whole(geom.sphere()), 1.0, f=1.0)
    assert a == pytest.approx(4 * math.pi / math.e, rel=1e-9)


def test_equator_length():
    hemi = ms.intrinsic_ball(geom.sphere(), NORTH, math.pi / 2)
    assert ms.integrate_boundary(hemi) == pytest.approx(2 * math.pi, abs=1e-6)


def test_closed_surface_boundary_empty():
    b = ms.integrate_boundary(ms.whole(geom.sphere()))
    assert b == 0.0 and b.flags["empty-boundary"]


@pytest.mark.parametrize("R", [0.5, 1.0, 1.5])
def test_disk_circumference(R):
    disk = ms.intrinsic_ball(geom.plane(extent=2.0), np.zeros(2), R)
    assert ms.integrate_boundary(disk) == pytest.approx(2 * math.pi * R, abs=1e-6)


@pytest.mark.parametrize("R", [0.5, 2.0])
def test_sphere_diameter(R):
    assert ms.extrinsic_diameter(ms.whole(geom.sphere(R))).value == pytest.approx(2 * R, abs=1e-9)


def test_hemisphere_diameter():
    hemi = ms.intrinsic_ball(geom.sphere(), NORTH, math.pi / 2)
    assert ms.extrinsic_diameter(hemi).value == pytest.approx(2.0, abs=1e-9)


def test_disk_diameter():
    disk = ms.intrinsic_ball(geom.plane(), np.zeros(2), 0.8)
    assert ms.extrinsic_diameter(disk).value == pytest.approx(1.6, abs=1e-9)


def test_plane_ball_area():
    assert ms.area(ms.intrinsic_ball(geom.plane(), np.zeros(2), 1.0)) == pytest.approx(math.pi, abs=1e-6)


def test_sphere_ball_area():
    hemi = ms.intrinsic_ball(geom.sphere(), NORTH, math.pi / 2)
    assert ms.area(hemi) == pytest.approx(2 * math.pi, abs=1e-6)


@pytest.mark.parametrize("R", [0.05, 0.2, 1.0])
def test_cylinder_small_ball(R):
    # the cylinder is intrinsically flat, so balls below the injectivity radius are flat disks
    ball = ms.intrinsic_ball(geom.cylinder(), [0.0, 0.0], R)
    assert ms.area(ball) == pytest.approx(math.pi * R * R, rel=1e-6)


def test_truncated_ball_warns():
    with pytest.warns(RuntimeWarning):
        reg = ms.intrinsic_ball(geom.sphere(), NORTH, 4.0)
    assert reg.truncated
    assert ms.area(reg) == pytest.approx(4 * math.pi, abs=1e-6)


def test_level_set_ball_on_graph():
    # z = 0 written as a graph has no catalog ball hook, so it goes through the distance grid
    ch = geom.graph("0*x0")
    ch = ch.__class__(**{**ch.__dict__, "info": {k: v for k, v in ch.info.items() if k != "ball"}})
    ball = ms.intrinsic_ball(ch, np.zeros(2), 0.5)
    assert ball.kind == "level-set"
    assert ms.area(ball) == pytest.approx(math.pi / 4, rel=5e-3)


def test_convergence_error():
    with pytest.raises(ms.ConvergenceError) as err:
        ms.integrate(ms.whole(geom.sphere()), lambda s: np.sign(s.field.X[:, 0] - 0.3), max_level=1)
    assert len(err.value.last_two) == 2


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(0, 11), st.integers(0, 11))
def test_quadrature_exactness(n, a, b):
    # degree <= 2n - 1 per axis is exact on the flat box [-1, 1]^2
    if a > 2 * n - 1 or b > 2 * n - 1:
        return
    s = ms.sample_interior(ms.whole(geom.plane()), n)
    U = s.field.u
    got = math.fsum(s.weights * U[:, 0] ** a * U[:, 1] ** b)

    def mono(k):
        return 0.0 if k % 2 else 2.0 / (k + 1)

    assert got == pytest.approx(mono(a) * mono(b), abs=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.integers(50, 400), st.integers(2, 4))
def test_diameter_monotone(budget, factor):
    region = ms.whole(geom.graph("x0**2 - x1**2/2 + x0*x1**3"))
    a = ms.extrinsic_diameter(region, budget, polish=False).value
    b = ms.extrinsic_diameter(region, budget * factor, polish=False).value
    assert b >= a - 1e-12


def test_enclosing_centre_sphere():
    centre, radius = ms.enclosing_center(ms.whole(geom.sphere(1.5)))
    assert np.linalg.norm(centre) <= 1e-6 and radius == pytest.approx(1.5, abs=1e-6)


def test_ramp_validation():
    with pytest.raises(ValueError):
        ms.Ramp(ms.whole(geom.sphere()), 0.1)
    with pytest.raises(ValueError):
        ms.Ramp(ms.intrinsic_ball(geom.plane(), np.zeros(2), 1.0), 0.0)


@pytest.mark.parametrize("surface,x0,R", [("plane", np.zeros(2), 1.0), ("sphere", NORTH, 1.0)])
def test_ramp_limit_matches_boundary_form(surface, x0, R):
    ch = geom.catalog(surface)
    ball = ms.intrinsic_ball(ch, x0, R)
    vals = {}
    for eps in (1e-2, 1e-3):
        vals[eps] = ineq.poincare_spaceform(ch, ball, 0, u=ms.Ramp(ball, eps)).rhs
    extrapolated = vals[1e-3] - 1e-3 * (vals[1e-2] - vals[1e-3]) / (1e-2 - 1e-3)
    direct = ineq.poincare_spaceform(ch, ball, 0)
    C0 = direct.details["C0"]
    boundary_form = C0 * (ms.integrate_boundary(ball) + ms.integrate(ball, lambda s: elementary_symmetric(s.lambdas)[:, 1]))
    assert extrapolated == pytest.approx(boundary_form, abs=1e-3)
