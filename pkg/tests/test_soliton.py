import csv
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperlab import geom
from hyperlab import soliton as so
from hyperlab.soliton import (
    ProfileState,
    SingularityError,
    SolitonDomainError,
    SolitonSpec,
    revolution_curvatures,
    revolution_S,
    signed_power,
    soliton_residual,
)

SHRINKER = SolitonSpec(0, 1, -0.5)


# -- signed powers ----------------------------------------------------------------------


def test_odd_cube_root():
    assert signed_power(-8.0, Fraction(1, 3)) == pytest.approx(-2.0)


def test_square_root():
    assert signed_power(4.0, 0.5) == 2.0


def test_untagged_even_root_of_negative():
    with pytest.raises(SolitonDomainError):
        signed_power(-4.0, 0.5)


def test_zero_to_negative_power():
    with pytest.raises(SingularityError):
        signed_power(np.array([1.0, 0.0]), -1)


def test_integer_powers_keep_sign():
    assert signed_power(-2.0, 3) == -8.0 and signed_power(-2.0, -1) == -0.5


odd_fracs = st.tuples(st.integers(-7, 7), st.integers(0, 4)).filter(lambda t: t[0] % 2 == 1).map(
    lambda t: Fraction(t[0], 2 * t[1] + 1))
# negative powers of subnormal bases overflow to inf; keep |S| >= 1e-40 or S = 0 (|alpha| <= 7)
bases = st.floats(-50, 50).filter(lambda v: v == 0 or abs(v) >= 1e-40)


@given(bases, odd_fracs)
def test_power_identity(S, alpha):
    if S == 0 and alpha < 0:
        return
    lhs = signed_power(S, alpha) * signed_power(S, 1)
    rhs = signed_power(S, alpha + 1)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


@given(bases, odd_fracs)
def test_next_power_nonnegative(S, alpha):
    # alpha + 1 = (2a + 2b + 2)/(2b + 1) has an even numerator: a square
    if S == 0 and alpha + 1 < 0:
        return
    assert signed_power(S, alpha + 1) >= 0


def test_inverse_power():
    assert so.inverse_power(-2.0, Fraction(1, 3)) == pytest.approx(-8.0)
    assert so.inverse_power(3.0, 1) == 3.0


def test_spec_validation():
    with pytest.raises(ValueError):
        SolitonSpec(0, 0, 1.0)
    with pytest.raises(ValueError):
        SolitonSpec(0, 1, 0.0)
    with pytest.raises(ValueError):
        SolitonSpec(0, 0.5, 1.0, odd_rational=True)
    assert SolitonSpec(1, Fraction(1, 3), 1.0).odd_rational
    assert SolitonSpec(0, 1, 1.0).kind == "self-expander" and SHRINKER.kind == "self-shrinker"


# -- residuals ---------------------------------------------------------------------------


@pytest.mark.parametrize("m", [2, 3])
def test_shrinking_sphere(m):
    res = soliton_residual(geom.sphere(math.sqrt(2 * m), m=m), SHRINKER)
    assert res.sup <= 1e-8


def test_unit_sphere_residual():
    res = soliton_residual(geom.sphere(), SHRINKER)
    assert np.allclose(res.values, 1.5, atol=1e-12)


@pytest.mark.parametrize("alpha", [1, 2, Fraction(1, 3)])
def test_plane_through_origin(alpha):
    res = soliton_residual(geom.plane(), SolitonSpec(1, alpha, 1.0))
    assert res.sup == 0.0


def test_offset_plane_is_not_a_solution():
    res = soliton_residual(geom.plane(offset=0.5), SolitonSpec(1, 1, 1.0))
    assert res.sup == pytest.approx(0.5)


def test_orientation_flip_odd_order():
    # r = 0, alpha = 1: flipping eta negates S_1 and <psi, eta>, so the
    # flipped residual with the same delta is the negated residual
    s = geom.sphere(1.3)
    a = soliton_residual(s, SHRINKER, both=True)
    assert np.allclose(a.flipped.support, -a.support)
    assert np.allclose(a.flipped.S, -a.S)
    assert np.allclose(a.flipped.values, -a.values, atol=1e-12)


def test_orientation_flip_even_order():
    # r = 1: S_2 is unchanged by the flip, so delta -> -delta restores the residual
    s = geom.sphere(1.3)
    a = soliton_residual(s, SolitonSpec(1, 1, 0.7))
    b = soliton_residual(s, SolitonSpec(1, 1, -0.7), both=True)
    assert np.allclose(b.flipped.values, a.values, atol=1e-12)


def test_residual_domain_error_reports_location():
    with pytest.raises(SolitonDomainError, match="parameter"):
        soliton_residual(geom.graph("x0**2 - x1**2"), SolitonSpec(0, 0.5, 1.0))


def test_curved_support_field():
    # geodesic sphere in the hyperbolic model: <S_c(rho) grad rho, eta> = -sinh(R) for the inward normal
    R = 0.8
    res = soliton_residual(geom.geodesic_sphere(R, -1.0), SolitonSpec(0, 1, 1.0, c=-1.0))
    assert np.allclose(res.support, -math.sinh(R), atol=1e-10)


def test_ambient_mismatch():
    with pytest.raises(ValueError):
        soliton_residual(geom.sphere(), SolitonSpec(0, 1, 1.0, c=-1.0))


# -- profiles ---------------------------------------------------------------------------------


def test_circle_profile_curvatures():
    R = 1.7
    t = np.linspace(0.2, 2.9, 9)
    st_ = ProfileState(R * t, R * np.sin(t), -R * np.cos(t), t, np.full(9, 1 / R))
    kp, kr = revolution_curvatures(st_, 3)
    assert np.allclose(kp, 1 / R) and np.allclose(kr, 1 / R)
    assert np.allclose(revolution_S(kp, kr, 3, 1), 3 / R)


def test_cylinder_and_plane_profiles():
    cyl = ProfileState(np.arange(4.0), np.full(4, 2.0), np.arange(4.0), np.full(4, math.pi / 2), np.zeros(4))
    kp, kr = revolution_curvatures(cyl, 2)
    assert np.allclose(kp, 0) and np.allclose(kr, 0.5) and np.allclose(revolution_S(kp, kr, 2, 2), 0)
    flat = ProfileState(np.arange(1.0, 4.0), np.arange(1.0, 4.0), np.zeros(3), np.zeros(3), np.zeros(3))
    assert np.all(np.concatenate(revolution_curvatures(flat, 2)) == 0)


def test_axis_collision():
    with pytest.raises(so.AxisCollision):
        revolution_curvatures(ProfileState(np.arange(2.0), np.array([1.0, 0.0]), np.zeros(2), np.zeros(2)), 2)


def test_degenerate_denominator():
    # r = 1 needs kappa_rot != 0: a profile leaving the axis flat hits it
    ode = so.ProfileODE(SolitonSpec(1, 1, 1.0), 2)
    with pytest.raises(so.DegenerateDenominator):
        ode.theta_prime(0.1, 1.0, 0.0, 0.0)


def test_profile_needs_flat_ambient():
    with pytest.raises(NotImplementedError):
        so.ProfileODE(SolitonSpec(0, 1, 1.0, c=1.0), 2)


def test_unit_speed():
    tr = so.integrate_profile(SHRINKER, 2, -2.0, until="equator")
    st_ = tr.state
    ds = np.diff(st_.s)
    chord = np.hypot(np.diff(st_.x), np.diff(st_.z))
    kmax = float(np.max(np.abs(st_.theta_prime)))
    # exact unit speed leaves only the chord-versus-arc defect h^2 kappa^2 / 24
    drift = np.abs(chord / ds - 1)
    assert np.all(drift <= ds**2 * kmax**2 / 24 * 1.01 + 1e-12)
    assert drift.max() <= 1e-7


def test_small_delta_flattens():
    # delta -> 0: theta' along the profile shrinks with delta
    peaks = []
    for d in (-1e-2, -1e-4, -1e-6):
        tr = so.integrate_profile(SolitonSpec(0, 1, d), 2, -1.0, s_max=2.0)
        peaks.append(float(np.max(np.abs(tr.state.theta_prime))))
    assert peaks[0] > peaks[1] > peaks[2] and peaks[2] <= 1e-5


def test_unknown_start_mode():
    with pytest.raises(ValueError):
        so.integrate_profile(SHRINKER, 2, 1.0, mode="pole")


@pytest.fixture(scope="module")
def shot():
    return so.shoot(SHRINKER, 2)


def test_shoot_sphere_radius(shot):
    assert shot.closed
    assert shot.radius == pytest.approx(2.0, abs=1e-4)
    assert shot.richardson <= 1e-6


def test_shoot_loop_residual(shot):
    assert so.loop_residual(shot).sup <= 1e-6


def test_profile_residual_finite(shot):
    res = so.profile_residual(shot)
    assert np.all(np.isfinite(res)) and np.abs(res).max() <= 1e-6


def test_profile_csv(shot, tmp_path):
    p = tmp_path / "profile.csv"
    so.write_profile_csv(shot, p)
    raw = p.read_bytes()
    assert raw.startswith(b"s,x,z,theta,kappa1,kappa2,residual\r\n")
    rows = list(csv.reader(p.open(newline="")))
    assert len(rows) == len(shot.profile.s) + 1 and all(len(r) == 7 for r in rows)


@pytest.mark.slow
def test_shoot_three_dimensional():
    res = so.shoot(SHRINKER, 3)
    assert res.closed and res.radius == pytest.approx(math.sqrt(6), abs=1e-4)


# -- hyperplane / nonexistence statement -------------------------------------------------


def test_plane_triple_zero():
    out = so.theorem_5_2_check(geom.plane(), SolitonSpec(1, 1, 1.0))
    assert all(out.checks.values()) and out.triple_zero


def test_shrinking_sphere_not_met():
    out = so.theorem_5_2_check(geom.sphere(2.0), SHRINKER)
    assert not out.checks["delta S_r >= 0"] and not out.checks["decay R |A|^r"]
    assert out.label.startswith("hypotheses not met")


def test_offset_plane_not_solution():
    out = so.theorem_5_2_check(geom.plane(offset=0.5), SolitonSpec(1, 1, 1.0))
    assert not out.checks["solves the equation"] and out.residual == pytest.approx(0.5)


def test_negative_alpha_plane_infeasible():
    # S_2 = 0 on the plane, so S_2^{-1} is singular: not a solution
    out = so.theorem_5_2_check(geom.plane(), SolitonSpec(1, -1, 1.0))
    assert not out.checks["solves the equation"] and out.residual == math.inf


def test_curved_statement_rejected():
    with pytest.raises(ValueError):
        so.theorem_5_2_check(geom.geodesic_sphere(1.0, -1.0), SolitonSpec(0, 1, 1.0, c=-1.0))


def test_sampled_revolution_sphere():
    t = np.linspace(0.0, math.pi, 400)
    ch = geom.sampled_revolution(2 * t, 2 * np.sin(t), -2 * np.cos(t), 2)
    res = soliton_residual(ch, SHRINKER, np.column_stack([np.linspace(1.0, 5.0, 9), np.ones(9)]))
    assert res.sup <= 1e-6
