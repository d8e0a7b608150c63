import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperlab.ambient import (
    IntegrationError,
    UnsupportedAmbient,
    calligraphic_G,
    comparison,
    comparison_function,
    complex_projective,
    constant_F,
    einstein_F,
    product,
    schwarzschild,
    schwarzschild_profile,
    solve_G,
    space_form,
)


def test_comparison_flat():
    assert tuple(comparison(0.0, 2.0)) == (2.0, 1.0, 2.0)


def test_comparison_hyperbolic():
    S, dS, h = comparison(-1.0, 1.0)
    assert S == pytest.approx(1.175201, abs=1e-6)
    assert dS == pytest.approx(1.543081, abs=1e-6)
    assert h == S


def test_comparison_sphere_edge():
    with pytest.warns(RuntimeWarning):
        S, dS, h = comparison(4.0, math.pi / 4)
    assert S == pytest.approx(0.5) and dS == pytest.approx(0.0, abs=1e-15) and h == 1.0


def test_comparison_negative_t():
    with pytest.raises(ValueError):
        comparison(0.0, -0.1)


@given(st.sampled_from([-2.0, -1.0, 0.0, 0.5, 1.0]), st.floats(0.05, 1.0))
def test_comparison_derivative(c, t):
    errs = []
    for h in (1e-2, 5e-3):
        fd = (comparison(c, t + h).S - comparison(c, t - h).S) / (2 * h)
        errs.append(abs(fd - comparison(c, t).dS))
    # second order: halving h divides the error by about 4
    assert errs[1] <= errs[0] / 3 + 1e-12


def test_product_einstein():
    amb = product(1.0, 2, 1.0, 2)
    assert amb.einstein_constant == 1.0
    assert einstein_F(amb)(0.3) == 1.0
    assert amb.dimension == 4


def test_product_not_einstein():
    assert product(1.0, 2, 2.0, 2).einstein_constant is None
    with pytest.raises(UnsupportedAmbient):
        product(1.0, 2, 2.0, 2, require_einstein=True)


@pytest.mark.parametrize("p1,c1,p2", [(2, 1.0, 2), (3, 0.5, 2), (3, -1.0, 3)])
def test_product_einstein_constant_formula(p1, c1, p2):
    c2 = (p1 - 1) * c1 / (p2 - 1)
    assert product(c1, p1, c2, p2).einstein_constant == pytest.approx((p1 - 1) * c1)


def test_cp_model():
    amb = complex_projective(3)
    assert einstein_F(amb)(1.0) == 1.0
    assert calligraphic_G(amb)(0.7) == 1.0


def test_schwarzschild_F_at_zero():
    F = einstein_F(schwarzschild(1.0), t_max=5.0)
    assert F(0.0) == pytest.approx(1.0)


def test_schwarzschild_smoothness_data():
    p = schwarzschild_profile(1.0, 2.0)
    assert p.psi[0] == 1.0 and p.dpsi[0] == 0.0
    assert p.phi[0] == 0.0 and p.dphi[0] == pytest.approx(1.0)
    assert np.all(p.ddpsi > 0)
    assert p.first_integral_defect() < 1e-9


def test_schwarzschild_asymptotics():
    p = schwarzschild_profile(1.0, 1000.0, step=0.05)
    assert p.dpsi[-1] == pytest.approx(1.0, abs=1e-3)
    assert abs(p.F[-1]) < 1e-8


def test_schwarzschild_curvature_relation():
    p = schwarzschild_profile(1.0, 3.0, step=1e-3)
    phi = p.phi
    h = p.r[1] - p.r[0]
    ddphi = (phi[2:] - 2 * phi[1:-1] + phi[:-2]) / h**2
    lhs = -ddphi / phi[1:-1]
    rhs = p.F[1:-1]
    inner = slice(100, None)  # away from the removable 0/0 at the bolt
    assert np.allclose(lhs[inner], rhs[inner], rtol=1e-6)


def test_schwarzschild_rejects_beta():
    with pytest.raises(ValueError):
        schwarzschild(0.0)
    with pytest.raises(ValueError):
        schwarzschild_profile(-1.0, 1.0)


def test_solve_G_zero():
    G = solve_G(0.0, 2.0)
    t = np.linspace(0, 2, 17)
    assert np.max(np.abs(G.value(t) - t)) < 1e-12


@pytest.mark.parametrize("F,exact", [(1.0, math.sin(1.0)), (-1.0, math.sinh(1.0))])
def test_solve_G_constants(F, exact):
    G = solve_G(lambda t: F, 1.0, 1e-3)
    assert G(1.0) == pytest.approx(exact, abs=1e-8)
    assert G.provenance == "ode-integrated"


def test_solve_G_domain_end():
    G = solve_G(1.0, 3.0)
    assert G.domain_end == pytest.approx(math.pi / 2, abs=1e-3)


def test_solve_G_non_finite():
    with pytest.raises(IntegrationError):
        solve_G(lambda t: float("nan"), 1.0)


def test_solve_G_order():
    errs = []
    for h in (0.1, 0.05, 0.025):
        G = solve_G(1.0, 1.0, h)
        errs.append(np.max(np.abs(G.G - np.sin(G.t))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 3.5)


def test_calligraphic_G():
    assert calligraphic_G(space_form(0.0, 2))(1.5) == 1.5
    assert calligraphic_G(space_form(-1.0, 2))(1.0) == pytest.approx(math.sinh(1.0))
    assert calligraphic_G(constant_F(1.0, 2, 2.0, injectivity_radius=math.pi))(3.0) == 1.0


def test_comparison_function_space_form():
    assert comparison_function(space_form(1.0, 2)).domain_end == pytest.approx(math.pi / 2)
    assert comparison_function(space_form(0.0, 2)).provenance == "closed-form-Sc"


def test_dimension_guard():
    with pytest.raises(ValueError):
        space_form(0.0, 1)
