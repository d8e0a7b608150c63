import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperlab.ambient import constant_F, space_form
from hyperlab.symfun import (
    ShapeSpectrum,
    SpectrumError,
    elementary_symmetric,
    identity_scale,
    newton,
    newton_eigenvalues,
    newton_matrix,
    norms_and_bounds,
    positivity_class,
    scal_from_S2,
    sym_all,
    trace_identities,
)

finite = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)
spectra = st.integers(2, 8).flatmap(lambda m: st.lists(finite, min_size=m, max_size=m))


def brute(lam, k):
    return math.fsum(math.prod(c) for c in itertools.combinations(lam, k))


# -- examples -------------------------------------------------------------------


def test_all_ones_gives_binomials():
    assert np.allclose(sym_all(ShapeSpectrum((1, 1, 1, 1))).S, [1, 4, 6, 4, 1])


def test_one_two_three():
    tab = sym_all(ShapeSpectrum((1, 2, 3)))
    assert tab.S.tolist() == [1, 6, 11, 6]
    assert tab.s(4) == 0.0 and tab.s(-1) == 0.0


def test_zero_spectrum():
    assert np.all(sym_all(ShapeSpectrum((0.0,) * 5)).S[1:] == 0)


def test_H_normalisation():
    tab = sym_all(ShapeSpectrum((2.0, 2.0, 2.0)))
    assert np.allclose(tab.H, [1, 2, 4, 8])


@pytest.mark.parametrize("bad", [(1.0,), (1.0, float("nan")), (float("inf"), 0.0)])
def test_invalid_spectrum(bad):
    with pytest.raises(SpectrumError):
        ShapeSpectrum(bad)


def test_newton_umbilic():
    assert np.allclose(newton(ShapeSpectrum((2, 2, 2)), 1).eigenvalues, [4, 4, 4])


def test_newton_hand_recursion():
    op = newton(ShapeSpectrum((1, 2, 3)), 2)
    assert np.allclose(op.eigenvalues, [6, 3, 2])
    assert op.eigenvalues.sum() == pytest.approx(11)


def test_newton_zero_is_identity():
    assert np.all(newton(ShapeSpectrum((0.3, -1.7, 5.0)), 0).eigenvalues == 1)


def test_newton_order_out_of_range():
    with pytest.raises(ValueError):
        newton(ShapeSpectrum((1, 2, 3)), 3)


def test_newton_matrix_in_basis():
    Q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(3, 3)))
    op = newton(ShapeSpectrum((1, 2, 3)), 1, basis=Q)
    A = Q @ np.diag([1, 2, 3]) @ Q.T
    assert np.allclose(op.matrix, newton_matrix(A, 1))


def test_trace_identities_examples():
    assert max(trace_identities(ShapeSpectrum((1, 2, 3)), 1)) < 1e-12
    assert (np.array([1.0, 1.0]) * newton_eigenvalues([1.0, 1.0], 0)).sum() == 2.0


def test_trace_identities_uniform_sample():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        m = int(rng.integers(2, 9))
        sp = ShapeSpectrum(tuple(rng.uniform(-2, 2, m)))
        for r in range(m):
            res, sc = trace_identities(sp, r), identity_scale(sp, r)
            assert all(a <= 1e-10 * max(s, 1e-300) for a, s in zip(res, sc))


def test_bounds_examples():
    rep = norms_and_bounds(ShapeSpectrum((1.0, 0.0, 0.0)), 1)
    assert rep.norm_A == 1.0 and rep.p_bound_ok and rep.norm_P < rep.p_bound
    k = 0.7
    rep = norms_and_bounds(ShapeSpectrum((k,) * 4), 2)
    assert rep.norm_A == pytest.approx(2 * k)
    assert np.allclose(rep.s_ratios, [4 ** (-j / 2) for j in range(5)])
    z = norms_and_bounds(ShapeSpectrum((0.0, 0.0)), 1)
    assert z.norm_A == 0 and z.norm_P == 0 and z.s_bound_ok and z.p_bound_ok


def test_positivity_cylinder():
    rep = positivity_class([ShapeSpectrum((1.0, 0.0))] * 5, 1)
    assert rep.conditions["a"] and rep.p_nonneg


def test_positivity_sphere_e():
    for m in (2, 3, 4):
        for r in range(m):
            assert positivity_class(np.ones((3, m)), r).conditions["e"]


def test_positivity_mixed_signs():
    lam = np.array([[1.0, 1.0, 1.0], [-3.0, 1.0, 1.0]])  # S_2 = 3 and -5
    rep = positivity_class(lam, 1)
    assert not rep.any_condition


def test_positivity_empty():
    with pytest.raises(ValueError):
        positivity_class([], 0)


def test_scalar_curvature_from_gauss():
    assert scal_from_S2(0.0, 3.0, space_form(0.0, 2)) == pytest.approx(6.0)
    amb = constant_F(1.0, 3, einstein_constant=5.0)
    assert scal_from_S2(1.0, 0.0, amb) == pytest.approx(2 * 5.0)
    assert scal_from_S2(2.0, 1.0, space_form(0.0, 2)) == pytest.approx(2.0)


def test_batched_elementary_symmetric():
    lam = np.random.default_rng(1).normal(size=(4, 5, 3))
    out = elementary_symmetric(lam)
    assert out.shape == (4, 5, 4)
    assert out[2, 3, 2] == pytest.approx(brute(lam[2, 3], 2))


# -- properties -----------------------------------------------------------------


@given(spectra)
def test_sym_all_matches_enumeration(lam):
    tab = sym_all(ShapeSpectrum(tuple(lam)))
    for k in range(len(lam) + 1):
        terms = [math.prod(c) for c in itertools.combinations(lam, k)]
        scale = math.fsum(abs(t) for t in terms)
        assert abs(tab.s(k) - math.fsum(terms)) <= 1e-10 * scale + 1e-300


@given(spectra)
def test_trace_identities_hold(lam):
    sp = ShapeSpectrum(tuple(lam))
    for r in range(sp.m):
        for res, sc in zip(trace_identities(sp, r), identity_scale(sp, r)):
            assert res <= 1e-10 * sc + 1e-300


@settings(max_examples=50)
@given(st.integers(2, 6).flatmap(lambda m: st.lists(st.floats(-2, 2), min_size=m, max_size=m)), st.data())
def test_newton_is_gradient_of_next(lam, data):
    m = len(lam)
    r = data.draw(st.integers(0, m - 1))
    lam = np.array(lam)
    mu = newton_eigenvalues(lam, r)
    h = 1e-5
    for i in range(m):
        e = np.zeros(m)
        e[i] = h
        fd = (elementary_symmetric(lam + e)[r + 1] - elementary_symmetric(lam - e)[r + 1]) / (2 * h)
        assert abs(fd - mu[i]) <= 1e-6 * (1 + np.abs(lam).max() ** r) * math.comb(m - 1, r)


@given(st.floats(-3, 3), st.integers(2, 8), st.data())
def test_umbilic_newton(kappa, m, data):
    r = data.draw(st.integers(0, m - 1))
    mu = newton_eigenvalues(np.full(m, kappa), r)
    assert np.allclose(mu, math.comb(m - 1, r) * kappa**r, rtol=1e-12, atol=1e-12)


@given(spectra)
def test_norm_and_power_bounds(lam):
    sp = ShapeSpectrum(tuple(lam))
    for r in range(sp.m):
        rep = norms_and_bounds(sp, r)
        assert rep.p_bound_ok and rep.s_bound_ok


@given(spectra, st.floats(0.1, 5.0))
def test_scale_covariance(lam, t):
    a = sym_all(ShapeSpectrum(tuple(lam))).S
    b = sym_all(ShapeSpectrum(tuple(t * x for x in lam))).S
    k = np.arange(len(a))
    assert np.allclose(b, t**k * a, rtol=1e-9, atol=1e-9 * t ** k * np.abs(a).max())


@given(spectra)
def test_flip_negates_odd_orders(lam):
    sp = ShapeSpectrum(tuple(lam))
    a, b = sym_all(sp).S, sym_all(sp.flipped()).S
    k = np.arange(len(a))
    assert np.allclose(b, (-1.0) ** k * a, atol=1e-12 * (1 + np.abs(a).max()))
