"""Ambient manifolds and their comparison functions.

Space forms carry the closed-form comparison function S_c and the rigidity
weight h_c. The Einstein examples (products of space forms, the constant-F
projective model, the Riemannian Schwarzschild metric) carry an upper bound
F(t) for radial sectional curvatures; the comparison function G then solves
G'' + F G = 0 with G(0) = 0, G'(0) = 1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from ._ode import rk4_grid


class UnsupportedAmbient(ValueError):
    pass


class IntegrationError(RuntimeError):
    pass


KINDS = ("space-form", "product", "constant-F", "schwarzschild")


@dataclass(frozen=True)
class AmbientSpec:
    kind: str
    dimension: int  # m + 1
    c: float | None = None  # space forms
    factors: tuple[tuple[float, int], ...] = ()  # product: ((c1, p1), (c2, p2))
    F_value: float | None = None  # constant-F
    beta: float | None = None  # schwarzschild
    einstein_constant: float | None = None
    injectivity_radius: float = math.inf

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown ambient kind {self.kind!r}; expected one of {KINDS}")
        if self.dimension < 3:
            raise ValueError("ambient dimension must be at least 3 (m >= 2)")
        if not self.injectivity_radius > 0:
            raise ValueError("injectivity radius must be positive")

    @property
    def m(self) -> int:
        return self.dimension - 1

    @property
    def is_einstein(self) -> bool:
        return self.einstein_constant is not None

    def to_config(self) -> dict:
        out = {"kind": self.kind, "m": self.m}
        if self.kind == "space-form":
            out["c"] = self.c
        elif self.kind == "product":
            (c1, p1), (c2, p2) = self.factors
            out.update(c1=c1, p1=p1, c2=c2, p2=p2)
        elif self.kind == "constant-F":
            out["F"] = self.F_value
            out["einstein-constant"] = self.einstein_constant
            out["injectivity-radius"] = self.injectivity_radius
        else:
            out["beta"] = self.beta
        return out


def space_form(c: float, m: int) -> AmbientSpec:
    inj = math.pi / math.sqrt(c) if c > 0 else math.inf
    return AmbientSpec("space-form", m + 1, c=float(c), einstein_constant=m * float(c), injectivity_radius=inj)


def product(c1: float, p1: int, c2: float, p2: int, require_einstein: bool = False) -> AmbientSpec:
    """Riemannian product of two space forms of dimensions p1, p2."""
    if p1 < 1 or p2 < 1:
        raise ValueError("factor dimensions must be positive")
    ric1, ric2 = (p1 - 1) * c1, (p2 - 1) * c2
    einstein = math.isclose(ric1, ric2, rel_tol=1e-12, abs_tol=1e-12)
    if require_einstein and not einstein:
        raise UnsupportedAmbient(
            f"product is not Einstein: (p1-1)c1 = {ric1} differs from (p2-1)c2 = {ric2}"
        )
    inj = min(math.pi / math.sqrt(c) if c > 0 else math.inf for c in (c1, c2))
    return AmbientSpec(
        "product",
        p1 + p2,
        factors=((float(c1), int(p1)), (float(c2), int(p2))),
        einstein_constant=float(ric1) if einstein else None,
        injectivity_radius=inj,
    )


def constant_F(value: float, m: int, einstein_constant: float | None = None, injectivity_radius: float = math.inf):
    return AmbientSpec(
        "constant-F",
        m + 1,
        F_value=float(value),
        einstein_constant=einstein_constant,
        injectivity_radius=injectivity_radius,
    )


def complex_projective(m: int) -> AmbientSpec:
    """CP^{m+1} through its curvature data only: F = 1, Einstein constant m + 2, compact."""
    return constant_F(1.0, m, einstein_constant=float(m + 2), injectivity_radius=math.pi)


def schwarzschild(beta: float) -> AmbientSpec:
    """R^2 x S^2 with dr^2 + phi^2 ds_1^2 + psi^2 ds_2^2; Ricci flat."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    return AmbientSpec("schwarzschild", 4, beta=float(beta), einstein_constant=0.0)


# -- closed-form comparison functions ---------------------------------------


class Comparison(NamedTuple):
    S: np.ndarray | float
    dS: np.ndarray | float
    h: np.ndarray | float


def sc(c: float, t):
    t = np.asarray(t, dtype=float)
    if c == 0:
        return t.copy() if t.ndim else float(t)
    k = math.sqrt(abs(c))
    out = np.sinh(k * t) / k if c < 0 else np.sin(k * t) / k
    return out if t.ndim else float(out)


def dsc(c: float, t):
    t = np.asarray(t, dtype=float)
    if c == 0:
        out = np.ones_like(t)
    else:
        k = math.sqrt(abs(c))
        out = np.cosh(k * t) if c < 0 else np.cos(k * t)
    return out if t.ndim else float(out)


def hc(c: float, t):
    if c <= 0:
        return sc(c, t)
    t = np.asarray(t, dtype=float)
    out = np.ones_like(t)
    return out if t.ndim else 1.0


def comparison(c: float, t) -> Comparison:
    """(S_c(t), S_c'(t), h_c(t)).

    For c > 0 a RuntimeWarning is issued once t leaves [0, pi/(2 sqrt c)),
    where S_c stops increasing.
    """
    ta = np.asarray(t, dtype=float)
    if np.any(ta < 0):
        raise ValueError("distance t must be non-negative")
    if c > 0 and np.any(ta >= math.pi / (2 * math.sqrt(c))):
        warnings.warn("t beyond pi/(2 sqrt c): S_c is no longer increasing", RuntimeWarning, stacklevel=2)
    return Comparison(sc(c, t), dsc(c, t), hc(c, t))


# -- comparison functions as objects ------------------------------------------


@dataclass(frozen=True)
class ComparisonFn:
    """G on [0, b) together with G'."""

    value: Callable
    derivative: Callable
    domain_end: float
    provenance: str  # "closed-form-Sc" | "ode-integrated"
    error_estimate: float = 0.0
    t: np.ndarray | None = field(default=None, repr=False, compare=False)
    G: np.ndarray | None = field(default=None, repr=False, compare=False)
    dG: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __call__(self, t):
        return self.value(t)


def closed_form_G(c: float) -> ComparisonFn:
    b = math.pi / (2 * math.sqrt(c)) if c > 0 else math.inf
    return ComparisonFn(lambda t: sc(c, t), lambda t: dsc(c, t), b, "closed-form-Sc")


def _as_function(F) -> Callable[[float], float]:
    if callable(F):
        return F
    value = float(F)
    return lambda t: value


def _integrate_G(F, t_max: float, step: float):
    def rhs(t, y):
        f = F(t)
        if not math.isfinite(f):
            raise IntegrationError(f"F is not finite at t={t}")
        return (y[1], -f * y[0])

    ts, ys = rk4_grid(rhs, 0.0, (0.0, 1.0), t_max, step, stop=lambda t, y: y[1] <= 0.0)
    return np.array(ts), np.array(ys)


def solve_G(F, t_max: float, step: float = 1e-3) -> ComparisonFn:
    """Canonical comparison function for a curvature bound F.

    Integrates G'' + F G = 0, G(0) = 0, G'(0) = 1 with classical RK4. The
    domain ends at t_max or where G' first reaches 0, whichever is earlier;
    that point is reported as ``domain_end``. ``error_estimate`` is the
    Richardson estimate max|G_h - G_2h| / 15 on the shared nodes.
    """
    if not (t_max > 0 and step > 0):
        raise ValueError("t_max and step must be positive")
    Ff = _as_function(F)
    t, y = _integrate_G(Ff, t_max, step)
    G, dG = y[:, 0], y[:, 1]
    b = float(t[-1])
    if dG[-1] <= 0.0 and len(t) > 1:
        # linear root of G' in the last step
        t0, t1, d0, d1 = t[-2], t[-1], dG[-2], dG[-1]
        b = float(t0 + (t1 - t0) * d0 / (d0 - d1)) if d0 != d1 else float(t1)
    if np.any(np.diff(G) < -1e-14):
        raise IntegrationError("integrated G is not nondecreasing")
    # Richardson check against the doubled step on the common nodes
    half = (len(t) - 1) // 2
    err = 0.0
    if half >= 1:
        t2, y2 = _integrate_G(Ff, float(t[2 * half]), 2 * float(t[2 * half]) / (2 * half))
        k = min(len(t2), half + 1)
        err = float(np.max(np.abs(y[0 : 2 * k : 2, 0] - y2[:k, 0])) / 15.0)
    ddG = np.array([-Ff(ti) * gi for ti, gi in zip(t, G)])
    g_spline = CubicHermiteSpline(t, G, dG)
    dg_spline = CubicHermiteSpline(t, dG, ddG)

    def value(s):
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < 0) or np.any(s_arr > t[-1] + 1e-12):
            raise ValueError(f"G evaluated outside its domain [0, {t[-1]}]")
        out = g_spline(s_arr)
        return out if s_arr.ndim else float(out)

    def derivative(s):
        s_arr = np.asarray(s, dtype=float)
        out = dg_spline(s_arr)
        return out if s_arr.ndim else float(out)

    return ComparisonFn(value, derivative, b, "ode-integrated", err, t, G, dG)


# -- Schwarzschild profile -----------------------------------------------------


@dataclass(frozen=True)
class SchwarzschildProfile:
    beta: float
    r: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray
    ddpsi: np.ndarray

    @property
    def phi(self) -> np.ndarray:
        return 2 * self.beta * self.dpsi

    @property
    def dphi(self) -> np.ndarray:
        return 2 * self.beta * self.ddpsi

    @property
    def F(self) -> np.ndarray:
        return 2 * self.ddpsi / self.psi

    def first_integral_defect(self) -> float:
        """max |psi'^2 - (1 - beta/psi)| along the samples."""
        return float(np.max(np.abs(self.dpsi**2 - (1 - self.beta / self.psi))))


def schwarzschild_profile(beta: float, r_max: float, step: float | None = None) -> SchwarzschildProfile:
    """Warping functions of the Riemannian Schwarzschild metric.

    The areal function satisfies psi'' = (beta/2) psi^-2 with psi(0) = beta,
    psi'(0) = 0 (equivalently psi'^2 = 1 - beta/psi); phi = 2 beta psi'.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    h = step if step is not None else 1e-3 * beta

    def rhs(t, y):
        if y[0] <= 0:
            raise IntegrationError(f"psi became non-positive at r={t}")
        return (y[1], 0.5 * beta / (y[0] * y[0]))

    ts, ys = rk4_grid(rhs, 0.0, (beta, 0.0), r_max, h)
    y = np.array(ys)
    psi, dpsi = y[:, 0], y[:, 1]
    if np.any(psi <= 0):
        raise IntegrationError("psi became non-positive")
    return SchwarzschildProfile(beta, np.array(ts), psi, dpsi, 0.5 * beta / psi**2)


# -- dispatch on AmbientSpec ------------------------------------------------------


def einstein_F(spec: AmbientSpec, t_max: float = 50.0, step: float | None = None) -> Callable:
    """Upper bound F(t) for radial sectional curvatures."""
    if spec.kind == "space-form":
        raise UnsupportedAmbient("space forms use S_c directly")
    if spec.kind == "product":
        if not spec.is_einstein:
            raise UnsupportedAmbient("non-Einstein product")
        # mixed planes have curvature 0, so 0 also bounds from below
        value = max(c for c, _ in spec.factors)
        value = max(value, 0.0)
        return _as_function(value)
    if spec.kind == "constant-F":
        return _as_function(spec.F_value)
    prof = schwarzschild_profile(spec.beta, t_max, step)
    beta = spec.beta
    psi = CubicHermiteSpline(prof.r, prof.psi, prof.dpsi)

    def F(t):
        if t < 0 or t > prof.r[-1] + 1e-12:
            raise ValueError(f"F requested at t={t} outside [0, {prof.r[-1]}]")
        return beta / float(psi(t)) ** 3

    return F


def comparison_function(spec: AmbientSpec, t_max: float = 50.0, step: float = 1e-3) -> ComparisonFn:
    if spec.kind == "space-form":
        return closed_form_G(spec.c)
    F = einstein_F(spec, t_max=t_max)
    if spec.kind in ("product", "constant-F"):
        return closed_form_G(F(0.0))
    return solve_G(F, t_max, step)


def calligraphic_G(spec: AmbientSpec, t_max: float = 50.0) -> Callable:
    """G when the injectivity radius is infinite, the constant 1 otherwise."""
    if math.isinf(spec.injectivity_radius):
        return comparison_function(spec, t_max=t_max).value

    def one(t):
        t = np.asarray(t, dtype=float)
        return np.ones_like(t) if t.ndim else 1.0

    return one


def rigidity_weight(spec: AmbientSpec) -> Callable:
    """h_c for space forms; used by the decay scans."""
    if spec.kind != "space-form":
        raise UnsupportedAmbient("h_c is defined for space forms only")
    return lambda t: hc(spec.c, t)
