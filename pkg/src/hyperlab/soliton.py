"""Homothetic solitons S_{r+1}^alpha = delta <psi, eta> of curvature flows.

Residuals on arbitrary charts, signed powers, and a shooting solver for
rotationally symmetric profiles. A profile lives in the half-plane
(x >= 0 distance to the axis, z height) with unit tangent (cos t, sin t);
the normal is the left normal (-sin t, cos t), so a sphere traversed from
its south pole has positive curvatures.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import measure as ms
from ._ode import rk4_step
from .geom import Chart, model_inner, model_origin, sampled_revolution, shape_field
from .symfun import elementary_symmetric

AXIS_EPS = 1e-6  # umbilic limit below this distance to the axis
STEP = 1e-3
MAX_BISECT = 60
EVENT_TOL = 1e-6
EQUATOR_CLOSURE_TOL = 1e-3


class SolitonDomainError(ValueError):
    """Power of a value outside the domain of the exponent."""

    def __init__(self, msg, where=None):
        super().__init__(msg)
        self.where = where


class SingularityError(SolitonDomainError):
    pass


class AxisCollision(ValueError):
    pass


class DegenerateDenominator(ValueError):
    def __init__(self, msg, s=None):
        super().__init__(msg)
        self.s = s


def is_odd_rational(alpha) -> bool:
    if isinstance(alpha, Fraction):
        return alpha.numerator % 2 == 1 and alpha.denominator % 2 == 1
    return False


@dataclass(frozen=True)
class SolitonSpec:
    """r: order, alpha: exponent (a Fraction p/q with p, q odd is tagged
    odd-rational), delta: > 0 expander, < 0 shrinker, c: ambient curvature."""

    r: int
    alpha: float | Fraction
    delta: float
    c: float = 0.0
    odd_rational: bool | None = None

    def __post_init__(self):
        if self.alpha == 0:
            raise ValueError("alpha must be nonzero")
        if self.delta == 0:
            raise ValueError("delta must be nonzero")
        if self.r < 0:
            raise ValueError("r must be non-negative")
        tag = is_odd_rational(self.alpha)
        if self.odd_rational is None:
            object.__setattr__(self, "odd_rational", tag)
        elif self.odd_rational and not tag:
            raise ValueError("odd-rational tag needs alpha = p/q as a Fraction with p, q odd")

    @property
    def kind(self) -> str:
        return "self-expander" if self.delta > 0 else "self-shrinker"


def _is_integer(a) -> bool:
    return float(a).is_integer()


def signed_power(S, alpha, odd_rational: bool = False):
    """S^alpha: sign(S)|S|^alpha for odd-rational exponents, the real power otherwise.

    A Fraction p/q with q odd is the real q-th root raised to p, so an even
    p gives |S|^alpha (this is why S^(alpha+1) >= 0 for odd-rational alpha).
    """
    S = np.asarray(S, dtype=float)
    a = float(alpha)
    odd_rational = odd_rational or is_odd_rational(alpha)
    if a < 0 and np.any(S == 0):
        raise SingularityError(f"0 to the negative power {alpha}", np.flatnonzero(S.ravel() == 0))
    if _is_integer(a):
        out = S ** int(a) if a >= 0 else 1.0 / S ** int(-a)
    elif isinstance(alpha, Fraction) and alpha.denominator % 2 == 1:
        out = np.abs(S) ** a * (np.sign(S) if alpha.numerator % 2 else 1.0)
    elif odd_rational:
        out = np.sign(S) * np.abs(S) ** a
    else:
        bad = S <= 0
        if np.any(bad):
            raise SolitonDomainError(f"non-positive base for the untagged exponent {alpha}",
                                     np.flatnonzero(bad.ravel()))
        out = S**a
    return float(out) if out.ndim == 0 else out


def inverse_power(T, alpha, odd_rational: bool = False):
    """Solve S^alpha = T for S."""
    if isinstance(alpha, Fraction):
        inv = 1 / alpha
    else:
        inv = 1.0 / float(alpha)
    return signed_power(T, inv, odd_rational or is_odd_rational(alpha))


# -- residuals ------------------------------------------------------------------


@dataclass
class Residual:
    values: np.ndarray
    sup: float
    S: np.ndarray  # S_{r+1}
    support: np.ndarray  # <psi, eta> or <G(rho) grad rho, eta>
    U: np.ndarray
    orientation: int = 1
    flipped: "Residual | None" = None


def support_function(c: float, X, normal) -> np.ndarray:
    """<G(rho) grad rho, eta> with G = S_c about the model origin (<psi, eta> when c = 0)."""
    X = np.atleast_2d(X)
    o = model_origin(c, X.shape[1])
    Xbar = X - o if c == 0 else -(o[None, :] - c * model_inner(c, X, o)[:, None] * X)
    return model_inner(c, Xbar, normal)


def _residual(spec: SolitonSpec, lam, X, normal, U, sign):
    lam = sign * lam
    k = spec.r + 1
    S = elementary_symmetric(lam, k)[:, k] if k <= lam.shape[1] else np.zeros(len(lam))
    sup = support_function(spec.c, X, sign * normal)
    try:
        lhs = signed_power(S, spec.alpha, spec.odd_rational)
    except SolitonDomainError as e:
        idx = int(np.atleast_1d(e.where)[0]) if e.where is not None and len(np.atleast_1d(e.where)) else None
        where = None if idx is None else U[idx]
        raise type(e)(f"{e} at parameter {where}", where) from None
    vals = lhs - spec.delta * sup
    return Residual(vals, float(np.max(np.abs(vals))) if len(vals) else 0.0, S, sup, U, sign)


def soliton_residual(surface: Chart, spec: SolitonSpec, U=None, n: int = 8, both: bool = False) -> Residual:
    """Per-sample residual S_{r+1}^alpha - delta <psi, eta> on ``surface``.

    U: parameter samples (default: Gauss nodes of the whole chart).
    both: also evaluate with the opposite orientation (``.flipped``).
    """
    if surface.c != spec.c:
        raise ValueError(f"surface lives in c = {surface.c}, spec declares c = {spec.c}")
    if U is None:
        sf = ms.sample_interior(ms.whole(surface), n).field
    else:
        sf = shape_field(surface, np.atleast_2d(np.asarray(U, dtype=float)))
    res = _residual(spec, sf.lambdas, sf.X, sf.normal, sf.u, 1)
    if both:
        res.flipped = _residual(spec, sf.lambdas, sf.X, sf.normal, sf.u, -1)
    return res


# -- rotationally symmetric profiles ----------------------------------------------


@dataclass
class ProfileState:
    s: np.ndarray
    x: np.ndarray
    z: np.ndarray
    theta: np.ndarray
    theta_prime: np.ndarray | None = None


def revolution_curvatures(state: ProfileState, m: int):
    """(kappa_profile, kappa_rot) along a profile; kappa_rot has multiplicity m-1."""
    x = np.asarray(state.x, dtype=float)
    if np.any(x <= 0):
        i = int(np.flatnonzero(x <= 0)[0])
        raise AxisCollision(f"profile meets the axis at s = {float(np.atleast_1d(state.s)[i]):.6g}")
    th = np.asarray(state.theta, dtype=float)
    kp = state.theta_prime if state.theta_prime is not None else np.gradient(th, state.s)
    return np.asarray(kp, dtype=float), np.sin(th) / x


def revolution_S(kp, kr, m: int, k: int):
    """S_k of the spectrum (kp, kr, ..., kr)."""
    return math.comb(m - 1, k) * kr**k + math.comb(m - 1, k - 1) * kp * kr ** (k - 1)


class ProfileODE:
    """(x, z, theta)' with theta' solved pointwise from the soliton equation."""

    def __init__(self, spec: SolitonSpec, m: int):
        if spec.c != 0:
            raise NotImplementedError("profile shooting is implemented for flat ambients only")
        if not 0 <= spec.r <= m - 1:
            raise ValueError("need 0 <= r <= m - 1")
        self.spec, self.m = spec, m
        self.k = spec.r + 1

    def target(self, x, z, th):
        """S_{r+1} demanded by the equation at the current point."""
        sup = -x * math.sin(th) + z * math.cos(th)
        return float(inverse_power(self.spec.delta * sup, self.spec.alpha, self.spec.odd_rational))

    def theta_prime(self, s, x, z, th):
        T = self.target(x, z, th)
        m, k = self.m, self.k
        if x < AXIS_EPS:
            # umbilic limit at the axis: C(m, k) kappa^k = T
            kap = T / math.comb(m, k)
            if k > 1:
                if kap < 0 and k % 2 == 0:
                    raise SolitonDomainError(f"no real umbilic curvature at the axis (s = {s:.6g})")
                kap = math.copysign(abs(kap) ** (1.0 / k), kap)
            return kap
        kr = math.sin(th) / x
        den = math.comb(m - 1, k - 1) * kr ** (k - 1)
        if den == 0 or (k > 1 and abs(kr) < 1e-14):
            raise DegenerateDenominator(f"kappa_rot vanishes at s = {s:.6g}", s)
        return (T - math.comb(m - 1, k) * kr**k) / den

    def __call__(self, s, y):
        x, z, th = y
        return (math.cos(th), math.sin(th), self.theta_prime(s, x, z, th))


@dataclass
class Trajectory:
    start: float
    state: ProfileState
    status: str  # closed | escaped | complete | axis
    event: float


def _refine(ode, s, y, h, fn):
    """Shorten the last step so that fn(state) = 0; fn(y) and fn(step(h)) differ in sign."""
    def g(tau):
        return fn(rk4_step(ode, s, y, tau))

    tau = brentq(g, 0.0, h, xtol=1e-15, rtol=1e-14)
    return s + tau, rk4_step(ode, s, y, tau)


def integrate_profile(spec: SolitonSpec, m: int, start: float, mode: str = "axis", s_max: float = 50.0,
                      h: float = STEP, escape: float = 1e3, until: str = "closure") -> Trajectory:
    """Profile from the axis at height ``start`` (mode "axis") or from the
    point (start, 0) with a vertical tangent (mode "equator").

    until="equator" stops where the tangent first turns vertical
    (theta = pi/2) and records z there; until="closure" runs to theta = pi
    (event x) or back to the axis (event -(pi - theta)).
    """
    ode = ProfileODE(spec, m)
    if mode == "axis":
        y = (0.0, float(start), 0.0)
    elif mode == "equator":
        if not start > 0:
            raise ValueError("equator start needs x0 > 0")
        y = (float(start), 0.0, math.pi / 2)
    else:
        raise ValueError(f"unknown start mode {mode!r}")
    s = 0.0
    ss, ys, tps = [s], [y], [ode.theta_prime(s, *y)]
    status, event = "complete", float("nan")
    n = int(math.ceil(s_max / h))
    for _ in range(n):
        y1 = rk4_step(ode, s, y, h)
        if until == "equator" and y1[2] >= math.pi / 2:
            s, y = _refine(ode, s, y, h, lambda v: v[2] - math.pi / 2)
            status, event = "equator", y[1]
        elif until == "closure" and y1[2] >= math.pi:
            s, y = _refine(ode, s, y, h, lambda v: v[2] - math.pi)
            status, event = "closed", y[0]
        elif y1[0] <= 0.0 and s > 0:
            s, y = _refine(ode, s, y, h, lambda v: v[0])
            status, event = "axis", -(math.pi - y[2])
        elif not all(map(math.isfinite, y1)) or math.hypot(y1[0], y1[1]) > escape:
            status = "escaped"
            break
        else:
            s, y = s + h, y1
        ss.append(s)
        ys.append(y)
        tps.append(ode.theta_prime(s, *y))
        if status != "complete":
            break
    Y = np.array(ys)
    st = ProfileState(np.array(ss), Y[:, 0], Y[:, 1], Y[:, 2], np.array(tps))
    return Trajectory(float(start), st, status, float(event))


@dataclass
class ShootResult:
    spec: SolitonSpec
    m: int
    start: float
    trajectory: Trajectory
    radius: float
    closed: bool
    event: float
    iterations: int
    richardson: float
    flags: dict = field(default_factory=dict)

    @property
    def profile(self) -> ProfileState:
        return self.trajectory.state


def reflect(st: ProfileState, mode: str) -> ProfileState:
    """Complete a half profile ending (axis mode) or starting (equator mode)
    on the equator by the reflection z -> 2 z_e - z, theta -> pi - theta,
    z_e the height of the vertical tangent."""
    if mode == "axis":
        if len(st.s) > 2 and st.s[-1] - st.s[-2] < 0.25 * (st.s[-2] - st.s[-3]):
            keep = np.r_[np.arange(len(st.s) - 2), len(st.s) - 1]  # drop a near-duplicate node
            st = ProfileState(*(a[keep] for a in (st.s, st.x, st.z, st.theta, st.theta_prime)))
        L, ze = st.s[-1], st.z[-1]
        tail = slice(None, -1)
        s = np.r_[st.s, 2 * L - st.s[tail][::-1]]
        x = np.r_[st.x, st.x[tail][::-1]]
        z = np.r_[st.z, 2 * ze - st.z[tail][::-1]]
        th = np.r_[st.theta, math.pi - st.theta[tail][::-1]]
        tp = np.r_[st.theta_prime, st.theta_prime[tail][::-1]]
    else:
        L = st.s[-1]
        head = slice(1, None)
        s = np.r_[L - st.s[head][::-1], L + st.s]
        x = np.r_[st.x[head][::-1], st.x]
        z = np.r_[2 * st.z[0] - st.z[head][::-1], st.z]
        th = np.r_[math.pi - st.theta[head][::-1], st.theta]
        tp = np.r_[st.theta_prime[head][::-1], st.theta_prime]
    return ProfileState(s, x, z, th, tp)


def _event(tr: Trajectory) -> float:
    return tr.event if tr.status in ("equator", "closed", "axis") else float("nan")


def shoot(spec: SolitonSpec, m: int, mode: str = "axis", bracket=None, scan: int = 16,
          s_max: float = 50.0, h: float = STEP, tol: float = EVENT_TOL, richardson: bool = True) -> ShootResult:
    """Bisection on the start parameter for a closed profile.

    Axis starts aim at the equator: the equation is symmetric under
    z -> -z, so a profile crossing z = 0 with a vertical tangent closes up
    by reflection; the event is z where theta first reaches pi/2. Equator
    starts aim at the axis: the event is x where theta reaches pi, or
    -(pi - theta) when the axis comes first. Both vanish on closed
    embedded profiles. The accepted start is then integrated through to
    theta = pi and the closure recorded.
    """
    if bracket is None:
        bracket = (-4.0, -0.5) if mode == "axis" else (0.5, 4.0)
    until = "equator" if mode == "axis" else "closure"

    def run(a, step=h, to=until):
        return integrate_profile(spec, m, float(a), mode, s_max, step, until=to)

    grid = np.linspace(bracket[0], bracket[1], scan)
    events = [_event(run(a)) for a in grid]
    it, mid, e = 0, None, float("nan")
    if mode == "equator":
        # the event x(theta = pi) touches zero without changing sign
        mags = np.array([abs(v) if math.isfinite(v) else np.inf for v in events])
        i = int(np.argmin(mags))
        if not np.isfinite(mags[i]):
            raise ValueError(f"closure event undefined on the whole bracket {bracket}")
        a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]

        def objective(v):
            ev = _event(run(v))
            return abs(ev) if math.isfinite(ev) else 1e3

        opt = minimize_scalar(objective, bounds=(a, b), method="bounded",
                              options={"xatol": 1e-10, "maxiter": MAX_BISECT})
        mid, it = float(opt.x), int(opt.nfev)
        e = _event(run(mid))
    else:
        lo = hi = None
        for a, b, ea, eb in zip(grid[:-1], grid[1:], events[:-1], events[1:]):
            if math.isfinite(ea) and math.isfinite(eb) and ea * eb <= 0:
                lo, hi, elo = float(a), float(b), ea
                break
        if lo is None:
            raise ValueError(f"no sign change of the closure event on {bracket}: {events}")
        for it in range(1, MAX_BISECT + 1):
            mid = 0.5 * (lo + hi)
            e = _event(run(mid))
            if not math.isfinite(e):
                raise ValueError(f"closure event undefined at start {mid}")
            if abs(e) <= tol and hi - lo <= tol:
                break
            if (e <= 0) == (elo <= 0):
                lo, elo = mid, e
            else:
                hi = mid
    half = run(mid)
    if mode == "equator":
        half = run(mid, to="closure")
    forward = run(mid, to="closure") if mode == "axis" else half
    full = Trajectory(mid, reflect(half.state, mode), half.status, half.event)
    st = full.state
    radius = float(np.mean(np.hypot(st.x, st.z)))
    rich = float("nan")
    if richardson:
        rich = abs(_event(run(mid, h / 2)) - e)
    # the axis is a singular point of the ODE: integrating through the
    # second half amplifies round-off, so it is reported, not used
    flags = {"unit speed": "exact (angle parametrisation)", "status": half.status, "aim event": e,
             "forward closure event": forward.event, "profile": "half profile reflected in z = 0"}
    # near the axis the equator-start event behaves like a square root of
    # the start offset, so it gets a looser closure tolerance
    closed = abs(e) <= (10 * tol if mode == "axis" else EQUATOR_CLOSURE_TOL)
    return ShootResult(spec, m, mid, full, radius, closed, e, it, rich, flags)


def profile_residual(res: ShootResult) -> np.ndarray:
    """Equation residual along the profile; on the axis the rotational
    curvature takes its umbilic limit theta'."""
    st = res.profile
    keep = st.x > AXIS_EPS
    kp = np.asarray(st.theta_prime, dtype=float)
    kr = np.where(keep, np.sin(st.theta) / np.where(keep, st.x, 1.0), kp)
    S = revolution_S(kp, kr, res.m, res.spec.r + 1)
    sup = -st.x * np.sin(st.theta) + st.z * np.cos(st.theta)
    return signed_power(S, res.spec.alpha, res.spec.odd_rational) - res.spec.delta * sup


def profile_surface(res: ShootResult) -> Chart:
    st = res.profile
    return sampled_revolution(st.s, st.x, st.z, res.m)


def loop_residual(res: ShootResult, margin: float = 0.1, n: int = 41) -> Residual:
    """Residual of the shooting output re-evaluated on the spline surface of
    revolution, on interior arc lengths s in [margin, 1 - margin] * length."""
    ch = profile_surface(res)
    L = float(res.profile.s[-1])
    s = np.linspace(margin * L, (1 - margin) * L, n)
    mid = 0.5 * (np.array(ch.lo[1:]) + np.array(ch.hi[1:]))
    U = np.column_stack([s, np.tile(mid, (n, 1))])
    return soliton_residual(ch, res.spec, U)


def write_profile_csv(res: ShootResult, path):
    st = res.profile
    keep = st.x > AXIS_EPS
    kr = np.where(keep, np.sin(st.theta) / np.where(keep, st.x, 1.0), st.theta_prime)
    resid = profile_residual(res)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        w.writerow(["s", "x", "z", "theta", "kappa1", "kappa2", "residual"])
        for row in zip(st.s, st.x, st.z, st.theta, st.theta_prime, kr, resid):
            w.writerow([format(float(v), ".17g") for v in row])


# -- rigidity statement ----------------------------------------------------------------


@dataclass
class SolitonCheck:
    checks: dict
    label: str
    residual: float
    triple_zero: bool | None
    infeasible_at: list | None
    scan: object = None

    def to_dict(self) -> dict:
        return {
            "checks": dict(self.checks),
            "label": self.label,
            "residual": self.residual,
            "triple_zero": self.triple_zero,
            "infeasible_at": self.infeasible_at,
            "scan": None if self.scan is None else self.scan.to_dict(),
        }


def theorem_5_2_check(surface: Chart, spec: SolitonSpec, x0=None, radii=(1.0, 2.0, 4.0, 8.0, 16.0),
                      tol: float = 1e-6, n: int = 8) -> SolitonCheck:
    """Hypotheses of the hyperplane / nonexistence statement for homothetic solitons."""
    from .rigidity import NOT_MET, VERIFIED, decay_scan

    if surface.c != 0:
        raise ValueError("the statement is for flat ambients")
    m, r = surface.m, spec.r
    sf = ms.sample_interior(ms.whole(surface), n).field
    lam = sf.lambdas
    S = elementary_symmetric(lam, min(r + 1, m))
    Sr, Sr1 = S[:, r], (S[:, r + 1] if r + 1 <= m else np.zeros(len(lam)))
    scale = max(1.0, float(np.max(np.abs(lam))) if lam.size else 1.0) ** (r + 1)
    sup = support_function(0.0, sf.X, sf.normal)
    checks = {"1 <= r <= m-1": 1 <= r <= m - 1}
    checks["alpha odd-rational, or S_{r+1} >= 0"] = bool(spec.odd_rational or np.all(Sr1 >= -tol * scale))
    checks["delta S_r >= 0"] = bool(np.all(spec.delta * Sr >= -tol * scale))
    try:
        res = soliton_residual(surface, spec, sf.u)
        resid, sol = res.sup, res.sup <= tol * max(1.0, float(np.max(np.abs(sup))))
    except SolitonDomainError:
        resid, sol = float("inf"), False
    checks["solves the equation"] = bool(sol)
    scan = decay_scan(surface, x0 if x0 is not None else surface.center(), r, "A-power", radii)
    checks["decay R |A|^r"] = scan.classification == "decays-to-zero"
    triple = infeasible = None
    label = NOT_MET
    if all(checks.values()):
        if float(spec.alpha) > 0:
            z = tol * scale
            triple = bool(np.all(np.abs(Sr) <= z) and np.all(np.abs(Sr1) <= z) and np.all(np.abs(sup) <= tol))
            label = f"{VERIFIED}: hyperplane (S_r = S_r+1 = 0 = <psi, eta> on samples: {triple})"
        else:
            bad = np.flatnonzero(Sr1 <= 0)
            infeasible = [list(map(float, sf.u[i])) for i in bad[:5]]
            label = f"{VERIFIED}: no such hypersurface exists (S_r+1 > 0 fails at {len(bad)} samples)"
    return SolitonCheck(checks, label, float(resid), triple, infeasible, scan)
