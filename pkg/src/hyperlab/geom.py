"""Parametric hypersurfaces in the space-form models and their shape operators.

Ambient models
--------------
c = 0   R^{m+1} with the Euclidean product.
c > 0   the sphere |x|^2 = 1/c in R^{m+2}; only the open upper hemisphere
        x_0 > 0 around the pole o = e_0 / sqrt(c) is admissible.
c < 0   the hyperboloid <x,x>_L = 1/c, x_0 > 0, in Minkowski space R^{1,m+1}.

In all three models the second fundamental form of a hypersurface is
II_ij = <eta, d_i d_j psi> in the model inner product, because the extra
term of the ambient connection is proportional to the position vector.

Charts are built from SymPy expressions so that first and second
derivatives are exact; plain callables fall back to central differences.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
import sympy as sp

from .symfun import ShapeSpectrum

BOUNDARY, SEAM, POLE = "boundary", "seam", "pole"


class DegenerateImmersion(ValueError):
    pass


class CatalogError(ValueError):
    pass


# -- model geometry ----------------------------------------------------------


def model_dim(c: float, m: int) -> int:
    return m + 1 if c == 0 else m + 2


def model_signature(c: float, D: int) -> np.ndarray:
    sig = np.ones(D)
    if c < 0:
        sig[0] = -1.0
    return sig


def model_inner(c: float, x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.sum(x * y * model_signature(c, x.shape[-1]), axis=-1)


def model_origin(c: float, D: int) -> np.ndarray:
    o = np.zeros(D)
    if c != 0:
        o[0] = 1.0 / math.sqrt(abs(c))
    return o


def model_distance(c: float, x, y) -> np.ndarray:
    """Ambient geodesic distance between model points (broadcasting)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if c == 0:
        return np.linalg.norm(x - y, axis=-1)
    k = math.sqrt(abs(c))
    ip = model_inner(c, x, y)
    if c > 0:
        return np.arccos(np.clip(c * ip, -1.0, 1.0)) / k
    return np.arccosh(np.maximum(c * ip, 1.0)) / k


def model_point(c: float, direction, t: float, origin=None) -> np.ndarray:
    """Point at distance t from the origin along a unit spatial direction."""
    direction = np.asarray(direction, dtype=float)
    if c == 0:
        base = np.zeros(len(direction)) if origin is None else np.asarray(origin, dtype=float)
        return base + t * direction
    k = math.sqrt(abs(c))
    radial = math.cos(k * t) if c > 0 else math.cosh(k * t)
    lateral = math.sin(k * t) if c > 0 else math.sinh(k * t)
    return np.concatenate([[radial / k], lateral / k * direction])


# -- charts -----------------------------------------------------------------------


def _lambdify_stack(symbols, exprs, shape):
    """Vectorized evaluator for a nested list of expressions of given shape."""
    flat = [sp.sympify(e) for e in np.array(exprs, dtype=object).ravel()]
    fn = sp.lambdify(symbols, flat, modules="numpy", cse=True)

    def evaluate(U):
        U = np.atleast_2d(np.asarray(U, dtype=float))
        vals = fn(*U.T)
        n = U.shape[0]
        out = np.empty((n, len(flat)))
        for k, v in enumerate(vals):
            out[:, k] = np.broadcast_to(np.asarray(v, dtype=float), (n,))
        return out.reshape((n,) + tuple(shape))

    return evaluate


@dataclass(frozen=True)
class Chart:
    """Immersion psi: box in R^m -> ambient model with c.

    ``faces[i] = (low, high)`` classifies the faces of the parameter box as
    boundary, seam (identified with the opposite face) or pole (collapsed).
    """

    name: str
    m: int
    c: float
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    faces: tuple[tuple[str, str], ...]
    jet_fn: Callable = field(repr=False, compare=False)
    normal_sign: float = 1.0
    symbols: tuple | None = field(default=None, repr=False, compare=False)
    exprs: tuple | None = field(default=None, repr=False, compare=False)
    info: dict = field(default_factory=dict, repr=False, compare=False)
    analytic: bool = True

    @property
    def D(self) -> int:
        return model_dim(self.c, self.m)

    def jets(self, U):
        """Positions (N,D), first derivatives (N,m,D), second (N,m,m,D)."""
        return self.jet_fn(np.atleast_2d(np.asarray(U, dtype=float)))

    def positions(self, U) -> np.ndarray:
        return self.jets(U)[0]

    def with_box(self, lo, hi, faces=None) -> "Chart":
        faces = self.faces if faces is None else tuple(tuple(f) for f in faces)
        return replace(self, lo=tuple(map(float, lo)), hi=tuple(map(float, hi)), faces=faces)

    def with_sign(self, sign: float) -> "Chart":
        return replace(self, normal_sign=float(np.sign(sign) or 1.0))

    def flipped(self) -> "Chart":
        return replace(self, normal_sign=-self.normal_sign)

    def reparametrize(self, name, new_symbols, substitutions, lo, hi, faces, **info) -> "Chart":
        """Compose with a SymPy map from new parameters to the current ones."""
        if self.exprs is None:
            raise ValueError("only SymPy charts can be reparametrized")
        mapping = dict(zip(self.symbols, substitutions))
        exprs = [sp.sympify(e).subs(mapping, simultaneous=True) for e in self.exprs]
        merged = {k: v for k, v in self.info.items() if k not in ("ball", "distance")}
        merged.update(info)
        merged["parent"] = self
        merged["to_parent"] = _lambdify_stack(new_symbols, list(substitutions), (len(substitutions),))
        return from_sympy(
            name, new_symbols, exprs, self.c, lo, hi, faces, normal_sign=self.normal_sign, **merged
        )

    def center(self) -> np.ndarray:
        return 0.5 * (np.array(self.lo) + np.array(self.hi))


def from_sympy(name, symbols, exprs, c, lo, hi, faces=None, normal_sign=1.0, **info) -> Chart:
    symbols = tuple(symbols)
    exprs = tuple(sp.sympify(e) for e in exprs)
    m, D = len(symbols), len(exprs)
    if D != model_dim(c, m):
        raise ValueError(f"{name}: {D} coordinates given, model for c={c}, m={m} needs {model_dim(c, m)}")
    jac = [[sp.diff(e, s) for e in exprs] for s in symbols]
    hess = [[[sp.diff(e, s1, s2) for e in exprs] for s2 in symbols] for s1 in symbols]
    f0 = _lambdify_stack(symbols, list(exprs), (D,))
    f1 = _lambdify_stack(symbols, jac, (m, D))
    f2 = _lambdify_stack(symbols, hess, (m, m, D))

    def jet(U):
        return f0(U), f1(U), f2(U)

    if faces is None:
        faces = tuple((BOUNDARY, BOUNDARY) for _ in range(m))
    return Chart(
        name=name,
        m=m,
        c=float(c),
        lo=tuple(float(x) for x in lo),
        hi=tuple(float(x) for x in hi),
        faces=tuple(tuple(f) for f in faces),
        jet_fn=jet,
        normal_sign=float(normal_sign),
        symbols=symbols,
        exprs=exprs,
        info=dict(info),
    )


def from_function(name, fn, m, c, lo, hi, faces=None, normal_sign=1.0, h_fd=None, **info) -> Chart:
    """Chart from a vectorized callable U (N,m) -> X (N,D), with FD jets.

    The default step is 1e-4 times the parameter-box scale.
    """
    lo = tuple(float(x) for x in lo)
    hi = tuple(float(x) for x in hi)
    scale = max(b - a for a, b in zip(lo, hi))
    h = 1e-4 * scale if h_fd is None else float(h_fd)

    def jet(U):
        U = np.atleast_2d(U)
        X = np.asarray(fn(U), dtype=float)
        N, D = X.shape
        J = np.empty((N, m, D))
        H = np.empty((N, m, m, D))
        E = np.eye(m) * h
        plus = [np.asarray(fn(U + E[i]), dtype=float) for i in range(m)]
        minus = [np.asarray(fn(U - E[i]), dtype=float) for i in range(m)]
        for i in range(m):
            J[:, i] = (plus[i] - minus[i]) / (2 * h)
            H[:, i, i] = (plus[i] - 2 * X + minus[i]) / h**2
            for j in range(i + 1, m):
                pp = fn(U + E[i] + E[j])
                pm = fn(U + E[i] - E[j])
                mp = fn(U - E[i] + E[j])
                mm = fn(U - E[i] - E[j])
                H[:, i, j] = H[:, j, i] = (np.asarray(pp) - pm - mp + mm) / (4 * h * h)
        return X, J, H

    if faces is None:
        faces = tuple((BOUNDARY, BOUNDARY) for _ in range(m))
    return Chart(name, m, float(c), lo, hi, tuple(tuple(f) for f in faces), jet, float(normal_sign),
                 info=dict(info), analytic=False)


# -- shape operator ----------------------------------------------------------------


@dataclass(frozen=True)
class SurfacePoint:
    u: np.ndarray
    position: np.ndarray
    normal: np.ndarray
    I: np.ndarray
    II: np.ndarray
    A: np.ndarray  # matrix of the shape operator in parameter coordinates, I^-1 II
    spectrum: ShapeSpectrum
    directions: np.ndarray  # ambient unit principal directions, rows
    asymmetry: float


@dataclass
class ShapeField:
    """Shape data for a batch of parameter points."""

    c: float
    u: np.ndarray  # (N,m)
    X: np.ndarray  # (N,D)
    J: np.ndarray  # (N,m,D)
    normal: np.ndarray  # (N,D)
    I: np.ndarray  # (N,m,m)
    II: np.ndarray  # (N,m,m)
    lambdas: np.ndarray  # (N,m) ascending
    W: np.ndarray  # (N,m,m) eigenvectors of L^-1 II L^-T
    Linv: np.ndarray  # (N,m,m)
    sqrt_det: np.ndarray  # (N,)
    asymmetry: np.ndarray  # (N,)

    def __len__(self):
        return len(self.u)

    def frame_components(self, du: np.ndarray) -> np.ndarray:
        """Components of a gradient, given its parameter differential (N,m),
        in the orthonormal principal frame."""
        v = np.einsum("nij,nj->ni", self.Linv, du)
        return np.einsum("nji,nj->ni", self.W, v)

    def directions(self) -> np.ndarray:
        """Ambient unit principal directions (N,m,D), one per row."""
        V = np.einsum("nji,njk->nik", self.Linv, self.W)  # (N, m params, m dirs)
        return np.einsum("nik,nid->nkd", V, self.J)

    def point(self, i: int) -> SurfacePoint:
        A = np.linalg.solve(self.I[i], self.II[i])
        return SurfacePoint(
            u=self.u[i],
            position=self.X[i],
            normal=self.normal[i],
            I=self.I[i],
            II=self.II[i],
            A=A,
            spectrum=ShapeSpectrum(tuple(self.lambdas[i])),
            directions=self.directions()[i],
            asymmetry=float(self.asymmetry[i]),
        )


def _cofactor_normal(rows: np.ndarray) -> np.ndarray:
    """Generalized cross product of D-1 row vectors in R^D (batched)."""
    N, k, D = rows.shape
    out = np.empty((N, D))
    for j in range(D):
        minor = np.delete(rows, j, axis=2)
        out[:, j] = (-1) ** j * np.linalg.det(minor)
    return out


def shape_field(chart: Chart, U, rank_tol: float = 1e-10) -> ShapeField:
    U = np.atleast_2d(np.asarray(U, dtype=float))
    X, J, H = chart.jets(U)
    c = chart.c
    D = X.shape[1]
    sig = model_signature(c, D)
    I = np.einsum("nid,njd,d->nij", J, J, sig)
    ev = np.linalg.eigvalsh(I)
    bad = ~(ev[:, 0] > (rank_tol**2) * np.abs(ev[:, -1]))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DegenerateImmersion(f"{chart.name}: rank-deficient differential at u={U[i].tolist()}")
    rows = J if c == 0 else np.concatenate([J, X[:, None, :]], axis=1)
    n = _cofactor_normal(rows) * sig
    nn = np.sqrt(np.abs(np.einsum("nd,nd,d->n", n, n, sig)))
    eta = chart.normal_sign * n / nn[:, None]
    II = np.einsum("nd,nijd,d->nij", eta, H, sig)
    asym = np.max(np.abs(II - np.swapaxes(II, 1, 2)), axis=(1, 2)) / (1e-300 + np.max(np.abs(II), axis=(1, 2)))
    II = 0.5 * (II + np.swapaxes(II, 1, 2))
    L = np.linalg.cholesky(I)
    Linv = np.linalg.inv(L)
    At = Linv @ II @ np.swapaxes(Linv, 1, 2)
    At = 0.5 * (At + np.swapaxes(At, 1, 2))
    lam, W = np.linalg.eigh(At)
    sqrt_det = np.prod(np.diagonal(L, axis1=1, axis2=2), axis=1)
    return ShapeField(c, U, X, J, eta, I, II, lam, W, Linv, sqrt_det, asym)


def shape_at(chart: Chart, u) -> SurfacePoint:
    u = np.asarray(u, dtype=float).reshape(1, -1)
    return shape_field(chart, u).point(0)


def orient_toward(chart: Chart, u_ref, target) -> Chart:
    """Fix the normal sign so that eta points toward ``target`` at u_ref."""
    probe = shape_field(chart.with_sign(1.0), np.atleast_2d(u_ref))
    d = np.asarray(target, dtype=float) - probe.X[0]
    s = float(model_inner(chart.c, probe.normal[0], d))
    if abs(s) < 1e-14:
        raise ValueError("reference direction is tangent; cannot orient")
    return chart.with_sign(1.0 if s > 0 else -1.0)


# -- catalog -----------------------------------------------------------------------


def _symbols(m, prefix="u"):
    return tuple(sp.symbols(f"{prefix}0:{m}", real=True))


def unit_sphere_exprs(angles):
    """Hyperspherical coordinates of S^k, k = len(angles); last angle is azimuthal."""
    k = len(angles)
    if k == 1:
        return [sp.cos(angles[0]), sp.sin(angles[0])]
    out = []
    prod = sp.Integer(1)
    for i in range(k - 1):
        out.append(prod * sp.cos(angles[i]))
        prod = prod * sp.sin(angles[i])
    out.append(prod * sp.cos(angles[-1]))
    out.append(prod * sp.sin(angles[-1]))
    return out


def unit_sphere_box(k):
    lo = [0.0] * k
    hi = [math.pi] * (k - 1) + [2 * math.pi]
    faces = [(POLE, POLE)] * (k - 1) + [(SEAM, SEAM)]
    return lo, hi, faces


def unit_sphere_point(angles) -> np.ndarray:
    vals = [float(v) for v in unit_sphere_exprs([sp.Float(a) for a in angles])]
    return np.array(vals)


def _rotation_to(v) -> np.ndarray:
    """Orthogonal matrix Q with Q e_0 = v / |v| (Householder)."""
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    e = np.zeros_like(v)
    e[0] = 1.0
    w = e - v
    if np.linalg.norm(w) < 1e-14:
        return np.eye(len(v))
    w = w / np.linalg.norm(w)
    return np.eye(len(v)) - 2 * np.outer(w, w)


def _matvec(Q, vec):
    return [sp.nsimplify(0) + sum(sp.Float(Q[i, j]) * vec[j] for j in range(len(vec))) for i in range(len(vec))]


def plane(m: int = 2, extent: float = 1.0, offset: float = 0.0) -> Chart:
    """Hyperplane x_m = offset, parameter box [-extent, extent]^m, normal +e_m."""
    u = _symbols(m)
    exprs = list(u) + [sp.Float(offset)]
    ch = from_sympy("plane", u, exprs, 0.0, [-extent] * m, [extent] * m, kind="plane",
                    params={"m": m, "extent": extent, "offset": offset})
    up = np.zeros(m + 1)
    up[-1] = 1.0
    ch = orient_toward(ch, np.zeros(m), np.r_[np.zeros(m), offset] + up)
    info = dict(ch.info)
    info["distance"] = lambda U0, U: np.linalg.norm(np.atleast_2d(U) - np.asarray(U0, dtype=float), axis=-1)
    info["ball"] = lambda u0, R: _plane_ball(ch, u0, R)
    return replace(ch, info=info)


def _plane_ball(ch: Chart, u0, R):
    m = ch.m
    s = sp.Symbol("s", positive=True)
    ang = _symbols(m - 1, "w")
    om = unit_sphere_exprs(ang)
    sub = [sp.Float(float(u0[i])) + s * om[i] for i in range(m)]
    alo, ahi, afaces = unit_sphere_box(m - 1)
    ball = ch.reparametrize(
        f"plane-ball(R={R})", (s,) + ang, sub, [0.0] + alo, [R] + ahi, [(POLE, BOUNDARY)] + afaces,
        radial_axis=0, radial_scale=1.0,
    )
    return [ball], False


def sphere(R: float = 1.0, m: int = 2) -> Chart:
    """Round sphere of radius R centred at the origin of R^{m+1}; inward normal."""
    if not R > 0:
        raise CatalogError("sphere radius must be positive")
    u = _symbols(m)
    exprs = [sp.Float(R) * e for e in unit_sphere_exprs(u)]
    lo, hi, faces = unit_sphere_box(m)
    ch = from_sympy("sphere", u, exprs, 0.0, lo, hi, faces, kind="sphere", params={"R": R, "m": m},
                    closed=True)
    ch = orient_toward(ch, 0.5 * (np.array(lo) + np.array(hi)), np.zeros(m + 1))
    info = dict(ch.info)

    def distance(U0, U):
        x0 = ch.positions(np.atleast_2d(U0))[0]
        X = ch.positions(U)
        return R * np.arccos(np.clip(X @ x0 / R**2, -1.0, 1.0))

    info["distance"] = distance
    info["ball"] = lambda u0, rad: _sphere_ball(ch, u0, rad)
    info["intrinsic_diameter"] = math.pi * R
    return replace(ch, info=info)


def _rotated_sphere_chart(R, m, axis_point, name):
    u = _symbols(m)
    Q = _rotation_to(axis_point)
    base = [sp.Float(R) * e for e in unit_sphere_exprs(u)]
    exprs = _matvec(Q, base)
    lo, hi, faces = unit_sphere_box(m)
    ch = from_sympy(name, u, exprs, 0.0, lo, hi, faces, kind="sphere", params={"R": R, "m": m})
    return orient_toward(ch, 0.5 * (np.array(lo) + np.array(hi)), np.zeros(m + 1))


def _sphere_ball(ch: Chart, u0, rad):
    R = ch.info["params"]["R"]
    m = ch.m
    x0 = ch.positions(np.atleast_2d(u0))[0]
    rot = _rotated_sphere_chart(R, m, x0, f"sphere-ball(R={rad})")
    rot = replace(rot, info={**rot.info, "radial_axis": 0, "radial_scale": R})
    if rad >= math.pi * R:
        return [rot], True
    lo, hi, faces = unit_sphere_box(m)
    hi = [rad / R] + hi[1:]
    faces = [(POLE, BOUNDARY)] + faces[1:]
    return [rot.with_box(lo, hi, faces)], False


def cylinder(R: float = 1.0, k: int = 1, m: int = 2, length: float = 2.0) -> Chart:
    """S^k(R) x R^{m-k} in R^{m+1}, axial parameters in [-length, length]; normal toward the axis."""
    if not R > 0:
        raise CatalogError("cylinder radius must be positive")
    if not 1 <= k < m:
        raise CatalogError("cylinder needs 1 <= k < m")
    u = _symbols(m)
    ang, z = u[:k], u[k:]
    exprs = [sp.Float(R) * e for e in unit_sphere_exprs(ang)] + list(z)
    alo, ahi, afaces = unit_sphere_box(k)
    lo = alo + [-length] * (m - k)
    hi = ahi + [length] * (m - k)
    faces = afaces + [(BOUNDARY, BOUNDARY)] * (m - k)
    ch = from_sympy("cylinder", u, exprs, 0.0, lo, hi, faces, kind="cylinder",
                    params={"R": R, "k": k, "m": m, "length": length})
    uref = 0.5 * (np.array(lo) + np.array(hi))
    xref = ch.positions(uref)[0]
    axis_pt = np.r_[np.zeros(k + 1), xref[k + 1 :]]
    ch = orient_toward(ch, uref, axis_pt)
    info = dict(ch.info)

    def distance(U0, U):
        U = np.atleast_2d(U)
        U0 = np.asarray(U0, dtype=float)
        dz = U[:, k:] - U0[k:]
        if k == 1:
            dth = np.mod(U[:, 0] - U0[0] + math.pi, 2 * math.pi) - math.pi
            ang_d = np.abs(dth)
        else:
            X = ch.positions(U)[:, : k + 1]
            x0 = ch.positions(np.atleast_2d(U0))[0, : k + 1]
            ang_d = np.arccos(np.clip(X @ x0 / R**2, -1.0, 1.0))
        return np.sqrt((R * ang_d) ** 2 + np.sum(dz**2, axis=1))

    info["distance"] = distance
    if k == 1:
        info["ball"] = lambda u0, rad: _cylinder_ball(ch, u0, rad)
    return replace(ch, info=info)


def _cylinder_ball(ch: Chart, u0, rad):
    R0 = ch.info["params"]["R"]
    m = ch.m
    th0, z0 = float(u0[0]), [float(v) for v in u0[1:]]
    if rad <= math.pi * R0:
        s = sp.Symbol("s", positive=True)
        ang = _symbols(m - 1, "w")
        om = unit_sphere_exprs(ang)
        sub = [sp.Float(th0) + s * om[0] / sp.Float(R0)] + [sp.Float(z0[i]) + s * om[i + 1] for i in range(m - 1)]
        alo, ahi, afaces = unit_sphere_box(m - 1)
        ball = ch.reparametrize(f"cylinder-ball(R={rad})", (s,) + ang, sub, [0.0] + alo, [rad] + ahi,
                                [(POLE, BOUNDARY)] + afaces, radial_axis=0, radial_scale=1.0)
        return [ball], False
    if m != 2:
        return None
    t, v = sp.symbols("t v", real=True)
    Z = sp.sqrt(sp.Float(rad) ** 2 - (sp.Float(R0) * t) ** 2)
    sub = [sp.Float(th0) + t, sp.Float(z0[0]) + v * Z]
    ball = ch.reparametrize(f"cylinder-ball(R={rad})", (t, v), sub, [-math.pi, -1.0], [math.pi, 1.0],
                            [(SEAM, SEAM), (BOUNDARY, BOUNDARY)])
    return [ball], False


def graph(height, m: int = 2, extent: float = 1.0) -> Chart:
    """Graph of a height function (SymPy expression or string in x0..x_{m-1}); upward normal."""
    xs = tuple(sp.symbols(f"x0:{m}", real=True))
    h = sp.sympify(height, locals={str(s): s for s in xs}) if isinstance(height, str) else sp.sympify(height)
    h = h.subs({sp.Symbol(str(s)): s for s in xs})
    if isinstance(height, (int, float)):
        h = sp.Float(height)
    ch = from_sympy("graph", xs, list(xs) + [h], 0.0, [-extent] * m, [extent] * m, kind="graph",
                    params={"height": str(height), "m": m, "extent": extent})
    x = ch.positions(np.zeros(m))[0]
    up = x.copy()
    up[-1] += 1.0
    return orient_toward(ch, np.zeros(m), up)


def revolution(x_profile, z_profile, s_range=(0.0, 1.0), m: int = 2) -> Chart:
    """Rotate the profile s -> (x(s), z(s)), x > 0, about the x_m axis.

    The normal is the left normal (-z', x') of the profile, which points to
    the inside of a sphere traversed from its south pole.
    """
    s = sp.Symbol("s", real=True)
    loc = {"s": s}
    xs = sp.sympify(x_profile, locals=loc) if isinstance(x_profile, str) else sp.sympify(x_profile)
    zs = sp.sympify(z_profile, locals=loc) if isinstance(z_profile, str) else sp.sympify(z_profile)
    ang = _symbols(m - 1, "w")
    om = unit_sphere_exprs(ang)
    exprs = [xs * o for o in om] + [zs]
    alo, ahi, afaces = unit_sphere_box(m - 1)
    ch = from_sympy("revolution", (s,) + ang, exprs, 0.0, [s_range[0]] + alo, [s_range[1]] + ahi,
                    [(BOUNDARY, BOUNDARY)] + afaces, kind="revolution",
                    params={"x": str(x_profile), "z": str(z_profile), "s_range": list(s_range), "m": m})
    uref = 0.5 * (np.array(ch.lo) + np.array(ch.hi))
    s0 = float(uref[0])
    dx = float(sp.diff(xs, s).subs(s, s0))
    dz = float(sp.diff(zs, s).subs(s, s0))
    om0 = unit_sphere_point(uref[1:])
    X0 = ch.positions(uref)[0]
    return orient_toward(ch, uref, X0 + np.r_[-dz * om0, dx])


def sampled_revolution(s, x, z, m: int = 2, k: int = 5) -> Chart:
    """Surface of revolution of a sampled profile, jets from interpolating splines."""
    from scipy.interpolate import make_interp_spline

    s = np.asarray(s, dtype=float)
    sx = make_interp_spline(s, np.asarray(x, dtype=float), k=k)
    sz = make_interp_spline(s, np.asarray(z, dtype=float), k=k)
    ang = _symbols(m - 1, "w")
    om = unit_sphere_exprs(ang)
    f_om = _lambdify_stack(ang, om, (m,))
    f_dom = _lambdify_stack(ang, [[sp.diff(o, a) for o in om] for a in ang], (m - 1, m))
    f_ddom = _lambdify_stack(ang, [[[sp.diff(o, a, b) for o in om] for b in ang] for a in ang], (m - 1, m - 1, m))

    def jet(U):
        U = np.atleast_2d(U)
        N = len(U)
        sv, av = U[:, 0], U[:, 1:]
        x0, x1, x2 = sx(sv), sx(sv, 1), sx(sv, 2)
        z0, z1, z2 = sz(sv), sz(sv, 1), sz(sv, 2)
        o, do, ddo = f_om(av), f_dom(av), f_ddom(av)
        X = np.concatenate([x0[:, None] * o, z0[:, None]], axis=1)
        J = np.zeros((N, m, m + 1))
        H = np.zeros((N, m, m, m + 1))
        J[:, 0, :m] = x1[:, None] * o
        J[:, 0, m] = z1
        J[:, 1:, :m] = x0[:, None, None] * do
        H[:, 0, 0, :m] = x2[:, None] * o
        H[:, 0, 0, m] = z2
        H[:, 0, 1:, :m] = x1[:, None, None] * do
        H[:, 1:, 0, :m] = x1[:, None, None] * do
        H[:, 1:, 1:, :m] = x0[:, None, None, None] * ddo
        return X, J, H

    alo, ahi, afaces = unit_sphere_box(m - 1)
    ch = Chart("sampled-revolution", m, 0.0, tuple([s[0]] + alo), tuple([s[-1]] + ahi),
               tuple([(BOUNDARY, BOUNDARY)] + afaces), jet, 1.0, info={"kind": "revolution"})
    uref = np.r_[s[len(s) // 2], 0.5 * (np.array(ahi) + np.array(alo))]
    om0 = unit_sphere_point(uref[1:])
    X0 = ch.positions(uref)[0]
    return orient_toward(ch, uref, X0 + np.r_[-float(sz(uref[0], 1)) * om0, float(sx(uref[0], 1))])


def geodesic_sphere(R: float, c: float = 0.0, m: int = 2) -> Chart:
    """Geodesic sphere of radius R about the model origin; normal toward the centre."""
    if not R > 0:
        raise CatalogError("geodesic sphere radius must be positive")
    if c > 0 and R >= math.pi / (2 * math.sqrt(c)):
        raise CatalogError("geodesic sphere leaves the open upper hemisphere")
    u = _symbols(m)
    om = unit_sphere_exprs(u)
    if c == 0:
        exprs = [sp.Float(R) * o for o in om]
    else:
        k = math.sqrt(abs(c))
        radial = math.cos(k * R) if c > 0 else math.cosh(k * R)
        lateral = math.sin(k * R) if c > 0 else math.sinh(k * R)
        exprs = [sp.Float(radial / k)] + [sp.Float(lateral / k) * o for o in om]
    lo, hi, faces = unit_sphere_box(m)
    ch = from_sympy("geodesic-sphere", u, exprs, c, lo, hi, faces, kind="geodesic-sphere",
                    params={"R": R, "c": c, "m": m}, closed=True)
    o = model_origin(c, model_dim(c, m))
    uref = 0.5 * (np.array(lo) + np.array(hi))
    ch = orient_toward(ch, uref, o)
    info = dict(ch.info)
    from .ambient import sc

    rho = sc(c, R)

    def distance(U0, U):
        X = ch.positions(np.atleast_2d(U))
        x0 = ch.positions(np.atleast_2d(U0))[0]
        sl = slice(0, m + 1) if c == 0 else slice(1, m + 2)
        a, b = X[:, sl], x0[sl]
        cosang = a @ b / (np.linalg.norm(a, axis=1) * np.linalg.norm(b))
        return rho * np.arccos(np.clip(cosang, -1.0, 1.0))

    info["distance"] = distance
    info["center"] = o
    info["intrinsic_diameter"] = math.pi * rho
    return replace(ch, info=info)


CATALOG_DOCS = {
    "plane": "plane(m=2, extent=1.0, offset=0.0): hyperplane x_m = offset; normal +e_m",
    "sphere": "sphere(R=1.0, m=2): round sphere about the origin; inward normal, curvatures 1/R",
    "cylinder": "cylinder(R=1.0, k=1, m=2, length=2.0): S^k(R) x R^(m-k); normal toward the axis",
    "graph": "graph(height='x0**2', m=2, extent=1.0): graph of a height function; upward normal",
    "revolution": "revolution(x='...', z='...', s_range=[a,b], m=2): profile rotated about the last axis",
    "geodesic-sphere": "geodesic-sphere(R, c=0.0, m=2): geodesic sphere about the model origin; inward normal",
}


def catalog(name: str, **params) -> Chart:
    """Build a catalog chart from its string id and keyword parameters."""
    builders = {
        "plane": lambda p: plane(int(p.get("m", 2)), float(p.get("extent", 1.0)), float(p.get("offset", 0.0))),
        "sphere": lambda p: sphere(float(p.get("R", 1.0)), int(p.get("m", 2))),
        "cylinder": lambda p: cylinder(float(p.get("R", 1.0)), int(p.get("k", 1)), int(p.get("m", 2)),
                                       float(p.get("length", 2.0))),
        "graph": lambda p: graph(p.get("height", "0"), int(p.get("m", 2)), float(p.get("extent", 1.0))),
        "revolution": lambda p: revolution(p["x"], p["z"], tuple(p.get("s_range", (0.0, 1.0))), int(p.get("m", 2))),
        "geodesic-sphere": lambda p: geodesic_sphere(float(p["R"]), float(p.get("c", 0.0)), int(p.get("m", 2))),
    }
    if name not in builders:
        raise CatalogError(f"unknown surface id {name!r}; known: {sorted(builders)}")
    try:
        return builders[name](params)
    except KeyError as exc:
        raise CatalogError(f"surface {name!r} missing parameter {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, CatalogError):
            raise
        raise CatalogError(f"surface {name!r}: invalid parameters ({exc})") from None
