"""Regions of a hypersurface, weighted quadrature, diameters and test functions.

A region is a list of chart patches (parameter boxes whose faces are marked
boundary, seam or pole) or, for surfaces without a closed-form geodesic
polar chart, a sublevel set of a grid distance field (m = 2 only).
Patch integrals use tensor Gauss-Legendre rules refined by doubling.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import sympy as sp
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize

from .distance import DistanceField, grid_distance, locate
from .geom import BOUNDARY, POLE, SEAM, Chart, ShapeField, model_distance, model_origin, shape_field

REL_TOL = 1e-6
MAX_LEVEL = 6
POINT_BUDGET = 4_000_000


class ConvergenceError(RuntimeError):
    def __init__(self, msg, last_two):
        super().__init__(f"{msg}; last two values {last_two}")
        self.last_two = last_two


class Integral(float):
    """A float carrying the achieved relative tolerance and bookkeeping."""

    def __new__(cls, value, achieved=0.0, nodes=0, points=0, flags=None):
        obj = super().__new__(cls, value)
        obj.achieved = float(achieved)
        obj.nodes = nodes
        obj.points = points
        obj.flags = dict(flags or {})
        return obj


@dataclass(frozen=True)
class LevelSet:
    """Sublevel set {dist < R} on the parameter grid of one chart."""

    chart: Chart
    field: DistanceField
    radius: float
    resolution: float


@dataclass(frozen=True)
class Region:
    surface: Chart
    patches: tuple = ()
    kind: str = "box"  # box | closed | ball | level-set
    breaks: tuple = ()  # per patch: tuple of per-axis interior breakpoints
    center: np.ndarray | None = None
    radius: float | None = None
    truncated: bool = False
    level: LevelSet | None = None
    flags: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.surface.m

    @property
    def c(self) -> float:
        return self.surface.c

    def with_breaks(self, axis: int, value: float) -> "Region":
        """Add a breakpoint on one parameter axis of every patch (used by ramps)."""
        out = []
        for p, br in zip(self.patches, self.breaks or [tuple(() for _ in range(self.m))] * len(self.patches)):
            br = list(br)
            if p.lo[axis] < value < p.hi[axis]:
                br[axis] = tuple(sorted(set(br[axis]) | {float(value)}))
            out.append(tuple(br))
        return replace(self, breaks=tuple(out))

    def has_boundary(self) -> bool:
        if self.kind == "level-set":
            return True
        return any(k == BOUNDARY for p in self.patches for f in p.faces for k in f)


def whole(chart: Chart) -> Region:
    kind = "closed" if chart.info.get("closed") else "box"
    return Region(chart, (chart,), kind, (tuple(() for _ in range(chart.m)),))


def box_region(chart: Chart, lo, hi) -> Region:
    faces = []
    for ax, (a, b) in enumerate(zip(lo, hi)):
        flo, fhi = chart.faces[ax]
        faces.append((flo if a <= chart.lo[ax] else BOUNDARY, fhi if b >= chart.hi[ax] else BOUNDARY))
        if faces[-1] != (SEAM, SEAM) and SEAM in faces[-1]:
            faces[-1] = tuple(BOUNDARY if k == SEAM else k for k in faces[-1])
    patch = chart.with_box(lo, hi, faces)
    return Region(chart, (patch,), "box", (tuple(() for _ in range(chart.m)),))


def intrinsic_ball(surface: Chart, x0, R: float, resolution: float | None = None) -> Region:
    """Geodesic ball {dist(x0, .) < R}."""
    if not R > 0:
        raise ValueError("ball radius must be positive")
    u0 = locate(surface, x0)
    hook = surface.info.get("ball")
    built = hook(u0, R) if hook is not None else None
    if built is not None:
        patches, truncated = built
        flags = {"truncated": truncated}
        if truncated:
            warnings.warn(f"ball of radius {R} covers the whole surface; region truncated", RuntimeWarning)
        kind = "closed" if truncated else "ball"
        return Region(surface, tuple(patches), kind, tuple(tuple(() for _ in range(surface.m)) for _ in patches),
                      u0, float(R), truncated, None, flags)
    if surface.m != 2:
        raise NotImplementedError("level-set balls are implemented for m = 2 only")
    if resolution is None:
        resolution = max(b - a for a, b in zip(surface.lo, surface.hi)) / 160
    dist = grid_distance(surface, u0, resolution)
    inside = dist.values < R
    flags = {"truncated": bool(np.all(inside))}
    # the closure must stay away from the chart faces that are real boundary
    G = dist.points
    margin_ok = True
    for ax, (flo, fhi) in enumerate(surface.faces):
        for side, kind in ((surface.lo[ax], flo), (surface.hi[ax], fhi)):
            if kind == BOUNDARY:
                near = np.abs(G[:, ax] - side) <= 2 * resolution * 1.0001
                margin_ok &= not np.any(inside & near)
    flags["closure-inside"] = bool(margin_ok)
    if not margin_ok:
        warnings.warn("ball reaches the edge of the chart; region truncated", RuntimeWarning)
        flags["truncated"] = True
    return Region(surface, (), "level-set", (), u0, float(R), flags["truncated"],
                  LevelSet(surface, dist, float(R), float(resolution)), flags)


# -- sampling -----------------------------------------------------------------


@dataclass
class Samples:
    """Quadrature nodes with weights (parameter weight times area element)."""

    field: ShapeField
    weights: np.ndarray
    patch: np.ndarray  # patch index per node
    region: Region
    boundary: bool = False

    @property
    def lambdas(self):
        return self.field.lambdas

    def __len__(self):
        return len(self.weights)


def _rule_1d(a, b, n, breaks=()):
    pts = [a] + [x for x in breaks if a < x < b] + [b]
    x, w = leggauss(n)
    xs, ws = [], []
    for lo, hi in zip(pts[:-1], pts[1:]):
        xs.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * w)
    return np.concatenate(xs), np.concatenate(ws)


def _tensor(rules):
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    U = np.stack([g.ravel() for g in grids], -1)
    W = np.prod(np.stack([g.ravel() for g in wgrids], -1), axis=1)
    return U, W


def _patch_breaks(region, i):
    if region.breaks and i < len(region.breaks):
        return region.breaks[i]
    return tuple(() for _ in range(region.m))


def sample_interior(region: Region, n: int) -> Samples:
    if region.kind == "level-set":
        return _levelset_interior(region, region.level.resolution)
    fields, weights, idx = [], [], []
    for i, p in enumerate(region.patches):
        br = _patch_breaks(region, i)
        U, W = _tensor([_rule_1d(a, b, n, br[ax]) for ax, (a, b) in enumerate(zip(p.lo, p.hi))])
        sf = shape_field(p, U)
        fields.append(sf)
        weights.append(W * sf.sqrt_det)
        idx.append(np.full(len(W), i))
    return Samples(_concat_fields(fields), np.concatenate(weights), np.concatenate(idx), region)


def boundary_faces(patch: Chart):
    for ax, (flo, fhi) in enumerate(patch.faces):
        if flo == BOUNDARY:
            yield ax, patch.lo[ax]
        if fhi == BOUNDARY:
            yield ax, patch.hi[ax]


def sample_boundary(region: Region, n: int) -> Samples | None:
    if region.kind == "level-set":
        return _levelset_boundary(region, region.level.resolution)
    fields, weights, idx = [], [], []
    m = region.m
    for i, p in enumerate(region.patches):
        br = _patch_breaks(region, i)
        for ax, val in boundary_faces(p):
            others = [k for k in range(m) if k != ax]
            if others:
                V, W = _tensor([_rule_1d(p.lo[k], p.hi[k], n, br[k]) for k in others])
            else:
                V, W = np.zeros((1, 0)), np.ones(1)
            U = np.empty((len(W), m))
            U[:, others] = V
            U[:, ax] = val
            sf = shape_field(p, U)
            Jt = sf.J[:, others, :]
            sig = np.ones(sf.X.shape[1])
            if region.c < 0:
                sig[0] = -1.0
            Gm = np.einsum("nid,njd,d->nij", Jt, Jt, sig)
            el = np.sqrt(np.maximum(np.linalg.det(Gm), 0.0)) if others else np.ones(len(W))
            fields.append(sf)
            weights.append(W * el)
            idx.append(np.full(len(W), i))
    if not fields:
        return None
    return Samples(_concat_fields(fields), np.concatenate(weights), np.concatenate(idx), region, True)


def _concat_fields(fields) -> ShapeField:
    if len(fields) == 1:
        return fields[0]
    f0 = fields[0]
    cat = {k: np.concatenate([getattr(f, k) for f in fields]) for k in
           ("u", "X", "J", "normal", "I", "II", "lambdas", "W", "Linv", "sqrt_det", "asymmetry")}
    return ShapeField(c=f0.c, **cat)


# -- level-set regions (marching triangles on the distance grid) ---------------


def _cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _grid_triangles(level: LevelSet):
    """Parameter grid triangles with distance values, seams closed."""
    ch = level.chart
    G = level.field.points
    axes = [np.unique(G[:, k]) for k in range(2)]
    shape = tuple(len(a) for a in axes)
    D = level.field.values.reshape(shape)
    P = G.reshape(shape + (2,))
    per = [f == (SEAM, SEAM) for f in ch.faces]
    for ax in range(2):
        if per[ax]:
            step = axes[ax][1] - axes[ax][0]
            D = np.concatenate([D, np.take(D, [0], axis=ax)], axis=ax)
            wrap = np.take(P, [0], axis=ax).copy()
            wrap[..., ax] += step * shape[ax]
            P = np.concatenate([P, wrap], axis=ax)
    a, b = P[:-1, :-1], P[1:, :-1]
    c, d = P[1:, 1:], P[:-1, 1:]
    da, db, dc, dd = D[:-1, :-1], D[1:, :-1], D[1:, 1:], D[:-1, 1:]
    tri_p = np.concatenate([np.stack([a, b, c], -2).reshape(-1, 3, 2), np.stack([a, c, d], -2).reshape(-1, 3, 2)])
    tri_d = np.concatenate([np.stack([da, db, dc], -1).reshape(-1, 3), np.stack([da, dc, dd], -1).reshape(-1, 3)])
    return tri_p, tri_d


def _clip_polygon(P, d, R):
    """Part of a triangle where the linear interpolant of d is below R."""
    out = []
    for k in range(3):
        p, q = P[k], P[(k + 1) % 3]
        dp, dq = d[k] - R, d[(k + 1) % 3] - R
        if dp < 0:
            out.append(p)
        if (dp < 0) != (dq < 0):
            t = dp / (dp - dq)
            out.append(p + t * (q - p))
    return out


def _levelset_interior(region: Region, h: float) -> Samples:
    level = region.level
    tri_p, tri_d = _grid_triangles(level)
    R = level.radius
    inside = np.all(tri_d < R, axis=1)
    cut = ~inside & np.any(tri_d < R, axis=1)
    cent = [tri_p[inside].mean(axis=1)]
    area = [0.5 * np.abs(_cross2(tri_p[inside, 1] - tri_p[inside, 0], tri_p[inside, 2] - tri_p[inside, 0]))]
    cc, aa = [], []
    for P, d in zip(tri_p[cut], tri_d[cut]):
        poly = _clip_polygon(P, d, R)
        for k in range(1, len(poly) - 1):
            t = np.array([poly[0], poly[k], poly[k + 1]])
            cc.append(t.mean(axis=0))
            aa.append(0.5 * abs(_cross2(t[1] - t[0], t[2] - t[0])))
    if cc:
        cent.append(np.array(cc))
        area.append(np.array(aa))
    U = np.concatenate(cent)
    A = np.concatenate(area)
    sf = shape_field(level.chart, U)
    return Samples(sf, A * sf.sqrt_det, np.zeros(len(A), dtype=int), region)


def levelset_segments(level: LevelSet):
    tri_p, tri_d = _grid_triangles(level)
    R = level.radius
    below = tri_d < R
    cut = np.any(below, axis=1) & ~np.all(below, axis=1)
    segs = []
    for P, d in zip(tri_p[cut], tri_d[cut]):
        pts = []
        for k in range(3):
            p, q = P[k], P[(k + 1) % 3]
            dp, dq = d[k] - R, d[(k + 1) % 3] - R
            if (dp < 0) != (dq < 0):
                t = dp / (dp - dq)
                pts.append(p + t * (q - p))
        if len(pts) == 2:
            segs.append(pts)
    return np.array(segs).reshape(-1, 2, 2)


def _levelset_boundary(region: Region, h: float) -> Samples | None:
    segs = levelset_segments(region.level)
    if len(segs) == 0:
        return None
    ch = region.level.chart
    A = ch.positions(segs[:, 0])
    B = ch.positions(segs[:, 1])
    length = model_distance(ch.c, A, B)
    sf = shape_field(ch, 0.5 * (segs[:, 0] + segs[:, 1]))
    return Samples(sf, length, np.zeros(len(length), dtype=int), region, True)


# -- integration ----------------------------------------------------------------


def _evaluate(samples: Samples, integrand, f) -> np.ndarray:
    if callable(integrand):
        vals = np.asarray(integrand(samples), dtype=float)
    else:
        vals = np.full(len(samples), float(integrand))
    if vals.ndim == 1:
        vals = vals[:, None]
    if f is not None:
        vals = vals * np.exp(-as_field(f).value(samples))[:, None]
    return vals


def _sum(vals, weights):
    return np.array([math.fsum(col) for col in (vals * weights[:, None]).T])


def quadrature(region: Region, integrand, f=None, boundary=False, rel_tol=REL_TOL, n0=8,
               max_level=MAX_LEVEL, budget=POINT_BUDGET):
    """Integrals of all columns of ``integrand(samples)`` with weight e^{-f}.

    Returns (values, achieved relative change, nodes per axis, points, flags).
    """
    flags = {}
    if boundary and not region.has_boundary():
        flags["empty-boundary"] = True
        k = 1
        return np.zeros(k), 0.0, 0, 0, flags
    if region.kind == "level-set":
        return _levelset_quadrature(region, integrand, f, boundary, flags)
    sampler = sample_boundary if boundary else sample_interior
    prev = before = None
    n = n0
    for level in range(max_level + 1):
        npts = _count_points(region, n, boundary)
        if npts > budget:
            raise ConvergenceError(f"point budget exceeded at {n} nodes per axis", _pair(prev, None))
        s = sampler(region, n)
        if s is None:
            flags["empty-boundary"] = True
            return np.zeros(1), 0.0, n, 0, flags
        vals = _evaluate(s, integrand, f)
        cur = _sum(vals, s.weights)
        # columns that vanish identically only carry round-off; measure them
        # against the largest column and the total measure
        floor = 1e-12 * (float(np.max(_sum(np.abs(vals), s.weights))) + math.fsum(np.abs(s.weights)))
        if prev is not None:
            diff = np.abs(cur - prev)
            ref = np.maximum(np.abs(cur), floor / rel_tol)
            achieved = float(np.max(diff / ref))
            if np.all(diff <= rel_tol * ref):
                return cur, achieved, n, len(s), flags
        before, prev = prev, cur
        n *= 2
    raise ConvergenceError("quadrature did not converge", _pair(before, prev))


def _pair(a, b):
    return tuple(None if v is None else [float(x) for x in np.atleast_1d(v)] for v in (a, b))


def _count_points(region, n, boundary):
    total = 0
    for i, p in enumerate(region.patches):
        br = _patch_breaks(region, i)
        segs = [len(b) + 1 for b in br]
        if boundary:
            for ax, _ in boundary_faces(p):
                total += int(np.prod([n * segs[k] for k in range(region.m) if k != ax]))
        else:
            total += int(np.prod([n * s for s in segs]))
    return total


def _levelset_quadrature(region, integrand, f, boundary, flags):
    sampler = _levelset_boundary if boundary else _levelset_interior
    s = sampler(region, region.level.resolution)
    if s is None:
        flags["empty-boundary"] = True
        return np.zeros(1), 0.0, 0, 0, flags
    cur = _sum(_evaluate(s, integrand, f), s.weights)
    # first-order rule: compare with the coarser grid for an error estimate
    coarse_level = replace(region.level, field=grid_distance(region.level.chart, region.center,
                                                             2 * region.level.resolution),
                           resolution=2 * region.level.resolution)
    coarse = replace(region, level=coarse_level)
    sc = sampler(coarse, coarse_level.resolution)
    achieved = float("inf")
    if sc is not None:
        prev = _sum(_evaluate(sc, integrand, f), sc.weights)
        achieved = float(np.max(np.abs(cur - prev) / np.maximum(np.abs(cur), 1e-300)))
    flags["level-set"] = True
    return cur, achieved, 0, len(s), flags


def integrate(region: Region, integrand=1.0, f=None, rel_tol=REL_TOL, **kw) -> Integral:
    vals, ach, n, npts, flags = quadrature(region, integrand, f, False, rel_tol, **kw)
    return Integral(vals[0], ach, n, npts, flags)


def integrate_boundary(region: Region, integrand=1.0, f=None, rel_tol=REL_TOL, **kw) -> Integral:
    vals, ach, n, npts, flags = quadrature(region, integrand, f, True, rel_tol, **kw)
    return Integral(vals[0], ach, n, npts, flags)


def area(region: Region, **kw) -> Integral:
    return integrate(region, 1.0, **kw)


# -- diameters and enclosing balls -------------------------------------------------


def _closed_grid(p: Chart, n: int) -> np.ndarray:
    axes = [np.linspace(a, b, n) for a, b in zip(p.lo, p.hi)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, p.m)


def region_points(region: Region, budget: int = 4000):
    """Sample parameters (patch index, U) on closed uniform grids within budget."""
    if region.kind == "level-set":
        G = region.level.field.points
        inside = G[region.level.field.values < region.radius]
        segs = levelset_segments(region.level).reshape(-1, 2)
        pts = np.concatenate([inside, segs]) if len(segs) else inside
        if len(pts) > budget:
            pts = pts[np.linspace(0, len(pts) - 1, budget).astype(int)]
        return [(region.level.chart, pts)]
    k = len(region.patches)
    n = max(2, int((budget / k) ** (1.0 / region.m)))
    # dyadic counts 2^j + 1: a larger budget always refines the smaller grid,
    # so the sampled diameter is monotone in the budget
    n = 2 ** int(math.log2(n - 1)) + 1
    return [(p, _closed_grid(p, n)) for p in region.patches]


@dataclass(frozen=True)
class Diameter:
    value: float
    pair: tuple
    samples: int
    caveat: str = "sampled lower bound; nondecreasing under refinement"

    def __float__(self):
        return self.value


def extrinsic_diameter(region: Region, budget: int = 4000, polish: bool = True) -> Diameter:
    budget = int(min(max(budget, 2), 20_000))
    c = region.c
    groups = region_points(region, budget)
    X = np.concatenate([p.positions(U) for p, U in groups])
    owner = np.concatenate([np.full(len(U), i) for i, (_, U) in enumerate(groups)])
    params = np.concatenate([U for _, U in groups])
    if len(X) < 2:
        raise ValueError("need at least two sample points")
    # distance is monotone in the model inner product (or in |x-y|^2 when flat),
    # so one Gram product per chunk finds the farthest pair
    sig = np.ones(X.shape[1])
    if c < 0:
        sig[0] = -1.0
    Xs = X * sig
    sq = np.einsum("nd,nd->n", X, X)
    best_key, pair = -np.inf, (0, 0)
    chunk = 512
    for s in range(0, len(X), chunk):
        gram = Xs[s : s + chunk] @ X.T
        key = sq[s : s + chunk, None] + sq[None, :] - 2 * gram if c == 0 else -gram
        i, j = np.unravel_index(np.argmax(key), key.shape)
        if key[i, j] > best_key:
            best_key, pair = key[i, j], (s + i, j)
    best = float(model_distance(c, X[pair[0]], X[pair[1]]))
    value = best
    if polish and region.kind != "level-set":
        pa, pb = groups[owner[pair[0]]][0], groups[owner[pair[1]]][0]
        m = region.m
        x0 = np.r_[params[pair[0]], params[pair[1]]]
        bounds = list(zip(pa.lo, pa.hi)) + list(zip(pb.lo, pb.hi))

        def neg(v):
            return -float(model_distance(c, pa.positions(v[:m])[0], pb.positions(v[m:])[0]))

        res = minimize(neg, x0, method="L-BFGS-B", bounds=bounds, options={"ftol": 1e-15, "gtol": 1e-12})
        if np.isfinite(res.fun) and -res.fun > value:
            value = -float(res.fun)
    return Diameter(value, (X[pair[0]], X[pair[1]]), len(X))


def enclosing_center(region: Region, budget: int = 600):
    """Centre of the smallest ambient ball containing the sampled region
    (minimax over model points), and its radius."""
    c = region.c
    X = np.concatenate([p.positions(U) for p, U in region_points(region, budget)])
    D = X.shape[1]
    o = model_origin(c, D)
    if c == 0:
        embed = lambda v: v  # noqa: E731
        start = X.mean(axis=0)
    elif c > 0:
        embed = lambda v: v / (math.sqrt(c) * np.linalg.norm(v))  # noqa: E731
        start = X.mean(axis=0)
        if np.linalg.norm(start) < 1e-12:
            start = o
    else:
        k = 1.0 / math.sqrt(-c)
        embed = lambda q: np.r_[math.sqrt(k * k + q @ q), q]  # noqa: E731
        start = X.mean(axis=0)[1:]

    def dist2(v):
        return model_distance(c, embed(v)[None, :], X) ** 2

    t0 = float(dist2(start).max())
    z0 = np.r_[start, t0]
    cons = {"type": "ineq", "fun": lambda z: z[-1] - dist2(z[:-1])}
    res = minimize(lambda z: z[-1], z0, constraints=[cons], method="SLSQP",
                   options={"ftol": 1e-15, "maxiter": 500})
    z = res.x if res.success or res.fun < t0 else z0
    centre = embed(z[:-1])
    return centre, float(np.sqrt(dist2(z[:-1]).max()))


# -- scalar fields ----------------------------------------------------------------


class Field:
    """Scalar field on the surface: values and parameter differentials at samples."""

    def value(self, s: Samples) -> np.ndarray:
        raise NotImplementedError

    def differential(self, s: Samples) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, s: Samples) -> np.ndarray:
        """Components of the gradient in the orthonormal principal frame."""
        return s.field.frame_components(self.differential(s))


@dataclass(frozen=True)
class Constant(Field):
    c: float = 1.0

    def value(self, s):
        return np.full(len(s), float(self.c))

    def differential(self, s):
        return np.zeros_like(s.field.u)


class AmbientExpr(Field):
    """SymPy expression in the ambient coordinates x0, x1, ..."""

    def __init__(self, expr, D: int):
        xs = sp.symbols(f"x0:{D}", real=True)
        e = sp.sympify(expr, locals={str(x): x for x in xs})
        self.expr = e
        self._f = sp.lambdify(xs, e, "numpy")
        self._g = sp.lambdify(xs, [sp.diff(e, x) for x in xs], "numpy")

    def value(self, s):
        X = s.field.X
        return np.broadcast_to(np.asarray(self._f(*X.T), dtype=float), (len(X),)).copy()

    def differential(self, s):
        X = s.field.X
        g = np.stack([np.broadcast_to(np.asarray(v, dtype=float), (len(X),)) for v in self._g(*X.T)], -1)
        return np.einsum("nid,nd->ni", s.field.J, g)


class Ramp(Field):
    """u_eps = min(1, dist(x, boundary) / eps) on a ball, with the distance
    to the boundary sphere taken as R - dist(x0, x)."""

    def __init__(self, region: Region, eps: float):
        if not eps > 0:
            raise ValueError("eps must be positive")
        if region.radius is None:
            raise ValueError("ramp needs a ball region")
        self.region = region
        self.eps = float(eps)

    def _dist(self, s: Samples):
        reg = self.region
        U = s.field.u
        d = np.empty(len(U))
        dd = np.zeros_like(U)
        if reg.kind == "level-set":
            fn = reg.level.field
            return _with_fd(lambda V: fn(V), U)
        for i, p in enumerate(reg.patches):
            sel = s.patch == i
            if not np.any(sel):
                continue
            if p.info.get("radial_axis") is not None:
                ax, scale = p.info["radial_axis"], p.info["radial_scale"]
                d[sel] = scale * U[sel, ax]
                dd[sel, ax] = scale
            else:
                to_parent = p.info["to_parent"]
                fn = lambda V: reg.surface.info["distance"](reg.center, to_parent(V))  # noqa: E731
                d[sel], dd[sel] = _with_fd(fn, U[sel])
        return d, dd

    def value(self, s):
        d, _ = self._dist(s)
        return np.clip((self.region.radius - d) / self.eps, 0.0, 1.0)

    def differential(self, s):
        d, dd = self._dist(s)
        t = (self.region.radius - d) / self.eps
        inside = (t > 0) & (t < 1)
        return np.where(inside[:, None], -dd / self.eps, 0.0)

    def break_region(self) -> Region:
        """Region with a breakpoint at R - eps on the radial axis of polar patches
        and at the quarter turns of the seam angle."""
        reg = self.region
        if reg.kind != "ball":
            return reg
        p = reg.patches[0]
        if p.info.get("radial_axis") is None:
            return reg
        out = reg.with_breaks(p.info["radial_axis"], (reg.radius - self.eps) / p.info["radial_scale"])
        # |P_r grad u| has kinks where a chart-aligned principal direction
        # turns orthogonal to the radial one, i.e. at the quarter turns
        ax = reg.m - 1
        for w in (0.5 * math.pi, math.pi, 1.5 * math.pi):
            out = out.with_breaks(ax, w)
        return out


def _with_fd(fn, U, h=1e-6):
    d = np.asarray(fn(U), dtype=float)
    dd = np.empty_like(U)
    for k in range(U.shape[1]):
        e = np.zeros(U.shape[1])
        e[k] = h
        dd[:, k] = (np.asarray(fn(U + e)) - np.asarray(fn(U - e))) / (2 * h)
    return d, dd


def as_field(x) -> Field:
    if isinstance(x, Field):
        return x
    if x is None:
        return Constant(0.0)
    if isinstance(x, (int, float)):
        return Constant(float(x))
    raise TypeError(f"cannot interpret {x!r} as a scalar field")
