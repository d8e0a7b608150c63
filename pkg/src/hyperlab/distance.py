"""Intrinsic distance fields on charts and meshes.

Catalog surfaces carry closed-form distances. Everything else goes through
a parameter grid: Dijkstra on the 8-neighbour graph with metric edge
lengths gives an upper bound, then semi-Lagrangian fan updates (the
distance at a node is minimised over points of each neighbouring grid
segment) remove the direction bias of the graph metric, which Dijkstra
alone never loses under refinement.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import least_squares
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .geom import POLE, SEAM, Chart, model_signature


@dataclass
class DistanceField:
    base: np.ndarray  # parameter of x0 (or vertex index for meshes)
    provenance: str  # analytic | grid-graph | mesh-graph
    points: np.ndarray  # sample parameters
    values: np.ndarray
    resolution: float | None = None
    fn: object = field(default=None, repr=False)

    def __call__(self, U) -> np.ndarray:
        return self.fn(np.atleast_2d(np.asarray(U, dtype=float)))


def metric_at(chart: Chart, U) -> np.ndarray:
    """First fundamental form (N,m,m) without the rank check."""
    X, J, _ = chart.jets(U)
    sig = model_signature(chart.c, X.shape[1])
    return np.einsum("nid,njd,d->nij", J, J, sig)


def locate(chart: Chart, x0, tol: float = 1e-6) -> np.ndarray:
    """Parameter of a point given either as parameters (length m) or as an
    ambient point (length D), projected onto the chart."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape == (chart.m,):
        return x0
    if x0.shape != (chart.D,):
        raise ValueError(f"base point must have length {chart.m} (parameters) or {chart.D} (ambient)")
    lo, hi = np.array(chart.lo), np.array(chart.hi)
    n = 24 if chart.m == 2 else 10
    axes = [np.linspace(a, b, n) for a, b in zip(lo, hi)]
    G = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, chart.m)
    d = np.linalg.norm(chart.positions(G) - x0, axis=1)
    u = G[np.argmin(d)]
    sol = least_squares(lambda v: chart.positions(v)[0] - x0, u, bounds=(lo, hi), xtol=1e-15, ftol=1e-15)
    scale = max(1.0, float(np.linalg.norm(x0)))
    if np.linalg.norm(sol.fun) > tol * scale:
        raise ValueError(f"base point is {np.linalg.norm(sol.fun):.3g} away from the surface")
    return sol.x


def distance_field(surface, x0, resolution: float | None = None, mode: str = "auto") -> DistanceField:
    """dist(x0, .) on a chart (analytic when the catalog provides it) or on a mesh."""
    from .mesh import Mesh

    if isinstance(surface, Mesh):
        return mesh_distance(surface, int(x0))
    if resolution is not None and not resolution > 0:
        raise ValueError("resolution must be positive")
    u0 = locate(surface, x0)
    if mode != "grid" and "distance" in surface.info:
        fn = surface.info["distance"]
        return DistanceField(u0, "analytic", u0[None, :], np.zeros(1), None, lambda U: fn(u0, U))
    if mode == "analytic":
        raise ValueError(f"no closed-form distance for {surface.name}")
    if resolution is None:
        resolution = max(b - a for a, b in zip(surface.lo, surface.hi)) / 100
    return grid_distance(surface, u0, resolution)


def _grid_axes(chart: Chart, h: float):
    axes, periodic = [], []
    for (a, b), (flo, fhi) in zip(zip(chart.lo, chart.hi), chart.faces):
        n = max(3, int(math.ceil((b - a) / h)) + 1)
        per = flo == SEAM and fhi == SEAM
        ax = np.linspace(a, b, n)
        axes.append(ax[:-1] if per else ax)
        periodic.append(per)
    return axes, periodic


def grid_distance(chart: Chart, u0, h: float, refine: bool = True, max_sweeps: int | None = None,
                  init_radius: float | None = None) -> DistanceField:
    u0 = np.asarray(u0, dtype=float)
    m = chart.m
    axes, periodic = _grid_axes(chart, h)
    shape = tuple(len(a) for a in axes)
    steps = np.array([a[1] - a[0] for a in axes])
    G = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, m)
    N = len(G)
    I = metric_at(chart, G)

    rows, cols, w = [], [], []
    mi = np.stack(np.unravel_index(np.arange(N), shape), -1)
    for off in itertools.product((-1, 0, 1), repeat=m):
        if not any(off) or off < tuple(0 for _ in off):
            continue
        nbr = mi + np.array(off)
        valid = np.ones(N, dtype=bool)
        for ax in range(m):
            if periodic[ax]:
                nbr[:, ax] %= shape[ax]
            else:
                valid &= (nbr[:, ax] >= 0) & (nbr[:, ax] < shape[ax])
        s = np.nonzero(valid)[0]
        d = np.ravel_multi_index(tuple(nbr[valid].T), shape)
        du = np.array(off) * steps
        Im = 0.5 * (I[s] + I[d])
        length = np.sqrt(np.maximum(np.einsum("i,nij,j->n", du, Im, du), 0.0))
        rows += [s, d]
        cols += [d, s]
        w += [length, length]
    # Nodes within a fixed parameter radius of the base point get the length of
    # the straight parameter segment (Simpson in the metric) and stay fixed.
    # A radius that does not shrink with h removes the h log(1/h) error of
    # the point source, leaving first order in h.
    if init_radius is None:
        init_radius = 0.05 * max(b - a for a, b in zip(chart.lo, chart.hi))
    rad = np.maximum(steps * 1.0001, init_radius)
    dvec_all = _wrap_diff(G - u0, axes, periodic)
    near = np.all(np.abs(dvec_all) <= rad, axis=1) & (np.sum((dvec_all / rad) ** 2, axis=1) <= m * 1.0001)
    near |= np.all(np.abs(dvec_all) <= steps * 1.0001, axis=1)
    nb = np.nonzero(near)[0]
    dvec = dvec_all[nb]
    I0 = metric_at(chart, u0[None, :])[0]
    Imid = metric_at(chart, u0[None, :] + 0.5 * dvec)
    q = [np.einsum("ni,nij,nj->n", dvec, Ik, dvec) for Ik in (np.broadcast_to(I0, Imid.shape), Imid, I[nb])]
    d0 = sum(wk * np.sqrt(np.maximum(qk, 0.0)) for wk, qk in zip((1 / 6, 4 / 6, 1 / 6), q))
    rows += [np.full(len(nb), N), nb]
    cols += [nb, np.full(len(nb), N)]
    w += [d0, d0]
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    wt = np.concatenate(w)
    # explicit zeros would be dropped by the sparse graph
    wt = np.where(wt > 0, wt, 1e-300)
    graph = coo_matrix((wt, (r, c)), shape=(N + 1, N + 1)).tocsr()
    D = dijkstra(graph, directed=False, indices=N)[:N]
    if refine and m == 2:
        fixed = np.zeros(N, dtype=bool)
        fixed[nb] = True
        D = _fan_refine(D.reshape(shape), I.reshape(shape + (2, 2)), steps, periodic, fixed.reshape(shape),
                        max_sweeps).ravel()
    vals = D
    interp_axes, grid_vals = [], D.reshape(shape)
    for ax, (a, per) in enumerate(zip(axes, periodic)):
        if per:
            a = np.append(a, a[-1] + steps[ax])
            grid_vals = np.concatenate([grid_vals, np.take(grid_vals, [0], axis=ax)], axis=ax)
        interp_axes.append(a)
    interp = RegularGridInterpolator(tuple(interp_axes), grid_vals, bounds_error=False, fill_value=None)
    lo = np.array([a[0] for a in interp_axes])
    period = np.array([a[-1] - a[0] for a in interp_axes])
    per_mask = np.array(periodic)

    def fn(U):
        U = np.array(U, dtype=float)
        if per_mask.any():
            U[:, per_mask] = lo[per_mask] + np.mod(U[:, per_mask] - lo[per_mask], period[per_mask])
        return interp(U)

    return DistanceField(u0, "grid-graph", G, vals, h, fn)


def _wrap_diff(d, axes, periodic):
    d = np.array(d, dtype=float)
    for ax, (a, per) in enumerate(zip(axes, periodic)):
        if per:
            L = (a[1] - a[0]) * len(a)
            d[:, ax] = np.mod(d[:, ax] + L / 2, L) - L / 2
    return d


_FAN = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]


def _shift(D, off, periodic):
    """Value at node + off, with +inf outside non-periodic edges."""
    out = D
    for ax, o in enumerate(off):
        if o == 0:
            continue
        out = np.roll(out, -o, axis=ax)
        if not periodic[ax]:
            sl = [slice(None)] * D.ndim
            sl[ax] = slice(-1, None) if o > 0 else slice(0, 1)
            out = out.copy()
            out[tuple(sl)] = np.inf
    return out


def _fan_refine(D, I, steps, periodic, fixed, max_sweeps=None):
    n0, n1 = D.shape
    max_sweeps = max_sweeps or 4 * (n0 + n1)
    vecs = [np.array(o, dtype=float) * steps for o in _FAN]
    quad = [np.einsum("i,...ij,j->...", v, I, v) for v in vecs]
    for _ in range(max_sweeps):
        best = D.copy()
        shifted = [_shift(D, o, periodic) for o in _FAN]
        for k in range(8):
            a, b = vecs[k], vecs[(k + 1) % 8]
            da, db = shifted[k], shifted[(k + 1) % 8]
            e = b - a
            alpha = quad[k]
            beta = np.einsum("i,...ij,j->...", a, I, e)
            gamma = np.einsum("i,...ij,j->...", e, I, e)
            with np.errstate(invalid="ignore", divide="ignore"):
                cand = np.minimum(da + np.sqrt(alpha), db + np.sqrt(quad[(k + 1) % 8]))
                delta = db - da
                den = gamma - delta**2
                disc = np.maximum(alpha * gamma - beta**2, 0.0)
                t = (-beta - delta * np.sqrt(disc / den)) / gamma
                ok = np.isfinite(t) & (den > 0) & (t > 0) & (t < 1)
                ft = da + t * delta + np.sqrt(np.maximum(alpha + 2 * beta * t + gamma * t * t, 0.0))
            cand = np.where(ok, np.minimum(cand, ft), cand)
            best = np.minimum(best, cand)
        best[fixed] = D[fixed]
        change = np.nanmax(np.abs(np.where(np.isfinite(best), best - D, 0.0)))
        D = best
        if change <= 1e-13 * (1 + np.nanmax(np.where(np.isfinite(D), D, 0.0))):
            break
    return D


def mesh_distance(mesh, vertex: int) -> DistanceField:
    """Edge-graph Dijkstra from a mesh vertex."""
    E = mesh.edges()
    L = np.linalg.norm(mesh.V[E[:, 0]] - mesh.V[E[:, 1]], axis=1)
    n = len(mesh.V)
    graph = coo_matrix((np.r_[L, L], (np.r_[E[:, 0], E[:, 1]], np.r_[E[:, 1], E[:, 0]])), shape=(n, n)).tocsr()
    d = dijkstra(graph, directed=False, indices=vertex)

    def fn(idx):
        return d[np.asarray(idx, dtype=int).ravel()]

    return DistanceField(np.array([vertex]), "mesh-graph", mesh.V, d, None, fn)
