"""Evaluate both sides of the Poincare-type and isoperimetric inequalities.

Every evaluator returns a Report with the two sides, the margin RHS - LHS,
an equality flag and hypothesis flags. Flags annotate; they never stop the
evaluation.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import measure as ms
from .ambient import AmbientSpec, UnsupportedAmbient, comparison_function, dsc, sc, space_form
from .geom import Chart, model_distance, model_inner, shape_field
from .measure import Field, Ramp, Region, as_field
from .symfun import binomials, elementary_symmetric, frobenius_norm, newton_eigenvalues

EQ_TOL = 1e-3


@dataclass
class Report:
    inequality_id: str
    lhs: float
    rhs: float
    margin: float
    relative_margin: float
    equality: bool
    tolerance_achieved: float
    flags: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    related: list = field(default_factory=list)

    @classmethod
    def build(cls, ident, lhs, rhs, achieved=0.0, flags=None, details=None, eq_tol=EQ_TOL):
        lhs, rhs = float(lhs), float(rhs)
        margin = rhs - lhs
        scale = abs(lhs) + abs(rhs)
        rel = margin / scale if scale > 0 else 0.0
        return cls(ident, lhs, rhs, margin, rel, bool(abs(margin) <= eq_tol * scale), float(achieved),
                   dict(flags or {}), dict(details or {}))

    def violated(self, eq_tol=EQ_TOL) -> bool:
        return self.margin < -eq_tol * (abs(self.lhs) + abs(self.rhs))

    def all(self) -> list["Report"]:
        out = [self]
        for r in self.related:
            out += r.all()
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("related")
        return d


# -- divergence identity -----------------------------------------------------------


def _frame_T(T, s: ms.Samples, m: int):
    if isinstance(T, str):
        if T == "identity":
            return np.broadcast_to(np.eye(m), (len(s), m, m)).copy()
        if T.startswith("P"):
            r = int(T[1:])
            mu = newton_eigenvalues(s.lambdas, r)
            return np.einsum("ni,ij->nij", mu, np.eye(m))
        raise ValueError(f"unknown operator {T!r}")
    if callable(T):
        return np.asarray(T(s), dtype=float)
    T = np.asarray(T, dtype=float)
    return np.broadcast_to(T, (len(s), m, m)).copy()


def divergence_identity_check(chart: Chart, T="identity", x0=None, n: int = 6, h: float = 1e-5):
    """max |tr(E -> T((D_E Xbar)^tan)) - S_c'(rho) tr T| over interior samples.

    Xbar is the position vector field about x0: psi - x0 in flat space and
    the tangential part of -(o - c<o,x>x) in the curved models, which equals
    S_c(rho) grad rho. T is given in the principal orthonormal frame, either
    as one matrix, a callable on samples, "identity" or "P<r>".
    """
    c = chart.c
    m = chart.m
    region = ms.whole(chart)
    s = ms.sample_interior(region, n)
    Tf = _frame_T(T, s, m)
    asym = np.max(np.abs(Tf - np.swapaxes(Tf, 1, 2)))
    if asym > 1e-8 * max(1.0, float(np.max(np.abs(Tf)))):
        raise ValueError(f"operator is not symmetric (asymmetry {asym:.3g})")
    sf = s.field
    D = sf.X.shape[1]
    o = np.zeros(D) if c == 0 else ms.model_origin(c, D)
    if x0 is not None:
        o = np.asarray(x0, dtype=float)
    sig = np.ones(D)
    if c < 0:
        sig[0] = -1.0

    def xbar(U):
        X = chart.positions(U)
        if c == 0:
            return X - o
        return -(o - c * model_inner(c, o, X)[:, None] * X)

    E = sf.directions()  # (N,m,D) ambient unit principal directions
    V = np.einsum("nji,njk->nik", sf.Linv, sf.W)  # parameter vectors of the frame, (N, m params, m dirs)
    trace = np.zeros(len(s))
    for i in range(m):
        du = V[:, :, i]
        dX = (xbar(sf.u + h * du) - xbar(sf.u - h * du)) / (2 * h)
        # tangential components in the principal frame (model metric)
        comp = np.einsum("nkd,nd,d->nk", E, dX, sig)
        trace += np.einsum("nk,nk->n", Tf[:, i, :], comp)
    rho = model_distance(c, o[None, :], sf.X) if c != 0 or x0 is not None else np.linalg.norm(sf.X - o, axis=1)
    expected = dsc(c, rho) * np.trace(Tf, axis1=1, axis2=2)
    res = np.abs(trace - expected)
    return float(res.max()), {"trace": trace, "expected": expected}


# -- Poincare inequalities in space forms --------------------------------------------


def _geometry_flags(region: Region, diam: float, c: float) -> dict:
    flags = {"truncated-region": bool(region.truncated)}
    if c > 0:
        X = np.concatenate([p.positions(U) for p, U in ms.region_points(region, 800)])
        flags["inside-open-hemisphere"] = bool(np.all(X[:, 0] > 0))
        flags["diam < 2i(M)"] = bool(diam < 2 * math.pi / math.sqrt(c))
    else:
        flags["diam < 2i(M)"] = True
    return flags


def _fields(u, f):
    return as_field(1.0 if u is None else u), as_field(0.0 if f is None else f)


def _admissible_u(region: Region, u: Field, tol: float = 1e-9) -> bool:
    """u >= 0 on interior samples and u = 0 on the boundary (compact support in Omega)."""
    inner = ms.sample_interior(region, 6) if region.kind != "level-set" else None
    if inner is not None and np.any(u.value(inner) < -tol):
        return False
    if not region.has_boundary():
        return True
    sb = ms.sample_boundary(region, 16)
    return sb is None or bool(np.all(np.abs(u.value(sb)) <= tol))


def _integration_region(region: Region, u: Field) -> Region:
    return u.break_region() if isinstance(u, Ramp) else region


def _positivity_sample(region: Region, r: int, tol: float = 1e-8):
    s = ms.sample_interior(region, 6) if region.kind != "level-set" else ms.sample_interior(region, 0)
    lam = s.lambdas
    mu = newton_eigenvalues(lam, r)
    scale = 1.0 + frobenius_norm(lam)[:, None] ** r
    return bool(np.all(mu >= -tol * scale)), lam


def poincare_spaceform(surface: Chart, region: Region, r: int, u=None, f=None, c=None,
                       eq_tol=EQ_TOL, rel_tol=ms.REL_TOL) -> Report:
    """Both sides of the S_r and H_r Poincare inequalities in a space form.

    C0 = S_c(diam/2)/(m-r); rho is the ambient distance from the centre of the
    smallest enclosing ball. The H_r form is attached as a related report
    and labelled applicable only when P_r is non-negative on samples.
    """
    c = surface.c if c is None else float(c)
    if c != region.c:
        raise ValueError(f"ambient curvature {c} does not match the surface model ({region.c})")
    m = region.m
    if not 0 <= r <= m - 1:
        raise ValueError(f"r={r} outside 0..{m - 1}")
    u, f = _fields(u, f)
    diam = ms.extrinsic_diameter(region)
    centre, _ = ms.enclosing_center(region)
    C0 = sc(c, diam.value / 2) / (m - r)
    C1 = (m - r) * C0
    binom = binomials(m)

    def integrand(s):
        lam = s.lambdas
        S = elementary_symmetric(lam)
        Sr = S[:, r]
        Sr1 = S[:, r + 1]
        Hr, Hr1 = Sr / binom[r], Sr1 / binom[r + 1]
        rho = model_distance(c, centre[None, :], s.field.X)
        uv = u.value(s)
        V = u.gradient(s) - uv[:, None] * f.gradient(s)
        mu = newton_eigenvalues(lam, r)
        PV = np.linalg.norm(mu * V, axis=1)
        w = dsc(c, rho)
        return np.column_stack([
            uv * Sr * w,
            PV + (r + 1) * np.abs(Sr1) * uv,
            uv * Hr * w,
            np.linalg.norm(V, axis=1) * Hr + np.abs(Hr1) * uv,
        ])

    vals, achieved, _, _, qflags = ms.quadrature(_integration_region(region, u), integrand, f, rel_tol=rel_tol)
    p_nonneg, _ = _positivity_sample(region, r)
    flags = _geometry_flags(region, diam.value, c)
    flags["u compactly supported"] = _admissible_u(region, u)
    flags["applicable"] = flags["u compactly supported"]
    flags["P_r nonneg on samples"] = p_nonneg
    flags.update(qflags)
    details = {"r": r, "c": c, "m": m, "diameter": diam.value, "C0": C0, "centre": [float(x) for x in centre]}
    rep = Report.build(f"poincare-sr(r={r})", vals[0], C0 * vals[1], achieved, flags, details, eq_tol)
    hrep = Report.build(f"poincare-hr(r={r})", vals[2], C1 * vals[3], achieved,
                        dict(flags, applicable=p_nonneg and flags["applicable"]), dict(details, C1=C1), eq_tol)
    rep.related.append(hrep)
    return rep


# -- isoperimetric chain -----------------------------------------------------------------


def iso_chain(surface: Chart, region: Region, r: int, eq_tol=EQ_TOL, rel_tol=ms.REL_TOL) -> Report:
    """|Omega| <= sum_k (d/2)^{k+1} int_bd H_k + (d/2)^{r+1} int H_{r+1}, d the extrinsic diameter.

    The r = 0 form and the r = 1 form written with the scalar curvature
    are attached as related reports.
    """
    m = region.m
    c = region.c
    if not 0 <= r <= m - 1:
        raise ValueError(f"r={r} outside 0..{m - 1}")
    binom = binomials(m)
    top = max(r, 1)

    def bd(s):
        S = elementary_symmetric(s.lambdas)
        return np.column_stack([S[:, k] / binom[k] for k in range(top + 1)])

    def interior(s):
        S = elementary_symmetric(s.lambdas)
        H = [S[:, k] / binom[k] if k <= m else np.zeros(len(s)) for k in range(top + 2)]
        scal = m * (m - 1) * c + 2 * S[:, 2] if m >= 2 else np.zeros(len(s))
        return np.column_stack([np.ones(len(s))] + H[1:] + [scal])

    vol, ach1, _, _, f1 = ms.quadrature(region, interior, rel_tol=rel_tol)
    if region.has_boundary():
        B, ach2, _, _, f2 = ms.quadrature(region, bd, boundary=True, rel_tol=rel_tol)
    else:
        B, ach2, f2 = np.zeros(top + 1), 0.0, {"empty-boundary": True}
    area = vol[0]
    intH = {k: vol[k] for k in range(1, top + 2)}  # int H_k
    int_scal = vol[top + 2]
    diam = ms.extrinsic_diameter(region).value
    h = diam / 2
    s = ms.sample_interior(region, 6)
    lam = s.lambdas
    S = elementary_symmetric(lam)

    def hyp(k):
        return bool(np.all(S[:, k] > 0)) if k <= m else False

    flags = {
        "flat ambient": c == 0,
        "convex point": bool(np.any(np.all(lam >= -1e-8, axis=1))),
        "truncated-region": bool(region.truncated),
    }
    flags.update(f1)
    flags.update(f2)
    achieved = max(ach1, ach2)

    def chain(rr):
        return sum(h ** (k + 1) * B[k] for k in range(rr + 1)) + h ** (rr + 1) * intH.get(rr + 1, 0.0)

    details = {"area": area, "diameter": diam, "boundary_H": [float(x) for x in B[: r + 1]]}
    rep = Report.build(f"iso-chain(r={r})", area, chain(r), achieved, dict(flags, **{f"H_{r + 1} > 0": hyp(r + 1)}),
                       details, eq_tol)
    if r != 0:
        rep.related.append(Report.build("iso-chain(r=0)", area, chain(0), achieved,
                                        dict(flags, **{"H_1 > 0": hyp(1)}), details, eq_tol))
    if m >= 2:
        rhs1 = h * B[0] + h * h * (B[1] + int_scal / (m * (m - 1)))
        rep.related.append(Report.build("iso-scal(r=1)", area, rhs1, achieved,
                                        dict(flags, **{"H_2 > 0": hyp(2)}), dict(details, scal=int_scal), eq_tol))
    return rep


# -- volume of intrinsic balls ---------------------------------------------------------------


def ball_volume_bounds(surface: Chart, x0, R: float, eq_tol=EQ_TOL, rel_tol=ms.REL_TOL) -> Report:
    """|B_R|/R^m against the boundary-curvature bounds for intrinsic balls."""
    import warnings

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        region = ms.intrinsic_ball(surface, x0, R)
    m = region.m
    binom = binomials(m)

    def interior(s):
        Hm = elementary_symmetric(s.lambdas)[:, m] / binom[m]
        return np.column_stack([np.ones(len(s)), Hm, np.abs(Hm)])

    vol, ach, _, _, qf = ms.quadrature(region, interior, rel_tol=rel_tol)
    flags = {"truncated": bool(region.truncated) or bool(caught)}
    flags.update(qf)
    if region.has_boundary():
        blen = ms.integrate_boundary(region, 1.0, rel_tol=rel_tol)
        sb = ms.sample_boundary(region, 16)
        maxA = float(frobenius_norm(sb.lambdas).max()) if sb is not None else 0.0
        ach = max(ach, blen.achieved)
        blen = float(blen)
    else:
        blen, maxA = 0.0, 0.0
        flags["empty-boundary"] = True
    s = ms.sample_interior(region, 8)
    convex = bool(np.all(s.lambdas >= -1e-8))
    flags["weakly convex"] = convex
    a = R * maxA
    geo = sum(a**k for k in range(m))
    lhs = vol[0] / R**m
    bterm = blen / R ** (m - 1)
    details = {"R": R, "volume": vol[0], "boundary": blen, "max|A|": maxA, "alpha": a}
    rep = Report.build("ball-convex", lhs, geo * bterm + vol[1], ach, dict(flags, applicable=convex), details, eq_tol)
    rep.related.append(Report.build("ball-general", lhs, (2**m - 1) / m * geo * bterm + vol[2], ach,
                                    dict(flags, applicable=True), details, eq_tol))
    if a < 1:
        rep.related.append(Report.build("ball-alpha", lhs, bterm / (1 - a), ach,
                                        dict(flags, applicable=convex), details, eq_tol))
    return rep


# -- Einstein ambients ---------------------------------------------------------------------


@dataclass
class SampledData:
    """User-supplied samples of a hypersurface in an Einstein ambient.

    ``V`` holds grad u - u grad f in the principal frame; ``scal`` the
    intrinsic scalar curvature (defaults to the traced Gauss equation).
    """

    weights: np.ndarray
    lambdas: np.ndarray
    rho: np.ndarray
    diameter: float
    u: np.ndarray | None = None
    f: np.ndarray | None = None
    V: np.ndarray | None = None
    scal: np.ndarray | None = None

    def __post_init__(self):
        n, m = np.shape(self.lambdas)
        self.u = np.ones(n) if self.u is None else np.asarray(self.u, dtype=float)
        self.f = np.zeros(n) if self.f is None else np.asarray(self.f, dtype=float)
        self.V = np.zeros((n, m)) if self.V is None else np.asarray(self.V, dtype=float)


def _einstein_columns(lam, rho, u, V, G, lam_E, scal=None):
    m = lam.shape[1]
    S = elementary_symmetric(lam, 2)
    if scal is None:
        scal = (m - 1) * lam_E + 2 * S[:, 2]
    mu = newton_eigenvalues(lam, 1)
    dG = G.derivative(rho)
    defect = scal - (m - 1) * lam_E
    return np.column_stack([
        u * S[:, 1] * dG,
        np.linalg.norm(mu * V, axis=1) + np.abs(defect) * u,
        u * S[:, 1] * dG,
        np.linalg.norm(V, axis=1) * S[:, 1] + np.abs(defect) / (m - 1) * u,
    ]), defect


def poincare_einstein(data, ambient: AmbientSpec, u=None, f=None, eq_tol=EQ_TOL, rel_tol=ms.REL_TOL) -> Report:
    """S_1 Poincare inequality in an Einstein ambient, C0 = G(diam/2)/(m-1).

    ``data`` is a SampledData or a Region of a space-form surface.
    """
    if ambient.einstein_constant is None:
        raise UnsupportedAmbient(f"ambient {ambient.kind!r} has no Einstein constant")
    G = comparison_function(ambient)
    lam_E = ambient.einstein_constant
    m = ambient.m
    flags = {}
    if isinstance(data, SampledData):
        diam = float(data.diameter)
        w = np.asarray(data.weights, dtype=float) * np.exp(-data.f)
        cols, defect = _einstein_columns(np.asarray(data.lambdas, dtype=float), np.asarray(data.rho, dtype=float),
                                         data.u, data.V, G, lam_E, data.scal)
        vals = np.array([math.fsum(x) for x in (cols * w[:, None]).T])
        achieved = 0.0
        grad_zero = bool(np.all(np.abs(data.V) <= 1e-12))
        lam = np.asarray(data.lambdas, dtype=float)
    else:
        region = data
        if region.m != m:
            raise ValueError("surface and ambient dimensions disagree")
        uf, ff = _fields(u, f)
        dres = ms.extrinsic_diameter(region)
        diam = dres.value
        centre, _ = ms.enclosing_center(region)
        c = region.c
        store = {}

        def integrand(s):
            rho = model_distance(c, centre[None, :], s.field.X)
            uv = uf.value(s)
            V = uf.gradient(s) - uv[:, None] * ff.gradient(s)
            cols, dfc = _einstein_columns(s.lambdas, rho, uv, V, G, lam_E)
            store["defect"] = dfc
            store["V"] = V
            store["lam"] = s.lambdas
            return cols

        vals, achieved, _, _, qf = ms.quadrature(_integration_region(region, uf), integrand, ff, rel_tol=rel_tol)
        flags.update(qf)
        flags["u compactly supported"] = _admissible_u(region, uf)
        flags["applicable"] = flags["u compactly supported"]
        defect = store["defect"]
        grad_zero = bool(np.all(np.abs(store["V"]) <= 1e-12))
        lam = store["lam"]
    if ambient.injectivity_radius is not None and math.isfinite(ambient.injectivity_radius):
        flags["diam < 2i(M)"] = bool(diam < 2 * ambient.injectivity_radius)
    else:
        flags["diam < 2i(M)"] = True
    if G.domain_end is not None and diam / 2 > G.domain_end:
        flags["G domain exceeded"] = True
    C0 = float(G(diam / 2)) / (m - 1)
    mu = newton_eigenvalues(lam, 1)
    p_nonneg = bool(np.all(mu >= -1e-8 * (1 + frobenius_norm(lam))[:, None]))
    flags["P_1 nonneg on samples"] = p_nonneg
    const_scal = bool(np.all(np.abs(defect) <= 1e-8 * (1 + np.abs(lam_E) + frobenius_norm(lam) ** 2)))
    flags["scal = (m-1)lambda"] = const_scal
    flags["totally-geodesic candidate"] = bool(const_scal and grad_zero)
    details = {"C0": C0, "diameter": diam, "einstein_constant": lam_E, "ambient": ambient.kind,
               "G provenance": G.provenance}
    rep = Report.build("poincare-einstein-s1", vals[0], C0 * vals[1], achieved, flags, details, eq_tol)
    rep.related.append(Report.build("poincare-einstein-h1", vals[2], (m - 1) * C0 * vals[3], achieved,
                                    dict(flags, applicable=p_nonneg and flags.get("applicable", True)),
                                    dict(details, C1=(m - 1) * C0), eq_tol))
    return rep


def spaceform_ambient_for(chart: Chart) -> AmbientSpec:
    return space_form(chart.c, chart.m + 1)
