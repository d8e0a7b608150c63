"""Curvature algebra on a single tangent space.

Everything here works on the principal curvatures of a hypersurface at one
point: elementary symmetric functions S_r, normalized mean curvatures H_r,
Newton transformations P_r and the bounds relating them to the norm of the
shape operator. All functions are pure and exact up to floating point.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

SPHERE_INWARD_POSITIVE = "sphere-inward-positive"


class SpectrumError(ValueError):
    """Invalid principal-curvature input."""


@dataclass(frozen=True)
class ShapeSpectrum:
    """Principal curvatures at one point.

    The normal is oriented so that a round sphere has positive curvatures.
    """

    lambdas: tuple[float, ...]
    orientation: str = SPHERE_INWARD_POSITIVE

    def __post_init__(self):
        lam = tuple(float(x) for x in self.lambdas)
        object.__setattr__(self, "lambdas", lam)
        if len(lam) < 2:
            raise SpectrumError(f"need m >= 2 principal curvatures, got {len(lam)}")
        if not all(np.isfinite(lam)):
            raise SpectrumError(f"non-finite principal curvature in {lam}")
        if self.orientation != SPHERE_INWARD_POSITIVE:
            raise SpectrumError(f"unknown orientation tag {self.orientation!r}")

    @property
    def m(self) -> int:
        return len(self.lambdas)

    def array(self) -> np.ndarray:
        return np.asarray(self.lambdas)

    def flipped(self) -> "ShapeSpectrum":
        """Spectrum seen from the opposite normal."""
        return ShapeSpectrum(tuple(-x for x in self.lambdas))


@dataclass(frozen=True)
class SymTable:
    S: np.ndarray  # S_0..S_m
    H: np.ndarray  # H_0..H_m

    def s(self, k: int) -> float:
        """S_k with S_k = 0 outside 0..m."""
        if 0 <= k < len(self.S):
            return float(self.S[k])
        return 0.0


@dataclass(frozen=True)
class NewtonOp:
    r: int
    eigenvalues: np.ndarray
    matrix: np.ndarray | None = field(default=None, compare=False)


def elementary_symmetric(lambdas, kmax: int | None = None) -> np.ndarray:
    """Coefficients of prod(x + lambda_i), lowest order first.

    Works along the last axis, so ``lambdas`` may be a batch of shape (..., m);
    the result has shape (..., kmax + 1).
    """
    lam = np.asarray(lambdas, dtype=float)
    m = lam.shape[-1]
    kmax = m if kmax is None else min(kmax, m)
    out = np.zeros(lam.shape[:-1] + (kmax + 1,))
    out[..., 0] = 1.0
    for i in range(m):
        li = lam[..., i : i + 1]
        top = min(i + 1, kmax)
        # update high orders first so each lambda is used once
        out[..., 1 : top + 1] = out[..., 1 : top + 1] + li * out[..., :top]
    return out


def binomials(m: int) -> np.ndarray:
    return np.array([comb(m, k) for k in range(m + 1)], dtype=float)


def sym_all(spec: ShapeSpectrum) -> SymTable:
    S = elementary_symmetric(spec.array())
    return SymTable(S=S, H=S / binomials(spec.m))


def _check_order(m: int, r: int, top: int):
    if not (0 <= r <= top):
        raise ValueError(f"order r={r} outside 0..{top} for m={m}")


def newton_eigenvalues(lambdas, r: int) -> np.ndarray:
    """Eigenvalues of P_r in the principal frame, batched along the last axis.

    Uses the defining recursion P_r = S_r I - A P_{r-1} diagonally.
    """
    lam = np.asarray(lambdas, dtype=float)
    S = elementary_symmetric(lam, r)
    mu = np.ones_like(lam)
    for k in range(1, r + 1):
        mu = S[..., k : k + 1] - lam * mu
    return mu


def newton_matrix(A: np.ndarray, r: int) -> np.ndarray:
    """P_r for an explicit symmetric matrix A, by the same recursion."""
    A = np.asarray(A, dtype=float)
    m = A.shape[-1]
    lam = np.linalg.eigvalsh(A)
    S = elementary_symmetric(lam, r)
    P = np.eye(m)
    for k in range(1, r + 1):
        P = S[k] * np.eye(m) - A @ P
    return P


def newton(spec: ShapeSpectrum, r: int, basis: np.ndarray | None = None) -> NewtonOp:
    """Newton transformation P_r.

    ``basis`` (columns orthonormal, in the ambient or any fixed frame) gives
    the principal directions; when supplied the matrix of P_r in that frame is
    attached.
    """
    _check_order(spec.m, r, spec.m - 1)
    mu = newton_eigenvalues(spec.array(), r)
    mat = None
    if basis is not None:
        E = np.asarray(basis, dtype=float)
        mat = E @ np.diag(mu) @ E.T
    return NewtonOp(r=r, eigenvalues=mu, matrix=mat)


def trace_identities(spec: ShapeSpectrum, r: int) -> tuple[float, float, float]:
    """Absolute residuals of the three trace identities for P_r.

    tr P_r = (m-r) S_r, tr A P_r = (r+1) S_{r+1},
    tr A^2 P_r = S_1 S_{r+1} - (r+2) S_{r+2}, with S_k = 0 for k > m.
    """
    m = spec.m
    _check_order(m, r, m - 1)
    lam = spec.array()
    mu = newton_eigenvalues(lam, r)
    tab = sym_all(spec)
    res1 = abs(mu.sum() - (m - r) * tab.s(r))
    res2 = abs((lam * mu).sum() - (r + 1) * tab.s(r + 1))
    res3 = abs((lam**2 * mu).sum() - (tab.s(1) * tab.s(r + 1) - (r + 2) * tab.s(r + 2)))
    return res1, res2, res3


def identity_scale(spec: ShapeSpectrum, r: int) -> tuple[float, float, float]:
    """Natural magnitudes for the three identities.

    The recursion for P_r carries terms of size a_r = sum_k S_k(|lambda|) L^(r-k),
    L = max |lambda_i|, so round-off in mu is relative to a_r, not to S_r(|lambda|).
    """
    lam = np.abs(spec.array())
    absS = elementary_symmetric(lam)
    m = spec.m
    L = float(lam.max())

    def s(k):
        return absS[k] if k <= m else 0.0

    a = sum(s(k) * L ** (r - k) for k in range(r + 1))
    return (
        m * a + (m - r) * s(r),
        L * m * a + (r + 1) * s(r + 1),
        L * L * m * a + s(1) * s(r + 1) + (r + 2) * s(r + 2),
    )


def frobenius_norm(lambdas) -> np.ndarray:
    lam = np.asarray(lambdas, dtype=float)
    # scale first so tiny spectra do not underflow in the squares
    top = np.abs(lam).max(axis=-1, keepdims=True)
    safe = np.where(top > 0, top, 1.0)
    return (safe * np.sqrt(((lam / safe) ** 2).sum(axis=-1, keepdims=True)))[..., 0]


@dataclass(frozen=True)
class BoundReport:
    norm_A: float
    norm_P: float
    s_ratios: tuple[float, ...]  # |S_k| / (binom(m,k) |A|^k), k = 0..m
    s_bound_ok: bool
    p_bound: float
    p_bound_ok: bool


def norms_and_bounds(spec: ShapeSpectrum, r: int, rtol: float = 1e-12) -> BoundReport:
    """|A| (Frobenius), |P_r| (spectral) and the two coefficient bounds."""
    m = spec.m
    _check_order(m, r, m - 1)
    lam = spec.array()
    nA = float(frobenius_norm(lam))
    mu = newton_eigenvalues(lam, r)
    nP = float(np.abs(mu).max())
    S = sym_all(spec).S
    binom = binomials(m)
    ratios = []
    ok = True
    for k in range(m + 1):
        bound = binom[k] * nA**k
        if bound > 0:
            ratios.append(abs(S[k]) / bound)
        else:
            ratios.append(0.0 if S[k] == 0 else float("inf"))
        ok &= abs(S[k]) <= bound * (1 + rtol) + 1e-300
    p_bound = (2**m - 1) * nA**r
    return BoundReport(
        norm_A=nA,
        norm_P=nP,
        s_ratios=tuple(ratios),
        s_bound_ok=bool(ok),
        p_bound=p_bound,
        p_bound_ok=bool(nP <= p_bound * (1 + rtol) + 1e-300),
    )


def zero_tol(lambdas, order: int, tol: float = 1e-8) -> np.ndarray:
    """Tolerance for "S_order vanishes": tol * (1 + |A|^order)."""
    return tol * (1 + frobenius_norm(lambdas) ** order)


@dataclass(frozen=True)
class PositivityReport:
    r: int
    conditions: dict[str, bool]
    p_nonneg: bool
    p_semidefinite: bool  # nonneg after a possible orientation flip

    @property
    def any_condition(self) -> bool:
        return any(self.conditions.values())


def positivity_class(spectra, r: int, tol: float = 1e-8) -> PositivityReport:
    """Which sufficient conditions for P_r >= 0 hold on a sample of spectra.

    ``spectra`` is a sequence of ShapeSpectrum or an array of shape (N, m).
    Condition (e) lets k run up to m: S_m > 0 together with a point of
    non-negative curvatures already forces strict convexity.
    """
    if isinstance(spectra, np.ndarray):
        lam = np.asarray(spectra, dtype=float)
    else:
        spectra = list(spectra)
        if not spectra:
            raise ValueError("empty spectrum sample")
        lam = np.array([s.array() for s in spectra])
    if lam.ndim != 2 or lam.shape[0] == 0:
        raise ValueError("empty spectrum sample")
    m = lam.shape[1]
    _check_order(m, r, m - 1)
    S = elementary_symmetric(lam)

    def s(k):
        return S[:, k] if k <= m else np.zeros(len(lam))

    def vanishes(k):
        return bool(np.all(np.abs(s(k)) <= zero_tol(lam, k, tol)))

    def nonneg(k):
        return bool(np.all(s(k) >= -zero_tol(lam, k, tol)))

    def nonzero(k):
        return bool(np.all(np.abs(s(k)) > zero_tol(lam, k, tol)))

    odd = r % 2 == 1
    conds = {
        "a": vanishes(r + 1) and odd,
        "b": vanishes(r + 1) and not odd and nonneg(r),
        "c": odd and vanishes(r + 1) and nonzero(r + 2),
        "d": (not odd) and vanishes(r + 1) and nonzero(r + 2) and nonneg(r),
    }
    has_convex_point = bool(np.any(np.all(lam >= -tol, axis=1)))
    conds["e"] = r == 0 or (
        has_convex_point
        and any(bool(np.all(s(k) > zero_tol(lam, k, tol))) for k in range(max(r + 1, 1), m + 1))
    )
    mu = newton_eigenvalues(lam, r)
    scale = zero_tol(lam, r, tol)[:, None]
    p_nonneg = bool(np.all(mu >= -scale))
    p_nonpos = bool(np.all(mu <= scale))
    return PositivityReport(
        r=r,
        conditions=conds,
        p_nonneg=p_nonneg,
        p_semidefinite=p_nonneg or (odd and p_nonpos),
    )


def scal_from_S2(S1: float, S2: float, ambient) -> float:
    """Intrinsic scalar curvature from the twice-traced Gauss equation.

    ``S1`` does not enter; it is accepted so callers can pass a full table.
    """
    lam = getattr(ambient, "einstein_constant", None)
    if lam is None:
        from .ambient import UnsupportedAmbient

        raise UnsupportedAmbient(f"ambient {getattr(ambient, 'kind', ambient)!r} has no Einstein constant")
    m = ambient.dimension - 1
    return (m - 1) * lam + 2.0 * S2
