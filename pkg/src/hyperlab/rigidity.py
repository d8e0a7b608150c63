"""Decay functionals over intrinsic balls and hypothesis checklists for the
rigidity statements.

A limsup as R -> infinity cannot be decided numerically. The scans below
collect w(R) * (boundary integral) on a finite window of radii and classify
the trend with explicit thresholds; the checklists report evidence and
never assert a conclusion from numerics alone.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import measure as ms
from .ambient import AmbientSpec, calligraphic_G, hc, space_form
from .geom import Chart
from .symfun import elementary_symmetric, frobenius_norm

WEIGHTS = ("h_c", "G", "one", "A-power")
THEOREMS = ("thm-4.1", "thm-4.4", "cor-4.5", "cor-4.6")

NOT_MET = "hypotheses not met: no conclusion"
VERIFIED = "hypotheses verified at tolerance"

# kinds whose completeness / boundedness in the ambient is known
_COMPLETE = {"plane", "sphere", "cylinder", "geodesic-sphere"}
_BOUNDED = {"sphere": True, "geodesic-sphere": True, "plane": False, "cylinder": False}


@dataclass(frozen=True)
class ScanPolicy:
    decay_factor: float = 0.1  # v_k < decay_factor * v_1
    slope: float = 0.2  # |log-log slope| threshold
    zero_tol: float = 1e-9  # mean |integrand| on the boundary counted as zero


@dataclass
class DecayScan:
    radii: np.ndarray
    values: np.ndarray  # w(R) * integral
    integrals: np.ndarray
    boundary_measure: np.ndarray
    weight: str
    integrand: str
    slope: float
    classification: str
    truncated: np.ndarray
    policy: ScanPolicy = field(default_factory=ScanPolicy)
    flags: dict = field(default_factory=dict)

    def rows(self):
        """(R, value, weight) rows for CSV export."""
        return [(float(R), float(v), self.weight) for R, v in zip(self.radii, self.values)]

    def to_dict(self) -> dict:
        return {
            "weight": self.weight,
            "integrand": self.integrand,
            "radii": [float(x) for x in self.radii],
            "values": [float(x) for x in self.values],
            "slope": float(self.slope),
            "classification": self.classification,
            "truncated": [bool(x) for x in self.truncated],
            "policy": asdict(self.policy),
            "flags": dict(self.flags),
        }


def _integrand(weight: str, r: int):
    if weight == "A-power":
        return f"|A|^{r}", lambda lam: frobenius_norm(lam) ** r
    k = 1 if weight == "G" else r

    def H(lam):
        return elementary_symmetric(lam, k)[:, k] / math.comb(lam.shape[1], k)

    return f"H_{k}", H


def _weight_fn(weight: str, c: float, ambient: AmbientSpec | None, m: int):
    if weight in ("h_c", "A-power"):
        return lambda R: float(hc(c, R))
    if weight == "one":
        return lambda R: 1.0
    return lambda R, g=calligraphic_G(ambient or space_form(c, m)): float(g(R))


def _one_radius(surface: Chart, x0, R: float, fn, rel_tol: float):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        region = ms.intrinsic_ball(surface, x0, R)
    if region.truncated or not region.has_boundary():
        return 0.0, 0.0, 0.0, True

    def integrand(s):
        vals = fn(s.lambdas)
        return np.column_stack([vals, np.abs(vals), np.ones(len(vals))])

    vals, *_ = ms.quadrature(region, integrand, boundary=True, rel_tol=rel_tol)
    if len(vals) < 3:  # empty boundary
        return 0.0, 0.0, 0.0, True
    return float(vals[0]), float(vals[1]), float(vals[2]), False


def classify(radii, values, truncated, mean_abs, policy: ScanPolicy = ScanPolicy()):
    """Trend classification; returns (label, last-half log-log slope)."""
    radii = np.asarray(radii, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    if np.any(truncated):
        return "degenerate-compact", float("nan")
    if np.all(np.asarray(mean_abs) <= policy.zero_tol):
        return "decays-to-zero", float("-inf")
    half = slice(len(radii) // 2, None)
    tail_R, tail_v = radii[half], v[half]
    if len(tail_R) < 2:
        return "inconclusive", float("nan")
    if np.any(tail_v <= 0):
        slope = float("-inf")
    else:
        slope = float(np.polyfit(np.log(tail_R), np.log(tail_v), 1)[0])
    if v[-1] < policy.decay_factor * v[0] and slope < -policy.slope:
        return "decays-to-zero", slope
    if slope > policy.slope:
        return "grows", slope
    if abs(slope) <= policy.slope:
        return "bounded", slope
    return "inconclusive", slope


def decay_scan(surface: Chart, x0, r: int, weight: str = "h_c", radii=(1.0, 2.0, 4.0, 8.0, 16.0),
               ambient: AmbientSpec | None = None, policy: ScanPolicy = ScanPolicy(),
               rel_tol: float = 1e-6, threads: int | None = None) -> DecayScan:
    """w(R) * int_{dB_R} (H_r | H_1 | |A|^r) over increasing radii.

    weight: "h_c" and "one" integrate H_r, "G" integrates H_1 against the
    Einstein weight of ``ambient``, "A-power" integrates |A|^r against h_c.
    """
    if weight not in WEIGHTS:
        raise ValueError(f"unknown weight {weight!r}; expected one of {WEIGHTS}")
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or len(radii) < 2 or np.any(np.diff(radii) <= 0) or radii[0] <= 0:
        raise ValueError("radii must be positive and strictly increasing")
    name, fn = _integrand(weight, r)
    w = _weight_fn(weight, surface.c, ambient, surface.m)

    def job(R):
        return _one_radius(surface, x0, float(R), fn, rel_tol)

    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            out = list(ex.map(job, radii))
    else:
        out = [job(R) for R in radii]
    integrals = np.array([o[0] for o in out])
    abs_int = np.array([o[1] for o in out])
    meas = np.array([o[2] for o in out])
    trunc = np.array([o[3] for o in out])
    values = np.array([w(R) for R in radii]) * integrals
    mean_abs = np.where(meas > 0, abs_int / np.where(meas > 0, meas, 1.0), 0.0)
    label, slope = classify(radii, values, trunc, mean_abs, policy)
    flags = {"truncated scan": bool(trunc.any())}
    return DecayScan(radii, values, integrals, meas, weight, name, slope, label, trunc, policy, flags)


# -- checklists ---------------------------------------------------------------


def ricci_from_spectrum(lambdas, c: float) -> np.ndarray:
    """Ric(e_i) = (m-1)c + lambda_i (S_1 - lambda_i) in a space form (Gauss equation)."""
    lam = np.atleast_2d(np.asarray(lambdas, dtype=float))
    m = lam.shape[1]
    return (m - 1) * c + lam * (lam.sum(axis=1, keepdims=True) - lam)


def sampled_rank(lambdas, rel: float = 1e-6, abs_floor: float = 1e-9) -> np.ndarray:
    lam = np.atleast_2d(np.asarray(lambdas, dtype=float))
    scale = np.maximum(frobenius_norm(lam), abs_floor)
    return np.sum(np.abs(lam) > rel * scale[:, None], axis=1)


@dataclass
class Check:
    name: str
    passed: bool | None  # None: undetermined
    value: float | str | None = None
    note: str = ""


@dataclass
class Checklist:
    theorem: str
    params: dict
    checks: list
    label: str
    consistency: dict
    scan: DecayScan | None = None
    notes: list = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(ch.passed is True for ch in self.checks)

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "params": {k: v for k, v in self.params.items() if isinstance(v, (int, float, str, bool))},
            "checks": [asdict(ch) for ch in self.checks],
            "all_passed": self.all_passed,
            "label": self.label,
            "consistency": dict(self.consistency),
            "scan": None if self.scan is None else self.scan.to_dict(),
            "notes": list(self.notes),
        }


def _samples(surface: Chart, n: int):
    s = ms.sample_interior(ms.whole(surface), n)
    return s.lambdas


def _scale(lam, k):
    return max(1.0, float(np.max(frobenius_norm(lam)))) ** k


def theorem_checklist(surface: Chart, theorem: str, params: dict | None = None) -> Checklist:
    """Hypotheses of a rigidity statement checked on samples of ``surface``.

    params: r, c (default: the chart's ambient curvature), ambient, x0,
    radii, tol, n (samples per axis), complete / contained overrides.
    """
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem id {theorem!r}; expected one of {THEOREMS}")
    p = dict(params or {})
    m = surface.m
    c = float(p.get("c", surface.c))
    r = int(p.get("r", 1))
    tol = float(p.get("tol", 1e-6))
    x0 = p.get("x0", surface.center())
    radii = p.get("radii", (1.0, 2.0, 4.0, 8.0, 16.0))
    ambient = p.get("ambient") or space_form(c, m)
    lam = _samples(surface, int(p.get("n", 10)))
    kind = surface.info.get("kind")
    checks, notes = [], []

    complete = p.get("complete", True if kind in _COMPLETE else None)
    checks.append(Check("complete", complete, note="" if kind in _COMPLETE else "asserted by caller"))

    def minimal(k):
        Sk = elementary_symmetric(lam, k)[:, k]
        worst = float(np.max(np.abs(Sk)))
        return Check(f"{k}-minimal (|S_{k}| <= tol)", worst <= tol * _scale(lam, k), worst)

    def parity():
        if r % 2 == 1:
            return Check("r odd, or r even and H_r >= 0", True, "r odd", "orientation chosen so that P_r >= 0")
        Hr = elementary_symmetric(lam, r)[:, r] / math.comb(m, r)
        worst = float(np.min(Hr))
        return Check("r odd, or r even and H_r >= 0", worst >= -tol * _scale(lam, r), worst)

    def decay(weight, rr):
        scan = decay_scan(surface, x0, rr, weight, radii, ambient=ambient)
        return scan, Check(f"decay ({weight}, {scan.integrand})", scan.classification == "decays-to-zero",
                           scan.classification)

    def const_scal():
        # Gauss equation in an Einstein ambient: Scal = (m-1) lambda + 2 S_2
        defect = 2 * elementary_symmetric(lam, 2)[:, 2]
        worst = float(np.max(np.abs(defect)))
        return Check("constant scalar curvature (m-1)lambda", worst <= tol * _scale(lam, 2), worst)

    if theorem in ("thm-4.1", "cor-4.6"):
        checks.append(Check("1 <= r <= m-1", 1 <= r <= m - 1, r))
        checks.append(minimal(r + 1))
        checks.append(parity())
    if theorem == "cor-4.6":
        checks.append(Check("c <= 0", c <= 0, c))
        contained = p.get("contained", _BOUNDED.get(kind))
        checks.append(Check("contained in a geodesic ball", contained,
                            note="" if kind in _BOUNDED else "asserted by caller"))
        scan, ch = decay("one", r)
    elif theorem == "thm-4.1":
        scan, ch = decay("h_c", r)
    else:
        if theorem == "cor-4.5" and ambient.kind != "space-form":
            raise ValueError("cor-4.5 needs a space-form ambient")
        if ambient.einstein_constant is None:
            checks.append(Check("Einstein ambient", False, ambient.kind))
        checks.append(const_scal())
        S1 = elementary_symmetric(lam, 1)[:, 1]
        checks.append(Check("S_1 >= 0", float(np.min(S1)) >= -tol * _scale(lam, 1), float(np.min(S1)),
                            "orientation may be flipped"))
        scan, ch = decay("G" if theorem == "thm-4.4" else "h_c", 1)
    checks.append(ch)

    Amax = float(np.max(frobenius_norm(lam)))
    if theorem == "thm-4.1":
        ranks = sampled_rank(lam)
        consistency = {"max rank A": int(ranks.max()), "bound": r - 1, "passed": bool(ranks.max() <= r - 1)}
        ric = float(np.min(ricci_from_spectrum(lam, c)))
        label = f"foliated by ({m - r + 1})-dimensional totally geodesic submanifolds"
        if c == 0 and ric >= -tol:
            label = f"foliated / N x R^{m - r + 1} (Hartman case)"
        elif c > 0 and ric >= c - tol:
            label = "totally geodesic"
        notes.append(f"Ricci lower bound from samples: {ric:.6g} (hypersurface samples only)")
    elif theorem == "cor-4.6":
        consistency = {"passed": False, "note": "no such hypersurface should exist"}
        label = f"there is no complete ({r + 1})-minimal hypersurface with these properties"
    else:
        consistency = {"max |A|": Amax, "passed": bool(Amax <= tol)}
        label = "totally geodesic"

    out = Checklist(theorem, dict(p, r=r, c=c, tol=tol), checks, label, consistency, scan, notes)
    if out.all_passed:
        out.label = f"{VERIFIED}: {label}"
    else:
        out.label = NOT_MET
        out.consistency = dict(consistency, passed=None)
    return out
