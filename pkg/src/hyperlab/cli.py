"""Command line: batch runs from a JSON config with deterministic reports.

    hyperlab <subcommand> [--config PATH] [--out DIR] [--tol X] [--quiet]

The report body (report.json) is a pure function of the config: floats are
written with 17 significant digits, keys in a fixed order, and no
timestamps. Timings and environment go to report.meta.json.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import sympy as sp

from . import acceptance, ambient, geom, ineq, rigidity, soliton
from . import measure as ms
from .mesh import Mesh, load_obj, mesh_spectra

SCHEMA_VERSION = 1

INEQ_TASKS = ("poincare-spaceform", "poincare-einstein", "iso-chain", "ball-volume", "divergence-identity")
SCAN_TASKS = ("decay-scan", "checklist")
SOLITON_TASKS = ("soliton-residual", "soliton-shoot", "theorem-5.2")
MESH_TASKS = ("poincare-einstein",)
ALL_TASKS = INEQ_TASKS + SCAN_TASKS + SOLITON_TASKS + ("acceptance",)
FAMILIES = {"verify": INEQ_TASKS, "scan": SCAN_TASKS, "soliton": SOLITON_TASKS}

_num = {"type": "number"}
_vec = {"type": "array", "items": _num}
_pos = {"type": "number", "exclusiveMinimum": 0}

SURFACE = {
    "type": "object",
    "oneOf": [
        {"required": ["catalog"]},
        {"required": ["mesh"]},
        {"required": ["chart"]},
    ],
    "properties": {
        "catalog": {"type": "string"},
        "params": {"type": "object"},
        "mesh": {"type": "string"},
        "chart": {
            "type": "object",
            "required": ["symbols", "exprs", "lo", "hi"],
            "properties": {
                "symbols": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "exprs": {"type": "array", "items": {"type": "string"}, "minItems": 2},
                "lo": _vec,
                "hi": _vec,
                "c": _num,
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

AMBIENT = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["space-form", "product", "constant-F", "complex-projective", "schwarzschild"]},
        "c": _num,
        "m": {"type": "integer", "minimum": 1},
        "c1": _num,
        "p1": {"type": "integer", "minimum": 1},
        "c2": _num,
        "p2": {"type": "integer", "minimum": 1},
        "value": _num,
        "einstein-constant": _num,
        "beta": _pos,
    },
    "additionalProperties": False,
}

REGION = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["whole", "ball", "box"]},
        "center": _vec,
        "radius": _pos,
        "resolution": _pos,
        "lo": _vec,
        "hi": _vec,
    },
    "additionalProperties": False,
}

FIELD = {
    "oneOf": [
        {"const": "constant"},
        _num,
        {"type": "object", "required": ["expr"], "properties": {"expr": {"type": "string"}},
         "additionalProperties": False},
        {"type": "object", "required": ["ramp"], "properties": {"ramp": _pos}, "additionalProperties": False},
    ]
}

TOLERANCES = {
    "type": "object",
    "properties": {"eq-tol": _pos, "rel-tol": _pos, "tol": _pos},
    "additionalProperties": False,
}

TASK = {
    "type": "object",
    "required": ["task"],
    "properties": {
        "task": {"enum": list(ALL_TASKS)},
        "surface": SURFACE,
        "ambient": AMBIENT,
        "region": REGION,
        "weights": {"type": "object", "properties": {"u": FIELD, "f": FIELD}, "additionalProperties": False},
        "tolerances": TOLERANCES,
        "r": {"type": "integer", "minimum": 0},
        "center": _vec,
        "radius": _pos,
        "operator": {"oneOf": [{"type": "string"}, {"type": "array", "items": _vec}]},
        "weight": {"enum": list(rigidity.WEIGHTS)},
        "radii": {"type": "array", "items": _pos, "minItems": 2},
        "theorem": {"enum": list(rigidity.THEOREMS)},
        "complete": {"type": "boolean"},
        "contained": {"type": "boolean"},
        "alpha": {"oneOf": [_num, {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}]},
        "delta": _num,
        "m": {"type": "integer", "minimum": 2},
        "start": {"enum": ["axis", "equator"]},
        "bracket": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
        "criterion": {"type": "integer", "minimum": 1, "maximum": len(acceptance.CRITERIA)},
        "csv": {"type": "boolean"},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["schema", "tasks"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "surface": SURFACE,
        "ambient": AMBIENT,
        "region": REGION,
        "weights": TASK["properties"]["weights"],
        "tolerances": TOLERANCES,
        "tasks": {"type": "array", "items": TASK, "minItems": 1},
        "outputs": {
            "type": "object",
            "properties": {"report": {"type": "string"}, "csv": {"type": "boolean"}},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


class ConfigError(ValueError):
    pass


# -- serialisation ---------------------------------------------------------------


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    return text if any(ch in text for ch in ".en") else text + ".0"


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with 17 significant digits for floats and insertion-ordered keys."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(pad + v for v in items) + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [json.dumps(str(k)) + ": " + dumps(v, indent, _level + 1) for k, v in obj.items()]
        return "{\n" + ",\n".join(pad + v for v in items) + "\n" + end + "}"
    return json.dumps(str(obj))


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(float(v), ".17g") if isinstance(v, (float, np.floating)) else v for v in row])
    Path(path).write_text(buf.getvalue(), newline="")


# -- config resolution -------------------------------------------------------------


def load_config(path) -> dict:
    text = Path(path).read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    validate_config(cfg, str(path))
    return cfg


def validate_config(cfg: dict, name: str = "config"):
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{name}: at {where}: {exc.message}") from None


def _kw(params: dict) -> dict:
    return {k.replace("-", "_"): v for k, v in (params or {}).items()}


def build_surface(spec: dict):
    if "catalog" in spec:
        return geom.catalog(spec["catalog"], **_kw(spec.get("params")))
    if "mesh" in spec:
        return load_obj(spec["mesh"])
    ch = spec["chart"]
    syms = sp.symbols(ch["symbols"], real=True)
    syms = tuple(syms) if isinstance(syms, (list, tuple)) else (syms,)
    loc = {str(x): x for x in syms}
    exprs = [sp.sympify(e, locals=loc) for e in ch["exprs"]]
    return geom.from_sympy("chart", syms, exprs, float(ch.get("c", 0.0)), ch["lo"], ch["hi"])


def mesh_data(mesh: Mesh) -> ineq.SampledData:
    """Vertex samples of a mesh: lumped areas, fitted spectra, distance to the
    vertex centroid and the vertex diameter. Boundary vertices are dropped."""
    idx, lam = mesh_spectra(mesh)
    if len(idx) == 0:
        raise ConfigError(f"mesh {mesh.name!r} has no interior vertex with a determined shape operator")
    lumped = np.zeros(len(mesh.V))
    for k in range(3):
        np.add.at(lumped, mesh.F[:, k], mesh.face_areas() / 3)
    P = mesh.V[idx]
    centre = P.mean(axis=0)
    diam = float(np.sqrt(np.max(np.sum((mesh.V[:, None, :] - mesh.V[None, :, :]) ** 2, axis=-1))))
    return ineq.SampledData(lumped[idx], lam, np.linalg.norm(P - centre, axis=1), diam)


def build_ambient(spec: dict | None, surface=None):
    if spec is None:
        if surface is None or not hasattr(surface, "c"):
            return None
        return ambient.space_form(surface.c, surface.m)
    k = spec["kind"]
    if k == "space-form":
        return ambient.space_form(spec.get("c", 0.0), spec.get("m", surface.m if surface is not None else 2))
    if k == "product":
        return ambient.product(spec["c1"], spec["p1"], spec["c2"], spec["p2"])
    if k == "constant-F":
        return ambient.constant_F(spec["value"], spec["m"], spec.get("einstein-constant"))
    if k == "complex-projective":
        return ambient.complex_projective(spec["m"])
    return ambient.schwarzschild(spec["beta"])


def build_region(spec: dict | None, surface):
    spec = spec or {"kind": "whole"}
    if spec["kind"] == "whole":
        return ms.whole(surface)
    if spec["kind"] == "box":
        return ms.box_region(surface, spec["lo"], spec["hi"])
    centre = np.asarray(spec.get("center", surface.center()), dtype=float)
    return ms.intrinsic_ball(surface, centre, spec["radius"], spec.get("resolution"))


def build_field(spec, region, D):
    if spec is None or spec == "constant":
        return None
    if isinstance(spec, (int, float)):
        return float(spec)
    if "ramp" in spec:
        return ms.Ramp(region, spec["ramp"])
    return ms.AmbientExpr(spec["expr"], D)


def _alpha(a):
    if isinstance(a, list):
        return Fraction(a[0], a[1])
    return float(a)


@dataclass
class Task:
    index: int
    spec: dict
    surface_spec: dict | None
    ambient_spec: dict | None
    region_spec: dict | None
    weights: dict
    tolerances: dict
    csv: bool = False


def resolve(cfg: dict, family: tuple | None = None, tol: float | None = None) -> list[Task]:
    """Merge per-task overrides into the global blocks and check that every
    referenced id resolves before anything runs."""
    tasks = []
    for i, t in enumerate(cfg["tasks"]):
        if family is not None and t["task"] not in family:
            raise ConfigError(f"tasks/{i}: task {t['task']!r} does not belong to this subcommand")
        tols = dict(cfg.get("tolerances", {}), **t.get("tolerances", {}))
        if tol is not None:
            tols["eq-tol"] = tol
        task = Task(i, t, t.get("surface", cfg.get("surface")), t.get("ambient", cfg.get("ambient")),
                    t.get("region", cfg.get("region")), dict(cfg.get("weights", {}), **t.get("weights", {})), tols,
                    bool(t.get("csv", cfg.get("outputs", {}).get("csv", False))))
        needs_surface = t["task"] not in ("acceptance", "soliton-shoot")
        if needs_surface:
            if task.surface_spec is None:
                raise ConfigError(f"tasks/{i}: no surface declared")
            if "catalog" in task.surface_spec and task.surface_spec["catalog"] not in geom.CATALOG_DOCS:
                raise ConfigError(f"tasks/{i}: unknown surface id {task.surface_spec['catalog']!r}; "
                                  f"known: {sorted(geom.CATALOG_DOCS)}")
            if "mesh" in task.surface_spec:
                if t["task"] not in MESH_TASKS:
                    raise ConfigError(f"tasks/{i}: task {t['task']!r} needs a chart surface, not a mesh")
                if not Path(task.surface_spec["mesh"]).exists():
                    raise ConfigError(f"tasks/{i}: mesh file {task.surface_spec['mesh']!r} not found")
        tasks.append(task)
    return tasks


# -- execution ----------------------------------------------------------------------


REPORT_KEYS = ("inequality_id", "lhs", "rhs", "margin", "relative_margin", "equality", "flags",
               "tolerance_achieved", "details")


def _ordered(d: dict) -> dict:
    return dict({"schema": SCHEMA_VERSION}, **{k: d[k] for k in REPORT_KEYS})


def _report_entry(rep: ineq.Report, eq_tol: float, task: str) -> dict:
    hard = [x for x in rep.all() if x.violated(eq_tol) and x.flags.get("applicable", True)]
    out = _ordered(rep.to_dict())
    out["task"] = task
    out["related"] = [_ordered(x.to_dict()) for x in rep.related]
    out["status"] = "failed" if hard else "ok"
    return out


def run_task(task: Task) -> tuple[dict, dict]:
    """Returns (report entry, side outputs such as CSV tables)."""
    t = task.spec
    name = t["task"]
    eq_tol = float(task.tolerances.get("eq-tol", ineq.EQ_TOL))
    rel_tol = float(task.tolerances.get("rel-tol", ms.REL_TOL))
    tol = float(task.tolerances.get("tol", 1e-6))
    side = {}
    if name == "acceptance":
        res = acceptance.run_criterion(t["criterion"])
        entry = {"schema": SCHEMA_VERSION, "task": name, "result": res.body(),
                 "status": "ok" if res.passed else "failed"}
        side["seconds"] = res.seconds
        side["time_limit"] = res.time_limit
        return entry, side
    if name == "soliton-shoot":
        spec = soliton.SolitonSpec(t.get("r", 0), _alpha(t.get("alpha", 1.0)), t["delta"])
        kw = {"mode": t.get("start", "axis")}
        if "bracket" in t:
            kw["bracket"] = tuple(t["bracket"])
        res = soliton.shoot(spec, t.get("m", 2), **kw)
        loop = soliton.loop_residual(res).sup if res.closed else float("nan")
        entry = {"schema": SCHEMA_VERSION, "task": name,
                 "result": {"radius": res.radius, "closed": res.closed, "start": res.start, "event": res.event,
                            "iterations": res.iterations, "richardson": res.richardson,
                            "loop_residual": loop, "flags": res.flags},
                 "status": "ok"}
        side["profile"] = res
        return entry, side

    surface = build_surface(task.surface_spec)
    if isinstance(surface, Mesh):
        amb = build_ambient(task.ambient_spec or {"kind": "space-form", "c": 0.0, "m": 2})
        rep = ineq.poincare_einstein(mesh_data(surface), amb, eq_tol=eq_tol, rel_tol=rel_tol)
        return _report_entry(rep, eq_tol, name), side
    amb = build_ambient(task.ambient_spec, surface)
    r = t.get("r", 0)
    if name in ("poincare-spaceform", "poincare-einstein", "iso-chain"):
        region = build_region(task.region_spec, surface)
        u = build_field(task.weights.get("u"), region, surface.D)
        f = build_field(task.weights.get("f"), region, surface.D)
        if name == "poincare-spaceform":
            rep = ineq.poincare_spaceform(surface, region, r, u=u, f=f, eq_tol=eq_tol, rel_tol=rel_tol)
        elif name == "poincare-einstein":
            rep = ineq.poincare_einstein(region, amb, u=u, f=f, eq_tol=eq_tol, rel_tol=rel_tol)
        else:
            rep = ineq.iso_chain(surface, region, r, eq_tol=eq_tol, rel_tol=rel_tol)
        return _report_entry(rep, eq_tol, name), side
    if name == "ball-volume":
        centre = np.asarray(t.get("center", surface.center()), dtype=float)
        rep = ineq.ball_volume_bounds(surface, centre, t["radius"], eq_tol=eq_tol, rel_tol=rel_tol)
        return _report_entry(rep, eq_tol, name), side
    if name == "divergence-identity":
        op = t.get("operator", "identity")
        op = np.asarray(op, dtype=float) if isinstance(op, list) else op
        worst, _ = ineq.divergence_identity_check(surface, op)
        rep = ineq.Report.build("divergence-identity", worst, tol, 0.0, {"operator": str(t.get("operator",
                                                                                            "identity"))})
        entry = _report_entry(rep, 0.0, name)
        entry["status"] = "ok" if worst <= tol else "failed"
        return entry, side
    centre = np.asarray(t.get("center", surface.center()), dtype=float)
    if name == "decay-scan":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            scan = rigidity.decay_scan(surface, centre, r, t.get("weight", "h_c"),
                                       t.get("radii", (1.0, 2.0, 4.0, 8.0, 16.0)), ambient=amb)
        side["scan"] = scan
        return {"schema": SCHEMA_VERSION, "task": name, "result": scan.to_dict(), "status": "ok"}, side
    if name == "checklist":
        params = {"r": r, "x0": centre, "tol": tol, "ambient": amb}
        for k in ("radii", "complete", "contained"):
            if k in t:
                params[k] = t[k]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            chk = rigidity.theorem_checklist(surface, t["theorem"], params)
        side["scan"] = chk.scan
        return {"schema": SCHEMA_VERSION, "task": name, "result": chk.to_dict(), "status": "ok"}, side
    spec = soliton.SolitonSpec(r, _alpha(t.get("alpha", 1.0)), t["delta"], c=surface.c)
    if name == "soliton-residual":
        res = soliton.soliton_residual(surface, spec, both=True)
        entry = {"schema": SCHEMA_VERSION, "task": name,
                 "result": {"sup": res.sup, "flipped_sup": res.flipped.sup, "solution": res.sup <= tol,
                            "kind": spec.kind},
                 "status": "ok"}
        return entry, side
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        chk = soliton.theorem_5_2_check(surface, spec, x0=centre, tol=tol)
    side["scan"] = chk.scan
    return {"schema": SCHEMA_VERSION, "task": name, "result": chk.to_dict(), "status": "ok"}, side


def _safe_run(task: Task):
    t0 = time.perf_counter()
    try:
        entry, side = run_task(task)
    except Exception as exc:  # recorded per task, the batch carries on
        entry, side = {"schema": SCHEMA_VERSION, "task": task.spec["task"], "status": "error",
                       "error": {"type": type(exc).__name__, "message": str(exc)}}, {}
    entry["index"] = task.index
    side["wall_seconds"] = time.perf_counter() - t0
    return entry, side


def threads_from_env() -> int:
    raw = os.environ.get("HYPERLAB_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"HYPERLAB_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"HYPERLAB_THREADS must be a positive integer, got {raw!r}")
    return n


def execute(tasks: list[Task], threads: int = 1):
    """Run tasks, possibly in parallel; results come back in declaration order."""
    if threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(_safe_run, tasks))
    return [_safe_run(t) for t in tasks]


def exit_status(entries: list[dict]) -> int:
    return 1 if any(e["status"] in ("failed", "error") for e in entries) else 0


def emit(results, out_dir: Path | None, quiet: bool, report_name: str = "report.json", threads: int = 1):
    entries = [e for e, _ in results]
    body = dumps(entries) + "\n"
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / report_name).write_text(body)
        meta = {"threads": threads, "tasks": [{"index": e["index"], "task": e["task"],
                                               "wall_seconds": s["wall_seconds"],
                                               **({"time_limit": s["time_limit"], "seconds": s["seconds"]}
                                                  if "seconds" in s else {})} for e, s in results]}
        (out_dir / (Path(report_name).stem + ".meta.json")).write_text(dumps(meta) + "\n")
        for e, s in results:
            if "scan" in s and s["scan"] is not None:
                write_csv(out_dir / f"scan-{e['index']}.csv", ["R", "value", "weight"], s["scan"].rows())
            if "profile" in s:
                soliton.write_profile_csv(s["profile"], out_dir / f"profile-{e['index']}.csv")
        failures = [{"index": e["index"], "task": e["task"], "status": e["status"],
                     **({"error": e["error"]} if "error" in e else {})}
                    for e in entries if e["status"] != "ok"]
        manifest = out_dir / "failures.json"
        if failures:
            manifest.write_text(dumps(failures) + "\n")
        elif manifest.exists():
            manifest.unlink()
    if not quiet:
        sys.stdout.write(body)
    return exit_status(entries)


def packaged_selftest() -> dict:
    return json.loads(resources.files("hyperlab").joinpath("data/selftest.json").read_text())


# -- entry point ---------------------------------------------------------------------


def _parser():
    p = argparse.ArgumentParser(prog="hyperlab", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--out", type=Path, help="directory for report.json, meta and CSV files")
    common.add_argument("--tol", type=float, help="equality / violation tolerance (eq-tol)")
    common.add_argument("--quiet", action="store_true", help="do not print the report")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run every task of a config")
    sub.add_parser("verify", parents=[common], help="inequality tasks")
    sub.add_parser("scan", parents=[common], help="decay scans and theorem checklists")
    so = sub.add_parser("soliton", parents=[common], help="soliton residuals and shooting")
    so.add_argument("action", nargs="?", choices=["residual", "shoot"])
    so.add_argument("--r", type=int, default=0)
    so.add_argument("--alpha", type=str, default="1", help="exponent, e.g. 1, 0.5 or 1/3 (odd-rational)")
    so.add_argument("--delta", type=float, default=-0.5)
    so.add_argument("--m", type=int, default=2)
    so.add_argument("--start", choices=["axis", "equator"], default="axis")
    so.add_argument("--surface", type=str, help="catalog id for residual")
    so.add_argument("--param", action="append", default=[], help="surface parameter key=value")
    sub.add_parser("catalog", parents=[common], help="list catalog surfaces")
    sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    return p


def _parse_alpha(text: str):
    if "/" in text:
        a, b = text.split("/")
        return [int(a), int(b)]
    return float(text)


def _param_value(v: str):
    try:
        return json.loads(v)
    except json.JSONDecodeError:
        return v


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "catalog":
            if not args.quiet:
                for name, doc in geom.CATALOG_DOCS.items():
                    print(f"{name:16s} {doc}")
            return 0
        if args.config is not None:
            cfg = load_config(args.config)
        elif args.command == "selftest":
            cfg = packaged_selftest()
        elif args.command == "soliton" and args.action is not None:
            task = {"task": "soliton-shoot" if args.action == "shoot" else "soliton-residual", "r": args.r,
                    "alpha": _parse_alpha(args.alpha), "delta": args.delta}
            if args.action == "shoot":
                task.update(m=args.m, start=args.start, csv=True)
            else:
                if args.surface is None:
                    raise ConfigError("soliton residual needs --surface or --config")
                params = dict(kv.split("=", 1) for kv in args.param)
                task["surface"] = {"catalog": args.surface, "params": {k: _param_value(v) for k, v in params.items()}}
            cfg = {"schema": SCHEMA_VERSION, "tasks": [task]}
            validate_config(cfg, "command line")
        else:
            raise ConfigError(f"{args.command} needs --config")
        family = FAMILIES.get(args.command)
        if args.command == "selftest":
            family = None
        tasks = resolve(cfg, family, args.tol)
        threads = threads_from_env()
    except (ConfigError, geom.CatalogError, OSError) as exc:
        print(f"hyperlab: error: {exc}", file=sys.stderr)
        return 2
    results = execute(tasks, threads)
    out = args.out
    if args.command == "soliton" and args.action == "shoot" and not args.quiet:
        e = results[0][0]
        if e["status"] == "ok":
            print(f"radius {e['result']['radius']:.4f}  closed {e['result']['closed']}")
        if out is None:
            out = Path(".")
    report_name = cfg.get("outputs", {}).get("report", "report.json")
    status = emit(results, out, args.quiet or (args.command == "soliton" and args.action == "shoot"),
                  report_name, threads)
    return status


if __name__ == "__main__":
    sys.exit(main())
