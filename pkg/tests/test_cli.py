import json
import math

import pytest

from hyperlab import cli

SPHERE = {"catalog": "sphere", "params": {"R": 1.0}}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def run(argv, capsys=None):
    code = cli.main(argv)
    out = capsys.readouterr() if capsys is not None else None
    return code, out


# -- serialisation ---------------------------------------------------------------------


def test_dumps_floats():
    assert cli.dumps(2.0) == "2.0"
    assert cli.dumps(0.1) == "0.10000000000000001"
    assert cli.dumps(1e-20) == "9.9999999999999995e-21"
    assert cli.dumps([math.nan, math.inf, -math.inf]) == '[\n  "nan",\n  "inf",\n  "-inf"\n]'


def test_dumps_keeps_key_order_and_roundtrips():
    obj = {"b": 1, "a": [True, None, 0.5], "c": {}}
    text = cli.dumps(obj)
    assert list(json.loads(text)) == ["b", "a", "c"]
    assert json.loads(text) == obj


def test_write_csv_crlf(tmp_path):
    p = tmp_path / "t.csv"
    cli.write_csv(p, ["R", "value", "weight"], [(1.0, 0.1, "h_c")])
    assert p.read_bytes() == b"R,value,weight\r\n1,0.10000000000000001,h_c\r\n"


# -- validation -----------------------------------------------------------------------


def test_schema_version_required():
    with pytest.raises(cli.ConfigError, match="schema"):
        cli.validate_config({"tasks": [{"task": "iso-chain"}]})


def test_unknown_key_rejected():
    with pytest.raises(cli.ConfigError, match="tasks/0"):
        cli.validate_config({"schema": 1, "tasks": [{"task": "iso-chain", "bogus": 1}]})


def test_broken_json_location(tmp_path):
    p = tmp_path / "b.json"
    p.write_text('{\n  "schema": ,\n}')
    with pytest.raises(cli.ConfigError, match=r"b.json:2:13"):
        cli.load_config(p)


def test_unknown_surface_exit_2(tmp_path, capsys):
    cfg = {"schema": 1, "surface": {"catalog": "torus"}, "tasks": [{"task": "iso-chain", "r": 0}]}
    code, out = run(["verify", "--config", str(write(tmp_path, cfg)), "--quiet"], capsys)
    assert code == 2 and "'torus'" in out.err


def test_wrong_family_exit_2(tmp_path, capsys):
    cfg = {"schema": 1, "surface": SPHERE, "tasks": [{"task": "decay-scan", "r": 1}]}
    code, out = run(["verify", "--config", str(write(tmp_path, cfg)), "--quiet"], capsys)
    assert code == 2


def test_missing_config_exit_2(capsys):
    code, _ = run(["verify", "--config", "/nonexistent/cfg.json"], capsys)
    assert code == 2


def test_bad_thread_count(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("HYPERLAB_THREADS", "zero")
    cfg = {"schema": 1, "surface": SPHERE, "tasks": [{"task": "iso-chain", "r": 0}]}
    code, _ = run(["verify", "--config", str(write(tmp_path, cfg)), "--quiet"], capsys)
    assert code == 2


# -- runs ----------------------------------------------------------------------------------


def test_sphere_equality_exit_0(tmp_path, capsys):
    cfg = {"schema": 1, "surface": SPHERE, "weights": {"u": "constant", "f": "constant"},
           "tasks": [{"task": "poincare-spaceform", "r": 0}]}
    code, out = run(["verify", "--config", str(write(tmp_path, cfg))], capsys)
    entries = json.loads(out.out)
    assert code == 0
    e = entries[0]
    assert list(e)[:10] == ["schema", "inequality_id", "lhs", "rhs", "margin", "relative_margin", "equality",
                            "flags", "tolerance_achieved", "details"]
    assert e["equality"] is True and e["status"] == "ok" and e["index"] == 0


def test_report_files_and_failures_manifest(tmp_path, capsys):
    out = tmp_path / "out"
    bad = {"schema": 1, "tasks": [
        {"task": "soliton-residual", "surface": {"catalog": "graph", "params": {"height": "x0**2 - x1**2"}},
         "r": 0, "alpha": 0.5, "delta": 1.0},
        {"task": "soliton-residual", "surface": SPHERE, "r": 0, "alpha": 1, "delta": -0.5},
    ]}
    code, _ = run(["soliton", "--config", str(write(tmp_path, bad)), "--out", str(out), "--quiet"], capsys)
    assert code == 1
    failures = json.loads((out / "failures.json").read_text())
    assert [f["index"] for f in failures] == [0] and failures[0]["error"]["type"] == "SolitonDomainError"
    report = json.loads((out / "report.json").read_text())
    assert [e["status"] for e in report] == ["error", "ok"]
    meta = json.loads((out / "report.meta.json").read_text())
    assert [t["index"] for t in meta["tasks"]] == [0, 1]
    # a clean rerun removes the stale manifest
    good = {"schema": 1, "tasks": [bad["tasks"][1]]}
    code, _ = run(["soliton", "--config", str(write(tmp_path, good, "g.json")), "--out", str(out), "--quiet"],
                  capsys)
    assert code == 0 and not (out / "failures.json").exists()


def test_report_name_from_config(tmp_path, capsys):
    cfg = {"schema": 1, "surface": SPHERE, "tasks": [{"task": "divergence-identity"}],
           "outputs": {"report": "div.json"}}
    out = tmp_path / "o"
    code, _ = run(["verify", "--config", str(write(tmp_path, cfg)), "--out", str(out), "--quiet"], capsys)
    assert code == 0 and (out / "div.json").exists() and (out / "div.meta.json").exists()


def test_scan_writes_csv(tmp_path, capsys):
    cfg = {"schema": 1, "surface": {"catalog": "plane"},
           "tasks": [{"task": "decay-scan", "r": 1, "center": [0.0, 0.0], "radii": [1.0, 2.0]}]}
    out = tmp_path / "o"
    code, _ = run(["scan", "--config", str(write(tmp_path, cfg)), "--out", str(out), "--quiet"], capsys)
    assert code == 0
    assert (out / "scan-0.csv").read_bytes().startswith(b"R,value,weight\r\n1,0,h_c\r\n")


def test_threads_give_identical_bytes(tmp_path, monkeypatch, capsys):
    cfg = {"schema": 1, "surface": SPHERE, "tasks": [
        {"task": "poincare-spaceform", "r": 0},
        {"task": "iso-chain", "r": 1, "region": {"kind": "ball", "center": [1.0, 0.0, 0.0], "radius": 1.0}},
        {"task": "ball-volume", "center": [1.0, 0.0, 0.0], "radius": 1.2},
    ]}
    p = str(write(tmp_path, cfg))
    bodies = []
    for n in ("1", "3"):
        monkeypatch.setenv("HYPERLAB_THREADS", n)
        out = tmp_path / f"o{n}"
        assert run(["verify", "--config", p, "--out", str(out), "--quiet"], capsys)[0] == 0
        bodies.append((out / "report.json").read_bytes())
    assert bodies[0] == bodies[1]


def test_soliton_residual_command_line(capsys):
    code, out = run(["soliton", "residual", "--surface", "sphere", "--param", "R=2.0", "--r", "0",
                     "--alpha", "1", "--delta", "-0.5"], capsys)
    entries = json.loads(out.out)
    assert code == 0 and entries[0]["result"]["sup"] <= 1e-8


def test_alpha_fraction_parsing():
    # the command line produces the config form, [p, q] for fractions
    assert cli._parse_alpha("1/3") == [1, 3] and cli._parse_alpha("2") == 2.0
    assert cli._alpha([1, 3]).denominator == 3


def test_catalog_listing(capsys):
    code, out = run(["catalog"], capsys)
    assert code == 0 and "geodesic-sphere" in out.out
