import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from poncelet.cli import load_schema, main

SVG_NS = "{http://www.w3.org/2000/svg}"


def write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    report = json.loads(capsys.readouterr().out)
    return code, report


@pytest.fixture
def ellipse_scene(tmp_path):
    return write(tmp_path / "scene.json", {
        "format_version": "1.0", "dimension": 2, "semi_axes": [4.0, 1.0],
        "boundaries": [{"lambda": 0.0, "side": "inside"}],
        "start": {"point": [0.0, 0.0], "direction": [0.6, 0.8]},
    })


def test_simulate_shape_schema_and_determinism(tmp_path, capsys, ellipse_scene):
    import jsonschema

    outs = [tmp_path / "t1.json", tmp_path / "t2.json"]
    for out in outs:
        code, report = run(capsys, "simulate", "--scene", ellipse_scene, "--bounces", "10", "--out", str(out))
        assert code == 0 and report["exit_code"] == 0
        jsonschema.validate(report, load_schema("run_report"))
    doc = json.loads(outs[0].read_text())
    jsonschema.validate(doc, load_schema("trajectory"))
    assert len(doc["vertices"]) == 11
    assert outs[0].read_bytes() == outs[1].read_bytes()


def test_simulate_invalid_signature(tmp_path, capsys):
    scene = write(tmp_path / "game.json", {
        "format_version": "1.0", "dimension": 2, "semi_axes": [4.0, 1.0], "mode": "game",
        "game": {"betas": [0.5, 0.2], "signature": [-1, -1]}, "caustics": [0.9],
    })
    code, report = run(capsys, "simulate", "--scene", scene, "--out", str(tmp_path / "t.json"))
    assert code == 2
    assert report["error"]["name"] == "InvalidSignature" and "index 0" in report["error"]["message"]


def test_check_exit_codes(tmp_path, capsys):
    params = {"semi_axes": [4.0, 1.0], "caustics": [0.5], "ranges": [[1.0, 4.0], [0.0, 0.5]], "counts": [0, 0]}
    code, _ = run(capsys, "check", "theorem1", "--params", json.dumps(params))
    assert code == 0
    out = tmp_path / "c.json"
    code, _ = run(capsys, "check", "corollary1", "--params",
                  json.dumps({"semi_axes": [4.0, 1.0], "alpha": 0.5, "gamma": 0.0, "m": 3}), "--out", str(out))
    doc = json.loads(out.read_text())
    assert code == 0 and float(doc["residual"]) == 0.0
    code, report = run(capsys, "check", "prop2", "--params",
                       json.dumps({"semi_axes": [4.0, 2.0, 1.0], "gamma": 1.5, "alpha": 1.3, "k": 6}))
    assert code == 2 and report["error"]["name"] == "HypothesisViolated"


def test_check_reads_params_file(tmp_path, capsys):
    pfile = write(tmp_path / "p.json", {"semi_axes": [4.0, 1.0], "alpha": 0.5, "betas": [0.1, 0.3]})
    code, report = run(capsys, "check", "lebesgue", "--params", "@" + pfile)
    assert code == 1 and report["outputs"]["decision"] == "not-satisfied"


def test_search_then_check_then_render(tmp_path, capsys, ellipse_scene):
    res_path = tmp_path / "search.json"
    code, _ = run(capsys, "search-periodic", "--scene", ellipse_scene, "--period", "3", "--out", str(res_path))
    assert code == 0
    row = json.loads(res_path.read_text())["results"][0]
    assert row["found"] and row["closure_error"] < 1e-6
    alpha = row["caustics"][0]
    params = {"semi_axes": [4.0, 1.0], "caustics": [alpha], "ranges": [[1.0, 4.0], [0.0, alpha]], "counts": [2, 3]}
    code, _ = run(capsys, "check", "theorem1", "--params", json.dumps(params))
    assert code == 0
    traj = write(tmp_path / "traj.json", {
        "format_version": "1.0", "kind": "trajectory", "dimension": 2, "semi_axes": [4.0, 1.0],
        "walls": [0.0], "caustics": [alpha], "vertices": row["vertices"], "bounces": [],
    })
    svg = tmp_path / "orbit.svg"
    code, _ = run(capsys, "render", traj, "--out", str(svg))
    assert code == 0
    lines = ET.parse(svg).getroot().findall(f".//{SVG_NS}polyline")
    assert len(lines) == 1 and lines[0].get("class") == "trajectory closed"
    pts = lines[0].get("points").split()
    assert len(pts) == 4 and pts[0] == pts[-1]


def test_axial_period_two(tmp_path, capsys, ellipse_scene):
    out = tmp_path / "s.json"
    code, _ = run(capsys, "search-periodic", "--scene", ellipse_scene, "--period", "2", "--out", str(out))
    row = json.loads(out.read_text())["results"][0]
    assert code == 0 and row["found"]
    assert row["start"] == [2.0, 0.0] and row["direction"] == [-1.0, 0.0]


def test_render_empty_and_projections(tmp_path, capsys):
    base = {"format_version": "1.0", "kind": "trajectory", "dimension": 3, "semi_axes": [9.0, 4.0, 1.0],
            "walls": [0.0], "caustics": [], "bounces": []}
    empty = write(tmp_path / "empty.json", {**base, "vertices": []})
    svg = tmp_path / "e.svg"
    assert main(["render", empty, "--out", str(svg)]) == 0
    root = ET.parse(svg).getroot()
    assert not root.findall(f".//{SVG_NS}polyline") and root.findall(f".//{SVG_NS}path")
    traj = write(tmp_path / "t.json", {**base, "vertices": [[1.0, 0.5, 0.2], [-1.0, 0.3, -0.4]]})
    points = {}
    for proj in ("xy", "xz", "yz"):
        out = tmp_path / f"{proj}.svg"
        assert main(["render", traj, "--out", str(out), "--projection", proj]) == 0
        points[proj] = ET.parse(out).getroot().find(f".//{SVG_NS}polyline").get("points")
    capsys.readouterr()
    assert len(set(points.values())) == 3
    # x is shared by xy and xz; y by xy and yz
    first = {k: v.split()[0].split(",") for k, v in points.items()}
    assert first["xy"][0] == first["xz"][0] and first["xy"][1] != first["yz"][1]


def test_search_exhausted_exit_code(tmp_path, capsys):
    scene = write(tmp_path / "ann.json", {
        "format_version": "1.0", "dimension": 3, "semi_axes": [3.0, 2.0, 1.0],
        "boundaries": [{"lambda": 0.0, "side": "inside"}, {"lambda": 0.9, "side": "outside"}],
        "caustics": [1.1, 0.95],
    })
    code, _ = run(capsys, "search-periodic", "--scene", scene, "--period", "6", "--out", str(tmp_path / "r.json"))
    assert code == 4


def test_periods_table(tmp_path, capsys, ellipse_scene):
    out = tmp_path / "p.json"
    code, _ = run(capsys, "periods", "--scene", ellipse_scene, "--min", "3", "--max", "5", "--out", str(out))
    rows = json.loads(out.read_text())["rows"]
    assert code == 0 and [(r["period"], r["winding"]) for r in rows] == [(3, 1), (4, 1), (5, 1), (5, 2)]
    caustics = [r["caustic"] for r in rows if r["winding"] == 1]
    assert caustics == sorted(caustics, reverse=True)


def test_usage_error_is_input_error():
    assert main(["simulate"]) == 2


def test_module_entry_point(tmp_path, ellipse_scene):
    out = tmp_path / "t.json"
    proc = subprocess.run([sys.executable, "-m", "poncelet.cli", "simulate", "--scene", ellipse_scene,
                           "--bounces", "3", "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["exit_code"] == 0
