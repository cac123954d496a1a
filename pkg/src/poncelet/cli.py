"""Command-line interface: ``poncelet <command> [options]``.

Each command writes its artifact (trajectory, condition report, search
result, SVG or acceptance report) to ``--out`` and prints a RunReport to
stdout.  Exit codes: 0 satisfied / success, 1 not satisfied, 2 input error,
3 dynamics error, 4 search exhausted.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import jsonschema
import numpy as np

from . import __version__
from .confocal import ConfocalFamily, cartesian_from_elliptic, tangent_direction
from .dynamics import (
    Domain,
    first_signature_violation,
    geodesic_billiard_on_ellipsoid,
    play_ordered_game,
    simulate,
)
from .errors import InputError, InvalidSignature, PonceletError

FORMAT_VERSION = "1.0"
DEFAULT_PRECISION = 256
PRECISION_ENV = "PONCELET_PRECISION_BITS"

EXIT_OK, EXIT_NOT_SATISFIED, EXIT_INPUT, EXIT_DYNAMICS, EXIT_EXHAUSTED = 0, 1, 2, 3, 4


class SchemaViolation(InputError):
    pass


# --- serialization ------------------------------------------------------------


def dumps(doc) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def digest(doc) -> str:
    return hashlib.sha256(json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def load_schema(name: str) -> dict:
    text = resources.files("poncelet").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(doc, name: str) -> None:
    try:
        jsonschema.validate(doc, load_schema(name))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaViolation(f"{name} schema violation at {where}: {exc.message}") from None


def _floats(v) -> list:
    return [float(t) for t in v]


# --- scenes -------------------------------------------------------------------


@dataclass
class Scene:
    dimension: int
    semi_axes: tuple
    mode: str
    walls: list = field(default_factory=list)  # [(lambda, side)]
    betas: list = field(default_factory=list)
    signature: list = field(default_factory=list)
    curves: list = field(default_factory=list)
    start: object = "auto"
    caustics: Optional[list] = None
    precision_bits: Optional[int] = None
    tolerances: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def family(self) -> ConfocalFamily:
        return ConfocalFamily(self.semi_axes)

    def domain(self) -> Domain:
        fam = self.family
        inside = [lam for lam, side in self.walls if side == "inside"]
        outside = [lam for lam, side in self.walls if side == "outside"]
        if len(inside) != 1 or len(outside) > 1:
            raise InputError("billiard scenes need one 'inside' wall and at most one 'outside' wall")
        if outside:
            if not inside[0] < outside[0] < fam.a[-1]:
                raise InputError("need outer lambda < inner lambda < a_d")
            return Domain.shell(fam, inside[0], outside[0])
        if not inside[0] < fam.a[-1]:
            raise InputError("the boundary must be an ellipsoid (lambda < a_d)")
        return Domain.inside(fam, inside[0])

    def game(self) -> tuple:
        """(betas, signature) of the ordered game this scene plays."""
        if self.mode == "game":
            return list(self.betas), list(self.signature)
        dom = self.domain()
        lo, hi = dom.bounds[-1]
        if hi < self.family.a[-1]:
            return [lo, hi], [1, -1]
        return [lo], [1]


def parse_scene(doc: dict) -> Scene:
    validate(doc, "scene")
    d = doc["dimension"]
    a = tuple(float(x) for x in doc["semi_axes"])
    if len(a) != d:
        raise InputError(f"dimension {d} but {len(a)} semi-axis parameters")
    if not all(a[i] > a[i + 1] for i in range(d - 1)):
        raise InputError("semi-axis parameters must be strictly decreasing")
    mode = doc.get("mode") or ("game" if "game" in doc else "geodesic" if "curves" in doc else "billiard")
    sc = Scene(d, a, mode, raw=doc, start=doc.get("start", "auto"), caustics=doc.get("caustics"),
               precision_bits=doc.get("precision_bits"), tolerances=doc.get("tolerances", {}))
    if mode == "game":
        if "game" not in doc:
            raise InputError("game mode needs a 'game' block")
        sc.betas, sc.signature = list(doc["game"]["betas"]), list(doc["game"]["signature"])
        if len(sc.betas) != len(sc.signature):
            raise InvalidSignature("betas and signature differ in length")
        bad = first_signature_violation(sc.betas, sc.signature)
        if bad is not None:
            raise InvalidSignature(f"invalid signature at index {bad}: a -1 entry needs +1 neighbours with smaller beta",
                                   index=bad)
        if any(b >= a[-1] for b in sc.betas):
            raise InputError("game quadrics must be ellipsoids (beta < a_d)")
    elif mode == "geodesic":
        if d != 3 or "curves" not in doc:
            raise InputError("geodesic scenes are three-dimensional and list one boundary curve")
        sc.curves = [float(c) for c in doc["curves"]]
        if not a[2] < sc.curves[0] < a[1]:
            raise InputError("boundary curve needs a_3 < gamma < a_2")
    else:
        if "boundaries" not in doc:
            raise InputError("billiard scenes need 'boundaries'")
        sc.walls = [(float(b["lambda"]), b["side"]) for b in doc["boundaries"]]
        sc.domain()
    if sc.start != "auto":
        if len(sc.start["point"]) != d or len(sc.start["direction"]) != d:
            raise InputError("start point and direction need one entry per dimension")
    elif sc.caustics is None:
        raise InputError("start 'auto' needs caustics")
    return sc


def read_scene(path: str) -> Scene:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read scene {path}: {exc}") from None
    return parse_scene(doc)


def resolve_precision(flag: Optional[int], scene: Optional[Scene] = None) -> int:
    if flag is not None:
        return int(flag)
    if scene is not None and scene.precision_bits is not None:
        return int(scene.precision_bits)
    env = os.environ.get(PRECISION_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"{PRECISION_ENV} must be an integer, got {env!r}") from None
    return DEFAULT_PRECISION


def start_state(scene: Scene):
    """Cartesian start point and unit direction of a scene."""
    fam = scene.family
    if scene.start != "auto":
        x = np.asarray(scene.start["point"], dtype=float)
        v = np.asarray(scene.start["direction"], dtype=float)
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(v)) or np.linalg.norm(v) == 0:
            raise InputError("start point and direction must be finite, direction nonzero")
        return x, v / np.linalg.norm(v)
    if scene.mode == "geodesic":
        from .search import geodesic_start

        return geodesic_start(fam, scene.curves[0], float(scene.caustics[0]))
    from .search import admissible_start

    betas, sig = scene.game()
    if len(scene.caustics) != fam.d - 1:
        raise InputError(f"need {fam.d - 1} caustics")
    st = admissible_start(fam, betas, sig, scene.caustics)
    x = cartesian_from_elliptic(fam, st.coords, st.point_signs)
    return x, tangent_direction(fam, x, scene.caustics, st.direction_signs)


def run_scene(scene: Scene, bounces: int):
    x, v = start_state(scene)
    fam = scene.family
    if scene.mode == "geodesic":
        return geodesic_billiard_on_ellipsoid(fam, scene.curves, x, v, bounces)
    if scene.mode == "game":
        k = len(scene.betas)
        tr = play_ordered_game(fam, scene.betas, scene.signature, x, v, max(1, -(-bounces // k)))
        tr.vertices, tr.directions, tr.bounces = tr.vertices[: bounces + 1], tr.directions[: bounces + 1], tr.bounces[:bounces]
        return tr
    return simulate(scene.domain(), x, v, bounces)


def trajectory_doc(scene: Scene, traj) -> dict:
    from .dynamics import detect_period

    walls = [lam for lam, _ in scene.walls] or list(scene.betas) or list(scene.curves)
    caustics = scene.caustics if scene.caustics is not None else (
        traj.segment_caustics()[0].tolist() if len(traj.vertices) > 1 else [])
    if scene.mode == "geodesic":
        caustics = [float(c) for c in (scene.caustics or [])]
    return {
        "format_version": FORMAT_VERSION,
        "kind": "trajectory",
        "mode": scene.mode,
        "dimension": scene.dimension,
        "semi_axes": list(scene.semi_axes),
        "walls": _floats(walls),
        "caustics": _floats(caustics),
        "vertices": [_floats(p) for p in traj.vertices],
        "directions": [_floats(p) for p in traj.directions],
        "bounces": [{"lambda": float(b.lam), "classification": b.classification} for b in traj.bounces],
        "period": detect_period(traj) if scene.mode != "geodesic" and len(traj.vertices) > 2 else None,
        "scene_digest": digest(scene.raw),
    }


# --- check ----------------------------------------------------------------------

CHECK_KINDS = ("lebesgue", "corollary1", "example1", "prop1", "prop2", "theorem1", "theorem2", "theorem3", "theorem4")


def _need(params: dict, *keys):
    missing = [k for k in keys if k not in params]
    if missing:
        raise InputError(f"missing parameters: {', '.join(missing)}")
    return [params[k] for k in keys]


def _family(params: dict) -> ConfocalFamily:
    (a,) = _need(params, "semi_axes")
    return ConfocalFamily(a)


def run_check(kind: str, params: dict, prec: int, max_coeff: Optional[int] = None) -> dict:
    """Dispatch to the condition or Abel-Jacobi check; returns the report document."""
    from . import abeljacobi as aj
    from . import conditions as cd

    if kind == "lebesgue":
        fam = _family(params)
        alpha, betas = _need(params, "alpha", "betas")
        if params.get("adapter", "mobius") == "mobius":
            rep = cd.lebesgue_condition(cd.mobius_discriminant(fam, alpha), cd.mobius_parameters(alpha, betas), prec)
        else:
            rep = cd.lebesgue_condition(cd.confocal_discriminant(fam, alpha), betas, prec)
    elif kind == "corollary1":
        fam = _family(params)
        alpha, gamma, m = _need(params, "alpha", "gamma", "m")
        rep = cd.corollary1_condition(cd.confocal_discriminant(fam, alpha), gamma, int(m), prec,
                                      int(params.get("branch_at_gamma", 1)))
    elif kind == "example1":
        fam = _family(params)
        alpha, gamma = _need(params, "alpha", "gamma")
        rep = cd.example1_condition(cd.confocal_discriminant(fam, alpha), gamma, prec,
                                    int(params.get("branch_at_gamma", 1)), params.get("variant", "printed"))
    elif kind == "prop1":
        fam = _family(params)
        b1, b2, caustics, m = _need(params, "beta1", "beta2", "caustics", "m")
        rep = cd.prop1_condition(fam, b1, b2, caustics, int(m), prec, params.get("denominator", "literal"))
    elif kind == "prop2":
        a, gamma, alpha, k = _need(params, "semi_axes", "gamma", "alpha", "k")
        rep = cd.prop2_condition(a, gamma, alpha, int(k), prec, int(params.get("weight", 0)))
    else:
        fam = _family(params)
        (caustics,) = _need(params, "caustics")
        if kind in ("theorem1", "theorem3"):
            ranges, counts = _need(params, "ranges", "counts")
            curve = (aj.gamma_curve if kind == "theorem1" else aj.gamma1_curve)(fam, caustics)
            fn = aj.theorem1_check if kind == "theorem1" else aj.theorem3_check
            check = fn(curve, [tuple(r) for r in ranges], counts, max_coeff)
        else:
            betas, sig = _need(params, "betas", "signature")
            curve = (aj.gamma_curve if kind == "theorem2" else aj.gamma1_curve)(fam, caustics)
            fn = aj.theorem2_check if kind == "theorem2" else aj.theorem4_check
            check = fn(curve, fam, betas, sig, caustics, max_coeff)
        doc = check.to_dict()
        doc.update({"format_version": FORMAT_VERSION, "kind": "condition_report", "inputs": params})
        return doc
    doc = rep.to_dict()
    doc.update({"format_version": FORMAT_VERSION, "kind": "condition_report"})
    return doc


def check_exit_code(doc: dict) -> int:
    return EXIT_NOT_SATISFIED if doc["decision"] == "not-satisfied" else EXIT_OK


# --- search-periodic and periods ---------------------------------------------------


def parse_targets(period: Optional[int], period_range: Optional[str]) -> list:
    if period is not None:
        return [int(period)]
    if period_range:
        try:
            lo, hi = (int(t) for t in period_range.split(":"))
        except ValueError:
            raise InputError("--period-range expects LO:HI") from None
        if lo > hi:
            raise InputError("--period-range needs LO <= HI")
        return list(range(lo, hi + 1))
    raise InputError("give --period or --period-range")


def search_one(scene: Scene, n: int):
    """Closed trajectory with n bounces (d = 2) or n bounces / 2n-bounce annulus rounds (d = 3)."""
    from . import search as sr

    fam = scene.family
    betas, sig = scene.game()
    if fam.d == 2:
        if sig == [1]:
            return sr.search_period_d2(fam, n, betas[0])
        k = len(betas)
        if n % k:
            raise InputError(f"period {n} is not a multiple of the round length {k}")
        return sr.search_planar_game(fam, betas, sig, n // k)
    if fam.d != 3:
        raise InputError("periodic search covers d = 2 and d = 3")
    a = fam.a
    if sig == [1]:
        b = betas[0]
        for box in (((a[2], a[1]), (b, a[2])), ((a[1], a[0]), (b, a[2])), ((a[1], a[0]), (a[2], a[1]))):
            res = sr.search_spatial_game(fam, betas, sig, n, box, grid=16, seeds=4)
            if res.found:
                return res
        return res
    if sig == [1, -1]:
        if n % 2:
            raise InputError("annulus closures have an even number of bounces")
        return sr.search_annulus_d3(fam, betas, [n // 2])
    raise InputError("d = 3 search covers the inside billiard and the two-ellipsoid annulus")


def search_doc(scene: Scene, targets: list) -> tuple:
    from .search import _game_run

    rows, any_found = [], False
    for n in targets:
        res = search_one(scene, n)
        row = res.to_dict()
        row["target"] = n
        row["vertices"] = []
        if res.found:
            any_found = True
            x, v = np.asarray(res.start), np.asarray(res.direction)
            fam = scene.family
            betas, sig = scene.game()
            if res.game_start is not None:
                tr = _game_run(fam, betas, sig, res.game_start, res.caustics, max(1, (res.period or n) // len(betas)))
            else:
                rounds = max(1, (res.period or n) // len(betas))
                tr = play_ordered_game(fam, betas, sig, x, v, rounds)
            row["vertices"] = [_floats(p) for p in tr.vertices]
        rows.append(row)
    doc = {"format_version": FORMAT_VERSION, "kind": "search_result", "results": rows}
    return doc, any_found


def periods_doc(scene: Scene, lo: int, hi: int) -> dict:
    from .search import search_period_d2

    fam = scene.family
    betas, sig = scene.game()
    if fam.d != 2 or sig != [1]:
        raise InputError("the period table covers the billiard inside one ellipse")
    rows = []
    for n in range(max(2, lo), hi + 1):
        for w in range(1, (n + 1) // 2):
            if math.gcd(n, w) != 1:
                continue
            res = search_period_d2(fam, n, betas[0], winding=w)
            c = float(res.caustics[0]) if res.found else None
            rows.append({"period": n, "winding": w, "caustic": c, "rotation_number": w / n if c is not None else None,
                         "closure_error": float(res.closure_error) if res.found else None})
    return {"format_version": FORMAT_VERSION, "kind": "period_table", "rows": rows}


# --- render ---------------------------------------------------------------------

PROJECTIONS = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}
SVG_SIZE = 480
SVG_MARGIN = 20


def _conic_path(a_i: float, a_j: float, lam: float, to_px, samples: int = 200) -> list:
    """Point lists of the section x_i^2/(a_i - lam) + x_j^2/(a_j - lam) = 1."""
    u, w = a_i - lam, a_j - lam
    if u > 0 and w > 0:
        t = np.linspace(0, 2 * math.pi, samples)
        return [[to_px(math.sqrt(u) * math.cos(s), math.sqrt(w) * math.sin(s)) for s in t]]
    if u > 0 > w:
        r = math.sqrt(-w) * 2.0
        t = np.linspace(-math.asinh(r), math.asinh(r), samples // 2)
        return [[to_px(sg * math.sqrt(u) * math.cosh(s), math.sqrt(-w) * math.sinh(s)) for s in t] for sg in (1, -1)]
    return []


def render_svg(doc: dict, projection: str = "xy") -> str:
    """Standalone SVG 1.1 of walls (solid), caustics (dashed) and the trajectory polyline."""
    validate(doc, "trajectory")
    if projection not in PROJECTIONS:
        raise InputError(f"projection must be one of {sorted(PROJECTIONS)}")
    a = [float(t) for t in doc["semi_axes"]]
    d = len(a)
    i, j = PROJECTIONS[projection] if d == 3 else (0, 1)
    ext = max(math.sqrt(a[i] - min(doc["walls"] + [0.0])), math.sqrt(a[j] - min(doc["walls"] + [0.0])))
    scale = (SVG_SIZE / 2 - SVG_MARGIN) / ext

    def to_px(x, y):
        return (round(SVG_SIZE / 2 + scale * x, 3), round(SVG_SIZE / 2 - scale * y, 3))

    def pts(seq):
        return " ".join(f"{p[0]:g},{p[1]:g}" for p in seq)

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_SIZE}" height="{SVG_SIZE}" '
        f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
        '<g id="walls" fill="none" stroke="black" stroke-width="1.5">',
    ]
    for lam in doc["walls"]:
        for seq in _conic_path(a[i], a[j], lam, to_px):
            out.append(f'<path class="wall" d="M {pts(seq)}"/>')
    out.append("</g>")
    out.append('<g id="caustics" fill="none" stroke="gray" stroke-dasharray="4 3">')
    for lam in doc["caustics"]:
        for seq in _conic_path(a[i], a[j], lam, to_px):
            out.append(f'<path class="caustic" d="M {pts(seq)}"/>')
    out.append("</g>")
    V = doc["vertices"]
    if V:
        closed = len(V) > 2 and math.dist(V[0], V[-1]) < 1e-6
        seq = [to_px(v[i], v[j]) for v in V]
        if closed:
            seq[-1] = seq[0]
        cls = "trajectory closed" if closed else "trajectory"
        out.append(f'<polyline class="{cls}" fill="none" stroke="crimson" stroke-width="1" points="{pts(seq)}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# --- driver ---------------------------------------------------------------------


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        return
    with open(path, "w") as fh:
        fh.write(text)


def _versions() -> dict:
    import mpmath
    import scipy

    return {"poncelet": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "mpmath": mpmath.__version__}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="poncelet", description="Billiards in confocal quadrics.")
    p.add_argument("--timing", action="store_true", help="add wall-clock timing to the run report")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate a scene and write the trajectory JSON")
    s.add_argument("--scene", required=True)
    s.add_argument("--bounces", type=int, default=10)
    s.add_argument("--out", required=True)

    c = sub.add_parser("check", help="evaluate a closure condition")
    c.add_argument("kind", choices=CHECK_KINDS)
    c.add_argument("--params", required=True, help="JSON object or @file with kind-specific parameters")
    c.add_argument("--precision-bits", type=int)
    c.add_argument("--max-coeff", type=int)
    c.add_argument("--out")

    q = sub.add_parser("search-periodic", help="search caustics of closed trajectories")
    q.add_argument("--scene", required=True)
    q.add_argument("--period", type=int)
    q.add_argument("--period-range")
    q.add_argument("--out")

    r = sub.add_parser("render", help="render a trajectory JSON to SVG")
    r.add_argument("trajectory")
    r.add_argument("--out", required=True)
    r.add_argument("--projection", default="xy", choices=sorted(PROJECTIONS))

    t = sub.add_parser("periods", help="table of periodic caustics inside an ellipse")
    t.add_argument("--scene", required=True)
    t.add_argument("--min", type=int, default=3)
    t.add_argument("--max", type=int, default=8)
    t.add_argument("--out")

    x = sub.add_parser("xvalidate", help="run the acceptance suite")
    x.add_argument("--out", default="xvalidate.json")
    x.add_argument("--table", help="also write the summary table here")
    x.add_argument("--only", help="comma-separated criterion numbers (1-10)")
    x.add_argument("--no-determinism", action="store_true", help="skip the second run of criterion 11")
    return p


def _read_params(arg: str) -> dict:
    try:
        if arg.startswith("@"):
            with open(arg[1:]) as fh:
                doc = json.load(fh)
        else:
            doc = json.loads(arg)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read --params: {exc}") from None
    if not isinstance(doc, dict):
        raise InputError("--params must be a JSON object")
    return doc


def dispatch(args) -> tuple:
    """(exit code, outputs dict, inputs for the digest)."""
    if args.command == "simulate":
        scene = read_scene(args.scene)
        if args.bounces < 0:
            raise InputError("--bounces must be nonnegative")
        doc = trajectory_doc(scene, run_scene(scene, args.bounces))
        validate(doc, "trajectory")
        _write(args.out, dumps(doc))
        return EXIT_OK, {"trajectory": args.out, "vertices": len(doc["vertices"])}, scene.raw
    if args.command == "check":
        params = _read_params(args.params)
        prec = resolve_precision(args.precision_bits)
        doc = run_check(args.kind, params, prec, args.max_coeff)
        validate(doc, "condition_report")
        _write(args.out, dumps(doc))
        return check_exit_code(doc), {"report": args.out, "decision": doc["decision"]}, {"kind": args.kind, **params}
    if args.command == "search-periodic":
        scene = read_scene(args.scene)
        doc, found = search_doc(scene, parse_targets(args.period, args.period_range))
        validate(doc, "search_result")
        _write(args.out, dumps(doc))
        outs = {"result": args.out, "found": [r["target"] for r in doc["results"] if r["found"]]}
        return (EXIT_OK if found else EXIT_EXHAUSTED), outs, scene.raw
    if args.command == "render":
        try:
            with open(args.trajectory) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read trajectory {args.trajectory}: {exc}") from None
        _write(args.out, render_svg(doc, args.projection))
        return EXIT_OK, {"svg": args.out}, {"trajectory": digest(doc), "projection": args.projection}
    if args.command == "periods":
        scene = read_scene(args.scene)
        doc = periods_doc(scene, args.min, args.max)
        validate(doc, "periods")
        _write(args.out, dumps(doc))
        return EXIT_OK, {"table": args.out, "rows": len(doc["rows"])}, scene.raw
    if args.command == "xvalidate":
        from .crossval import report_json, run_suite, summary_table

        only = None
        if args.only:
            try:
                only = [int(t) for t in args.only.split(",")]
            except ValueError:
                raise InputError("--only expects comma-separated integers") from None
            if any(not 1 <= k <= 10 for k in only):
                raise InputError("--only selects among criteria 1-10")
        results = run_suite(only, determinism=not args.no_determinism)
        text = report_json(results)
        validate(json.loads(text), "xvalidate")
        _write(args.out, text)
        table = summary_table(results)
        _write(args.table, table)
        sys.stderr.write(table)
        ok = all(r.passed or r.expected_failure for r in results)
        return (EXIT_OK if ok else EXIT_NOT_SATISFIED), {"report": args.out, "table": args.table}, {"only": only}
    raise InputError(f"unknown command {args.command}")


def main(argv: Optional[list] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    t0 = time.perf_counter()
    error = None
    inputs: dict = {}
    outputs: dict = {}
    try:
        code, outputs, inputs = dispatch(args)
    except PonceletError as exc:
        code = exc.code
        error = {"name": type(exc).__name__, "message": str(exc)}
    except (ValueError, ArithmeticError) as exc:
        code = EXIT_INPUT
        error = {"name": type(exc).__name__, "message": str(exc)}
    report = {
        "format_version": FORMAT_VERSION,
        "kind": "run_report",
        "command": argv,
        "inputs_digest": digest(inputs),
        "exit_code": code,
        "outputs": outputs,
        "versions": _versions(),
        "seed": 0,
    }
    if error is not None:
        report["error"] = error
        sys.stderr.write(f"poncelet: {error['name']}: {error['message']}\n")
    if args.timing:
        report["timing"] = {"wall_seconds": round(time.perf_counter() - t0, 6)}
    sys.stdout.write(dumps(report))
    return code


if __name__ == "__main__":
    raise SystemExit(main())
