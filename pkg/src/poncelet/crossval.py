"""Executable acceptance suite: each criterion is a deterministic experiment.

Every ``criterion_*`` function returns a :class:`CriterionResult` whose
``details`` hold only values that are reproducible bit for bit (no timings),
so that :func:`report_json` is byte-stable across runs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import mpmath
import numpy as np
from mpmath import mp
from scipy.optimize import brentq

from . import __version__
from .abeljacobi import gamma1_curve, gamma_curve, theorem1_check, theorem3_check
from .conditions import (
    confocal_discriminant,
    corollary1_condition,
    corollary1_determinant,
    example1_determinant,
    prop1_condition,
    prop2_condition,
    rank_decision,
)
from .confocal import (
    ConfocalFamily,
    admissibility_polynomial,
    elliptic_coordinates,
    tangent_direction,
)
from .dynamics import Domain, lambda_ranges, simulate, winding_counts
from .errors import PonceletError
from .search import (
    classify_geodesic,
    refine_game,
    search_annulus_d3,
    search_geodesic_closure,
    search_period_d2,
    search_planar_game,
    search_spatial_game,
)
from .series import recenter, sqrt_of_poly

REPORT_FORMAT_VERSION = "1.0"


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    expected_failure: bool = False
    artifacts: dict = field(default_factory=dict, repr=False)  # high-precision values, not serialized

    def line(self) -> str:
        tag = "PASS" if self.passed else ("XFAIL" if self.expected_failure else "FAIL")
        return f"[{tag}] criterion {self.number}: {self.title}"

    def to_dict(self) -> dict:
        return {
            "number": self.number,
            "title": self.title,
            "passed": self.passed,
            "expected_failure": self.expected_failure,
            "details": _jsonable(self.details),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, mpmath.mpf):
        return mpmath.nstr(obj, 20)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


# --- criteria 1 and 2: Chasles invariance and Lemma 1 ------------------------

C1_FAMILY = (9.0, 4.0, 1.0)


def _random_inside_runs(seed: int = 0, runs: int = 10, bounces: int = 200):
    fam = ConfocalFamily(C1_FAMILY)
    dom = Domain.inside(fam)
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < runs:
        x = rng.uniform(-1.0, 1.0, 3) * np.sqrt(fam.arr)
        if fam.quadric(0.0, x) >= -0.05:
            continue
        v = rng.normal(size=3)
        out.append(simulate(dom, x, v / np.linalg.norm(v), bounces))
    return fam, out


def criterion_1(seed: int = 0) -> CriterionResult:
    """Caustic parameters are constant along every segment."""
    _, trajs = _random_inside_runs(seed)
    worst = 0.0
    for tr in trajs:
        sc = tr.segment_caustics()
        worst = max(worst, float(np.max(np.abs(sc - sc[0]) / np.abs(sc[0]))))
    return CriterionResult(1, "Chasles invariance along 10 x 200 bounces", worst < 1e-8,
                           {"family": C1_FAMILY, "max_relative_deviation": worst, "tolerance": 1e-8})


def criterion_2(seed: int = 0, samples: int = 100) -> CriterionResult:
    """P(lambda_s) >= 0 at vertices and interior samples of every trajectory."""
    fam, trajs = _random_inside_runs(seed)
    rng = np.random.default_rng(seed + 1)
    worst = math.inf
    for tr in trajs:
        poly = admissibility_polynomial(fam, tr.segment_caustics()[0])
        V = np.asarray(tr.vertices)
        pts = list(V)
        seg = rng.integers(0, len(V) - 1, samples)
        t = rng.uniform(0.0, 1.0, samples)
        pts += [V[i] + s * (V[i + 1] - V[i]) for i, s in zip(seg, t)]
        for x in pts:
            worst = min(worst, min(poly(float(lam)) for lam in elliptic_coordinates(fam, x)))
    return CriterionResult(2, "Lemma 1 inequalities along criterion-1 trajectories", worst >= -1e-9,
                           {"min_P_lambda": worst, "slack": 1e-9})


# --- criteria 3 and 4: porism and Theorem 1 ---------------------------------

C3_FAMILY = (4.0, 1.0)
C3_PERIODS = (3, 4, 5, 6)


def _start_on_boundary(fam: ConfocalFamily, alpha: float, angle: float, sign: int):
    a = fam.arr
    x = np.array([math.sqrt(a[0]) * math.cos(angle), math.sqrt(a[1]) * math.sin(angle)])
    for sg in ([sign, 1], [sign, -1], [-sign, 1], [-sign, -1]):
        v = tangent_direction(fam, x, [alpha], sg)
        if fam.quadric(0.0, x + 1e-6 * v) < 0:
            return x, v
    raise PonceletError("no inward tangent from the boundary point")


def porism_caustics() -> dict:
    fam = ConfocalFamily(C3_FAMILY)
    return {n: search_period_d2(fam, n) for n in C3_PERIODS}


def criterion_3(seed: int = 0, found: dict | None = None) -> CriterionResult:
    """Every start on the found caustic closes after exactly n bounces."""
    fam = ConfocalFamily(C3_FAMILY)
    dom = Domain.inside(fam)
    found = porism_caustics() if found is None else found
    rng = np.random.default_rng(seed)
    rows, ok = {}, True
    for n, res in found.items():
        errs, exact = [], True
        for _ in range(20):
            x, v = _start_on_boundary(fam, res.caustics[0], rng.uniform(0, 2 * math.pi), int(rng.choice([-1, 1])))
            tr = simulate(dom, x, v, n)
            V = np.asarray(tr.vertices)
            errs.append(float(np.linalg.norm(V[n] - V[0])))
            exact &= bool(min(np.linalg.norm(V[k] - V[0]) for k in range(1, n)) > 1e-3)
        good = res.found and max(errs) < 1e-6 and exact
        ok &= good
        rows[n] = {"caustic": res.caustics[0], "max_vertex_error": max(errs), "minimal_period": exact}
    return CriterionResult(3, "Poncelet porism for periods 3..6 in the ellipse (4, 1)", ok, {"periods": rows})


def _theorem1_protocol(fam, dom, caustics, x, v, n, perturb_index=0, eps=0.05) -> dict:
    tr = simulate(dom, x, v, n)
    rng = lambda_ranges(dom, admissibility_polynomial(fam, caustics), elliptic_coordinates(fam, x))
    counts = winding_counts(tr, rng, n)
    at = theorem1_check(gamma_curve(fam, caustics), rng, counts)
    out = {"counts": counts.tolist(), "residual": at.residual, "threshold": at.threshold,
           "accepted": at.accepted, "perturbed": []}
    ok = at.accepted and at.residual < 1e-6
    for e in (eps, -eps):
        c2 = list(caustics)
        c2[perturb_index] += e
        r2 = lambda_ranges(dom, admissibility_polynomial(fam, c2), elliptic_coordinates(fam, x))
        rep = theorem1_check(gamma_curve(fam, c2), r2, counts)
        good = (not rep.accepted) and rep.residual >= 10 * rep.threshold
        ok &= good
        out["perturbed"].append({"shift": e, "residual": rep.residual, "rejected": good})
    out["passed"] = ok
    return out


def criterion_4(found: dict | None = None) -> CriterionResult:
    fam = ConfocalFamily(C3_FAMILY)
    dom = Domain.inside(fam)
    found = porism_caustics() if found is None else found
    rows, ok = {}, True
    for n, res in found.items():
        row = _theorem1_protocol(fam, dom, res.caustics, np.array(res.start), np.array(res.direction), n)
        rows[f"d2_n{n}"] = row
        ok &= row["passed"]
    fam3 = ConfocalFamily(C1_FAMILY)
    res3 = search_spatial_game(fam3, [0.0], [1], 6, ((1.0, 4.0), (0.0, 1.0)), grid=16, seeds=4)
    if res3.found:
        row = _theorem1_protocol(fam3, Domain.inside(fam3), res3.caustics, np.array(res3.start), np.array(res3.direction), 6)
        row["caustics"] = res3.caustics
    else:
        row = {"passed": False, "note": "no d=3 closure found"}
    rows["d3_n6"] = row
    ok &= row["passed"]
    return CriterionResult(4, "Theorem 1 accepts closures and rejects caustic +-0.05", ok, rows)


# --- criterion 5: Corollary 1 -----------------------------------------------

C5_FAMILY = (1.1, 1.0)
C5_BETAS = (-20.0, 0.0)


def criterion_5(prec: int = 256) -> CriterionResult:
    fam = ConfocalFamily(C5_FAMILY)
    betas = list(C5_BETAS)
    res = search_planar_game(fam, betas, [1, -1], 3, 1)
    if not res.found:
        return CriterionResult(5, "Corollary 1 at an alternating 6-closure", False, {"note": "search failed"})
    z, norm = refine_game(fam, betas, [1, -1], 3, res.caustics)
    rows = []
    ok = True
    for e in (0.0, 0.05, -0.05):
        with mpmath.workprec(1024):
            alpha = z[0] + e
        rep = corollary1_condition(confocal_discriminant(fam, alpha), betas[0], 3, prec, branch_at_gamma=-1)
        good = rep.residual < 1e-20 if e == 0 else rep.residual >= 1e-6
        ok &= good
        rows.append({"shift": e, "residual": float(rep.residual), "decision": rep.decision, "ok": good})
    return CriterionResult(5, "Corollary 1 at an alternating 6-closure (m = 3)", ok,
                           {"caustic": float(z[0]), "refinement_residual": float(norm), "rows": rows, "precision_bits": prec},
                           artifacts={"caustics": z})


# --- criterion 6: Example 1 against the generic m = 4 determinant -----------

C6_SWEEP = (0.001, 0.999, 200)


def _sign_changes(f: Callable, grid) -> list:
    vals = [f(t) for t in grid]
    return [brentq(f, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15)
            for i in range(len(grid) - 1) if vals[i] * vals[i + 1] < 0]


def _match(xs, ys, tol) -> bool:
    return len(xs) == len(ys) and all(abs(u - w) < tol for u, w in zip(xs, ys))


def example1_sweep(variant: str, prec: int = 64) -> dict:
    fam = ConfocalFamily(C5_FAMILY)
    gamma = C5_BETAS[0]
    grid = np.linspace(*C6_SWEEP)
    out = {}
    for branch in (1, -1):
        fx = lambda t: float(example1_determinant(confocal_discriminant(fam, t), gamma, prec, branch, variant))
        fc = lambda t: float(corollary1_determinant(confocal_discriminant(fam, t), gamma, 4, prec, branch))
        xs, cs = _sign_changes(fx, grid), _sign_changes(fc, grid)
        out[branch] = {"example1": xs, "corollary1": cs, "agree": _match(xs, cs, 1e-8)}
    return out


def criterion_6() -> CriterionResult:
    """Printed entries fail; the reduction of the 8 x 8 determinant is reported alongside."""
    printed = example1_sweep("printed")
    derived = example1_sweep("derived")
    ok = all(r["agree"] for r in printed.values())
    return CriterionResult(
        6, "Example 1 sign changes match the m = 4 determinant", ok,
        {"printed": printed, "derived": derived,
         "derived_agrees": all(r["agree"] for r in derived.values()),
         "note": "three printed entries differ from the reduction of the 8 x 8 determinant"},
        expected_failure=not ok,
    )


# --- criterion 7: Proposition 1 at a d = 3 annulus closure ------------------

C7_FAMILY = (3.0, 2.0, 1.0)
C7_BETAS = (0.0, 0.9)


def criterion_7(prec: int = 256) -> CriterionResult:
    fam = ConfocalFamily(C7_FAMILY)
    betas = list(C7_BETAS)
    res = search_annulus_d3(fam, betas, range(3, 9))
    if not res.found:
        return CriterionResult(7, "Proposition 1 at a d = 3 alternating closure", False, {"note": "no closure found"})
    m = res.period // 2
    z, norm = refine_game(fam, betas, [1, -1], m, res.caustics, start=res.game_start)
    at = prop1_condition(fam, betas[0], betas[1], z, m, prec)
    rows = []
    ok = at.decision == "satisfied" and at.certified and m >= fam.d
    for idx, e in ((0, 0.05), (0, -0.05), (1, -0.05)):
        with mpmath.workprec(1024):
            c2 = list(z)
            c2[idx] = c2[idx] + e
        rep = prop1_condition(fam, betas[0], betas[1], c2, m, prec)
        good = rep.decision == "not-satisfied"
        ok &= good
        rows.append({"caustic": idx + 1, "shift": e, "decision": rep.decision, "residual": rep.residual})
    return CriterionResult(7, "Proposition 1 at a d = 3 alternating closure", ok, {
        "caustics": [float(c) for c in z], "m": m, "simulated_gap": res.closure_error,
        "refinement_residual": float(norm), "decision": at.decision, "certified": at.certified,
        "rank": at.rank, "residual": at.residual, "perturbed": rows, "notes": res.notes,
    }, artifacts={"caustics": z, "m": m})


# --- criterion 8: Proposition 2 against Theorem 3 on a (gamma, alpha) grid --

C8_FAMILY = (4.0, 2.0, 1.0)
C8_PERIODS = (5, 6, 7, 8)


def _geodesic_verdicts(fam, gamma, alpha, verdict, prec):
    """(prop2 satisfied, theorem3 accepted) over the candidate periods."""
    a = fam.a
    ks = [verdict.period] if verdict.status == "closed" else list(C8_PERIODS)
    p2 = any(prop2_condition(a, gamma, alpha, k, prec).decision == "satisfied" for k in ks)
    cur = gamma1_curve(fam, [alpha])
    ranges = [(a[1], a[0]), (gamma, alpha)]
    t3 = any(theorem3_check(cur, ranges, verdict.counts(k)).accepted for k in ks)
    return p2, t3


def geodesic_grid(n: int = 30):
    fam = ConfocalFamily(C8_FAMILY)
    a = fam.a
    for i in range(n):
        g = a[2] + (a[1] - a[2]) * (i + 0.5) / n
        for j in range(n):
            yield g, g + (a[1] - g) * (j + 0.5) / n


def criterion_8(n: int = 30, prec: int = 128) -> CriterionResult:
    fam = ConfocalFamily(C8_FAMILY)
    tally = {"closed": 0, "open": 0, "abstain": 0}
    disagreements, positives = [], []
    for g, al in geodesic_grid(n):
        ver = classify_geodesic(fam, g, al, C8_PERIODS)
        tally[ver.status] += 1
        if ver.status == "abstain":
            continue
        p2, t3 = _geodesic_verdicts(fam, g, al, ver, prec)
        if p2 or t3:
            positives.append([g, al, p2, t3])
        if p2 != t3:
            disagreements.append([g, al, ver.status, p2, t3])
    # an exact closure off the grid, for the record
    gam = 1.3
    found = search_geodesic_closure(fam, gam, 6, -1, (1.35, 1.55))
    off = {"found": found.found}
    if found.found:
        al = found.caustics[0]
        ver = classify_geodesic(fam, gam, al, C8_PERIODS)
        p2, t3 = _geodesic_verdicts(fam, gam, al, ver, prec)
        off.update({"gamma": gam, "alpha": al, "period": ver.period, "prop2_satisfied": p2, "theorem3_accepted": t3})
    return CriterionResult(8, "Proposition 2 and Theorem 3 agree on the (gamma, alpha) grid", not disagreements, {
        "grid": n, "counts": tally, "disagreements": disagreements, "positives": positives,
        "precision_bits": prec, "off_grid_closure": off,
    })


# --- criterion 9: series kernel ---------------------------------------------


def criterion_9(seed: int = 0, count: int = 50, prec: int = 256, order: int = 24) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = mp.mpf(0)
    for _ in range(count):
        deg = int(rng.integers(1, 7))
        center = float(rng.uniform(-1, 1))
        roots = center + rng.choice([-1.0, 1.0], deg) * rng.uniform(2, 4, deg)
        P = np.poly(roots)[::-1]
        # P(center) in [0.5, 2] keeps the coefficients O(1)
        P = (P * rng.uniform(0.5, 2.0) / np.polyval(P[::-1], center)).tolist()
        s = sqrt_of_poly(P, center, 1, order, prec)
        sq, r = s * s, recenter(P, center, order, prec)
        with mpmath.workprec(prec):
            worst = max(worst, max(abs(u - w) for u, w in zip(sq.coeffs, r.coeffs)))
    bound = mp.mpf(2) ** -246
    return CriterionResult(9, "square-root series squares back to the recentred polynomial", worst < bound,
                           {"max_error_log2": float(mpmath.log(worst, 2)) if worst > 0 else "-inf", "bound_log2": -246})


# --- criterion 10: rank certification ---------------------------------------


def hilbert_rows(n: int):
    def build(p):
        with mpmath.workprec(p):
            return [[mp.mpf(1) / (i + j + 1) for j in range(n)] for i in range(n)]

    return build


def criterion_10(certified_reports: list | None = None) -> CriterionResult:
    build = hilbert_rows(8)
    low, high = rank_decision(build, 64), rank_decision(build, 256)
    flip = (not low.certified) and high.certified
    rows, ok = [], flip
    for name, fn, prec in certified_reports or []:
        r1, r2 = fn(prec), fn(2 * prec)
        same = r1.decision == r2.decision
        if r1.certified:
            ok &= same
        rows.append({"name": name, "precision_bits": prec, "decision": r1.decision,
                     "doubled": r2.decision, "certified": r1.certified})
    return CriterionResult(10, "certified decisions survive precision doubling", ok, {
        "hilbert8": {"p64": {"rank": low.rank, "certified": low.certified},
                     "p256": {"rank": high.rank, "certified": high.certified}},
        "reports": rows,
    })


def certification_probes(c5: CriterionResult | None = None, c7: CriterionResult | None = None) -> list:
    """(name, prec -> report, prec) triples whose certified decisions are re-checked at 2p."""
    f5, f7 = ConfocalFamily(C5_FAMILY), ConfocalFamily(C7_FAMILY)
    probes = [
        ("corollary1_generic", lambda p: corollary1_condition(confocal_discriminant(f5, 0.3), C5_BETAS[0], 3, p, -1), 128),
        ("prop1_generic", lambda p: prop1_condition(f7, 0.0, 0.9, [1.2, 0.95], 4, p), 128),
        ("prop2_generic", lambda p: prop2_condition(C8_FAMILY, 1.3, 1.5, 6, p), 128),
    ]
    if c5 is not None and "caustics" in c5.artifacts:
        z5 = c5.artifacts["caustics"]
        probes.append(("corollary1_closure",
                       lambda p: corollary1_condition(confocal_discriminant(f5, z5[0]), C5_BETAS[0], 3, p, -1), 256))
    if c7 is not None and "caustics" in c7.artifacts:
        z7, m7 = c7.artifacts["caustics"], c7.artifacts["m"]
        probes.append(("prop1_closure", lambda p: prop1_condition(f7, 0.0, 0.9, z7, m7, p), 256))
    return probes


# --- suite ------------------------------------------------------------------


def run_criteria(only=None) -> list:
    """Criteria 1..10 in order (a subset if ``only`` lists numbers)."""
    want = set(range(1, 11)) if only is None else set(only)
    out, found, c5, c7 = [], None, None, None
    for k in sorted(want):
        if k in (3, 4) and found is None:
            found = porism_caustics()
        if k == 1:
            out.append(criterion_1())
        elif k == 2:
            out.append(criterion_2())
        elif k == 3:
            out.append(criterion_3(found=found))
        elif k == 4:
            out.append(criterion_4(found=found))
        elif k == 5:
            c5 = criterion_5()
            out.append(c5)
        elif k == 6:
            out.append(criterion_6())
        elif k == 7:
            c7 = criterion_7()
            out.append(c7)
        elif k == 8:
            out.append(criterion_8())
        elif k == 9:
            out.append(criterion_9())
        elif k == 10:
            out.append(criterion_10(certification_probes(c5, c7)))
    return out


def report_json(results: list) -> str:
    doc = {
        "format_version": REPORT_FORMAT_VERSION,
        "package_version": __version__,
        "criteria": [r.to_dict() for r in results],
        "summary": {"passed": sum(r.passed for r in results), "total": len(results),
                    "expected_failures": [r.number for r in results if r.expected_failure]},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def run_suite(only=None, determinism: bool = True) -> list:
    """Criteria 1..10, plus criterion 11: a second run must serialize identically."""
    results = run_criteria(only)
    if determinism:
        first = report_json(results)
        second = report_json(run_criteria(only))
        results.append(CriterionResult(11, "xvalidate reports are byte-identical across runs", first == second,
                                       {"criteria_compared": [r.number for r in results], "bytes": len(first)}))
    return results


def summary_table(results: list) -> str:
    return "\n".join(r.line() for r in results) + "\n"
