"""Closed-trajectory search and high-precision refinement.

By the porism, closure depends on the caustics only, so every search here is
over caustic parameters with a fixed start point.  Candidates found in double
precision are refined by Gauss-Newton on an mpmath replay of the same
trajectory, which is what high-precision determinant and rank tests need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np
from mpmath import mp
from scipy.optimize import brentq, least_squares

from .abeljacobi import gamma_curve, real_part_integral
from .confocal import (
    ConfocalFamily,
    cartesian_from_elliptic,
    elliptic_coordinates,
    tangent_direction,
)
from .dynamics import geodesic_billiard_on_ellipsoid, play_ordered_game
from .errors import PonceletError

REFINE_PREC = 576


# --- high-precision replay --------------------------------------------------


def mp_cartesian(a, coords, signs):
    """Inverse elliptic-coordinate map in the current mpmath precision."""
    d = len(a)
    x = []
    for i in range(d):
        num = mp.fprod(a[i] - lam for lam in coords)
        den = mp.fprod(a[i] - a[j] for j in range(d) if j != i)
        x.append((1 if signs[i] >= 0 else -1) * mp.sqrt(max(num / den, mp.mpf(0))))
    return x


def mp_tangent_direction(a, x, coords, caustics, signs):
    """High-precision twin of :func:`confocal.tangent_direction` at a point with known coordinates."""
    d = len(a)
    v = [mp.mpf(0)] * d
    for s in range(d):
        c2 = mp.fprod(al - coords[s] for al in caustics) / mp.fprod(coords[r] - coords[s] for r in range(d) if r != s)
        n = [x[i] / (a[i] - coords[s]) for i in range(d)]
        nn = mp.sqrt(mp.fsum(t * t for t in n))
        c = (1 if signs[s] >= 0 else -1) * mp.sqrt(max(c2, mp.mpf(0)))
        v = [v[i] + c * n[i] / nn for i in range(d)]
    nv = mp.sqrt(mp.fsum(t * t for t in v))
    return [t / nv for t in v]


def mp_play_game(a, betas, sig, x, v, bounces):
    """Ordered game in mpmath arithmetic; returns the vertex and direction lists."""
    d = len(a)
    verts, dirs = [list(x)], [list(v)]
    tmin = mp.mpf(2) ** (-mp.prec // 2)
    k = len(betas)
    for j in range(bounces):
        beta = betas[j % k]
        w = [a[i] - beta for i in range(d)]
        A = mp.fsum(v[i] ** 2 / w[i] for i in range(d))
        B = mp.fsum(x[i] * v[i] / w[i] for i in range(d))
        C = mp.fsum(x[i] ** 2 / w[i] for i in range(d)) - 1
        disc = B * B - A * C
        if disc < 0:
            raise PonceletError(f"high-precision replay: ray misses Q_{beta}")
        q = -(B + mp.sign(B) * mp.sqrt(disc)) if B != 0 else -mp.sqrt(disc)
        roots = sorted(t for t in ((q / A), (C / q if q != 0 else mp.mpf(0))) if t > tmin)
        if not roots:
            raise PonceletError(f"high-precision replay: no forward hit on Q_{beta}")
        t = roots[-1] if sig[j % k] == 1 else roots[0]
        x = [x[i] + t * v[i] for i in range(d)]
        n = [x[i] / w[i] for i in range(d)]
        vn = mp.fsum(v[i] * n[i] for i in range(d)) / mp.fsum(t_ * t_ for t_ in n)
        v = [v[i] - 2 * vn * n[i] for i in range(d)]
        nv = mp.sqrt(mp.fsum(t_ * t_ for t_ in v))
        v = [t_ / nv for t_ in v]
        verts.append(x)
        dirs.append(v)
    return verts, dirs


@dataclass(frozen=True)
class GameStart:
    """Start of an ordered game: a point given by elliptic coordinates plus orientation signs."""

    coords: tuple
    point_signs: tuple
    direction_signs: tuple


def game_closure_residual(family: ConfocalFamily, betas, sig, start: GameStart, rounds: int) -> Callable:
    """caustics -> vector (x_end - x_0, v_end - v_0) in the current mpmath precision."""

    def residual(caustics):
        a = [mp.mpf(t) for t in family.a]
        bs = [mp.mpf(b) for b in betas]
        coords = [mp.mpf(c) for c in start.coords]
        x0 = mp_cartesian(a, coords, start.point_signs)
        v0 = mp_tangent_direction(a, x0, coords, [mp.mpf(c) for c in caustics], start.direction_signs)
        verts, dirs = mp_play_game(a, bs, sig, x0, v0, rounds * len(betas))
        return [verts[-1][i] - x0[i] for i in range(len(a))] + [dirs[-1][i] - v0[i] for i in range(len(a))]

    return residual


def gauss_newton(residual: Callable, guess: Sequence, prec: int = REFINE_PREC, max_iter: int = 60):
    """Least-squares zero of ``residual`` near ``guess``.

    The Jacobian is a central difference with step 2^(-prec/3), so the
    iteration contracts by roughly that factor per step until the residual
    sits at the working precision.  Returns (solution as mpf list, final residual norm).
    """
    with mpmath.workprec(prec):
        z = [mp.mpf(g) for g in guess]
        h = mp.mpf(2) ** (-prec // 3)
        floor = mp.mpf(2) ** (-prec + 16)
        last = None
        for _ in range(max_iter):
            r = residual(z)
            nr = mp.sqrt(mp.fsum(t * t for t in r))
            if nr < floor or (last is not None and nr >= last and nr < mp.mpf(2) ** (-prec // 2)):
                return z, nr
            last = nr
            cols = []
            for j in range(len(z)):
                zp = list(z)
                zm = list(z)
                zp[j] += h
                zm[j] -= h
                rp, rm = residual(zp), residual(zm)
                cols.append([(p - m) / (2 * h) for p, m in zip(rp, rm)])
            J = mp.matrix([[cols[j][i] for j in range(len(z))] for i in range(len(r))])
            step, _ = mp.qr_solve(J, mp.matrix([-t for t in r]))
            z = [z[j] + step[j] for j in range(len(z))]
        r = residual(z)
        return z, mp.sqrt(mp.fsum(t * t for t in r))


# --- double-precision search ------------------------------------------------


@dataclass
class SearchResult:
    found: bool
    caustics: list
    period: int
    start: list
    direction: list
    closure_error: float
    winding: Optional[int] = None
    refined: Optional[list] = None
    scan: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    game_start: Optional[GameStart] = None

    def to_dict(self) -> dict:
        def vec(v):
            return None if v is None else [float(t) for t in v]

        def row(r):
            if isinstance(r, dict):
                return {k: (vec(v) if isinstance(v, (list, tuple)) else v) for k, v in r.items()}
            return vec(r)

        err = float(self.closure_error)
        out = {
            "found": self.found,
            "caustics": vec(self.caustics),
            "period": self.period,
            "start": vec(self.start),
            "direction": vec(self.direction),
            "closure_error": err if math.isfinite(err) else None,
            "scan": [row(r) for r in self.scan],
        }
        if self.winding is not None:
            out["winding"] = self.winding
        if self.refined is not None:
            out["refined_caustics"] = [mpmath.nstr(c, 60, strip_zeros=False) for c in self.refined]
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def polar_turn(vertices) -> float:
    """Cumulative signed polar angle swept by consecutive vertices."""
    V = np.asarray(vertices)[:, :2]
    cross = V[:-1, 0] * V[1:, 1] - V[:-1, 1] * V[1:, 0]
    dot = np.sum(V[:-1] * V[1:], axis=1)
    return float(np.sum(np.arctan2(cross, dot)))


def _game_run(family, betas, sig, start: GameStart, caustics, rounds):
    x = cartesian_from_elliptic(family, start.coords, start.point_signs)
    v = tangent_direction(family, x, caustics, start.direction_signs)
    return play_ordered_game(family, betas, sig, x, v, rounds)


def _gap(traj) -> float:
    return float(np.linalg.norm(traj.vertices[-1] - traj.vertices[0]) + np.linalg.norm(traj.directions[-1] - traj.directions[0]))


def default_start(family: ConfocalFamily, betas, sig) -> GameStart:
    """A generic point on the last quadric of the round, heading towards the first one.

    The direction signs are chosen so that the first segment is not the
    degenerate outward hop onto a neighbouring quadric.
    """
    d = family.d
    b = float(betas[-1])
    a = family.a
    coords = [0.5 * (a[s] + a[s + 1]) for s in range(d - 1)] + [b]
    # off-axis orthant keeps every coordinate hyperplane out of the start
    point_signs = tuple([1] * d)
    inward = -1 if sig[-1] == 1 else 1
    return GameStart(tuple(coords), point_signs, tuple([1] * (d - 1) + [inward]))


def rotation_number(family: ConfocalFamily, alpha: float, beta: float = 0.0, bounces: int = 400) -> float:
    """Mean polar turn per bounce, in turns, of the billiard inside Q_beta with elliptic caustic alpha."""
    start = default_start(family, [beta], [1])
    traj = _game_run(family, [beta], [1], start, [alpha], bounces)
    return abs(polar_turn(traj.vertices)) / (2.0 * math.pi * bounces)


def search_planar_game(
    family: ConfocalFamily,
    betas: Sequence[float],
    sig: Sequence[int],
    rounds: int,
    winding: int = 1,
    window: Optional[tuple] = None,
    grid: int = 200,
    start: Optional[GameStart] = None,
    tol: float = 1e-9,
) -> SearchResult:
    """Elliptic caustic alpha for which the planar ordered game closes after ``rounds`` rounds.

    The closure function is the polar turn after ``rounds`` rounds minus
    2*pi*winding; its sign changes are bracketed on a grid over ``window``
    and polished with Brent's method.  When no sign change exists (games
    whose vertices do not wind monotonically) the grid minima of the closure
    gap are polished instead.
    """
    if family.d != 2:
        raise ValueError("planar search needs d = 2")
    if start is None:
        start = default_start(family, betas, sig)
    lo, hi = window if window is not None else (max(betas), family.a[1])
    span = hi - lo
    alphas = np.linspace(lo + 1e-3 * span, hi - 1e-3 * span, grid)
    target = 2.0 * math.pi * winding

    def turn(al):
        return abs(polar_turn(_game_run(family, betas, sig, start, [al], rounds).vertices)) - target

    def gap(al):
        return _gap(_game_run(family, betas, sig, start, [al], rounds))

    scan, vals, gaps = [], [], []
    for al in alphas:
        try:
            f, g = turn(al), gap(al)
        except PonceletError:
            f, g = math.nan, math.nan
        scan.append((al, f, g))
        vals.append(f)
        gaps.append(g)
    candidates = []
    for i in range(grid - 1):
        if np.isfinite(vals[i]) and np.isfinite(vals[i + 1]) and vals[i] * vals[i + 1] < 0:
            try:
                candidates.append(brentq(turn, alphas[i], alphas[i + 1], xtol=1e-15, rtol=1e-15))
            except (ValueError, PonceletError):
                pass
    if not candidates:
        from scipy.optimize import minimize_scalar

        g = np.asarray(gaps)
        for i in np.argsort(np.where(np.isfinite(g), g, np.inf))[:3]:
            if 0 < i < grid - 1 and np.isfinite(g[i]):
                r = minimize_scalar(gap, bounds=(alphas[i - 1], alphas[i + 1]), method="bounded", options={"xatol": 1e-15})
                candidates.append(float(r.x))
    best = None
    for al in candidates:
        try:
            traj = _game_run(family, betas, sig, start, [al], rounds)
        except PonceletError:
            continue
        err = _gap(traj)
        if best is None or err < best[1]:
            best = (al, err, traj)
    k = len(betas) * rounds
    if best is None or best[1] > 1e-6:
        return SearchResult(False, [], k, [], [], math.inf if best is None else best[1], winding, scan=scan, notes=["no closure in window"])
    al, err, traj = best
    notes = [] if err < tol else [f"closure error {err:.2e} above {tol:g}"]
    return SearchResult(True, [al], k, list(traj.vertices[0]), list(traj.directions[0]), err, winding, scan=scan, notes=notes)


def search_period_d2(family: ConfocalFamily, n: int, beta: float = 0.0, winding: int = 1, grid: int = 64) -> SearchResult:
    """Elliptic caustic of the n-periodic billiard inside Q_beta by rotation-number bisection.

    The rotation number increases from 0 (grazing) towards 1/2 (focal
    caustic); bisection on it brackets winding/n, and the exact closure is
    then found by Brent's method on the polar turn after n bounces.
    """
    if family.d != 2:
        raise ValueError("planar search needs d = 2")
    if n == 2:
        x = np.array([math.sqrt(family.a[0] - beta), 0.0])
        return SearchResult(True, [family.a[1]], 2, list(x), [-1.0, 0.0], 0.0, 1, notes=["axial orbit on the major axis; caustic degenerates to the focal segment"])
    if not 0 < 2 * winding < n:
        raise ValueError("need 0 < winding/n < 1/2 for an elliptic caustic")
    rho = winding / n
    lo, hi = beta, family.a[1]
    span = hi - lo
    u, w = lo + 1e-6 * span, hi - 1e-6 * span
    for _ in range(40):
        mid = 0.5 * (u + w)
        if rotation_number(family, mid, beta) < rho:
            u = mid
        else:
            w = mid
        if w - u < 1e-3 * span:
            break
    pad = 0.02 * span
    window = (max(lo, u - pad), min(hi, w + pad))
    res = search_planar_game(family, [beta], [1], n, winding, window=window, grid=grid)
    res.notes.append(f"rotation-number bracket [{u:.6g}, {w:.6g}]")
    return res


def refine_game(family: ConfocalFamily, betas, sig, rounds: int, caustics, start: Optional[GameStart] = None, prec: int = REFINE_PREC):
    """High-precision caustics of a closed game found in double precision."""
    if start is None:
        start = default_start(family, betas, sig)
    res = game_closure_residual(family, betas, sig, start, rounds)
    return gauss_newton(res, caustics, prec)


def admissible_start(family: ConfocalFamily, betas, sig, caustics) -> GameStart:
    """Start on the last quadric of the round with the free coordinates mid-way
    through the widest piece of their band where P > 0 (Lemma 1)."""
    from .confocal import admissibility_polynomial

    poly = admissibility_polynomial(family, caustics)
    a = list(family.a)
    d = family.d
    roots = sorted(float(r) for r in poly.roots)
    coords = []
    for s in range(d - 1):
        lo, hi = a[s + 1], a[s]
        cuts = sorted({lo, hi, *[r for r in roots if lo < r < hi]})
        pieces = [(u, w) for u, w in zip(cuts[:-1], cuts[1:]) if poly(0.5 * (u + w)) > 0]
        if not pieces:
            raise PonceletError(f"no admissible range for lambda_{s + 1}")
        u, w = max(pieces, key=lambda p: p[1] - p[0])
        coords.append(0.5 * (u + w))
    coords.append(float(betas[-1]))
    inward = -1 if sig[-1] == 1 else 1
    return GameStart(tuple(coords), tuple([1] * d), tuple([1] * (d - 1) + [inward]))


def _gap_vector(family, betas, sig, start, caustics, rounds) -> np.ndarray:
    traj = _game_run(family, betas, sig, start, caustics, rounds)
    return np.concatenate([traj.vertices[-1] - traj.vertices[0], traj.directions[-1] - traj.directions[0]])


def search_spatial_game(
    family: ConfocalFamily,
    betas: Sequence[float],
    sig: Sequence[int],
    rounds: int,
    box: Sequence[tuple],
    grid: int = 24,
    seeds: int = 6,
    tol: float = 1e-10,
) -> SearchResult:
    """Caustics closing an ordered game in d >= 3 after ``rounds`` rounds.

    A ``grid``^(d-1) scan of the caustic box (one interval per caustic) ranks
    starting guesses by closure gap; the best ``seeds`` are polished by
    bounded trust-region least squares on the position-and-direction gap.
    The start point follows the caustics (mid-range of each admissible
    coordinate band); by the porism this does not move the closure set.  ``box`` lists the caustic intervals
    in decreasing order of the caustic.
    """
    from itertools import product

    d = family.d
    if len(box) != d - 1:
        raise ValueError(f"need {d - 1} caustic intervals")
    axes = [np.linspace(lo + (hi - lo) / (2 * grid), hi - (hi - lo) / (2 * grid), grid) for lo, hi in box]
    scan = []
    for cs in product(*axes):
        if any(cs[i] <= cs[i + 1] for i in range(len(cs) - 1)):
            continue
        try:
            st = admissible_start(family, betas, sig, cs)
            g = float(np.linalg.norm(_gap_vector(family, betas, sig, st, cs, rounds)))
        except PonceletError:
            g = math.inf
        scan.append((*cs, g))
    scan.sort(key=lambda r: r[-1])
    best = None
    for row in scan[:seeds]:
        if not math.isfinite(row[-1]):
            break
        cs0 = list(row[:-1])
        try:
            sol = least_squares(
                lambda c: _gap_vector(family, betas, sig, admissible_start(family, betas, sig, c), c, rounds),
                cs0, bounds=([lo for lo, _ in box], [hi for _, hi in box]),
                xtol=1e-15, ftol=1e-15, gtol=1e-15, method="trf",
            )
            err = float(np.linalg.norm(sol.fun))
        except PonceletError:
            continue
        if best is None or err < best[1]:
            best = (list(sol.x), err, admissible_start(family, betas, sig, sol.x))
    k = len(betas) * rounds
    if best is None or best[1] > 1e-6:
        return SearchResult(False, [], k, [], [], math.inf if best is None else best[1], scan=scan, notes=["no closure in box"])
    cs, err, st = best
    traj = _game_run(family, betas, sig, st, cs, rounds)
    notes = [] if err < tol else [f"closure error {err:.2e} above {tol:g}"]
    return SearchResult(True, [float(c) for c in cs], k, list(traj.vertices[0]), list(traj.directions[0]), err,
                        scan=scan, notes=notes, game_start=st)


# --- geodesic billiard on the ellipsoid Q_0 (d = 3) -------------------------

GEODESIC_CLOSE_TOL = 1e-7
GEODESIC_OPEN_TOL = 1e-3


def geodesic_start(family: ConfocalFamily, gamma: float, alpha: float):
    """Start on the boundary curve Q_0 ∩ Q_gamma, moving into gamma < lambda_2 < alpha.

    The direction is tangent to Q_0 with caustic Q_alpha; lambda_1 starts at
    the midpoint of its band.
    """
    a = family.a
    x = cartesian_from_elliptic(family, [0.5 * (a[0] + a[1]), gamma, 0.0], [1, 1, 1])
    for sg in ([1, 1, 1], [1, -1, 1], [-1, 1, 1], [-1, -1, 1]):
        v = tangent_direction(family, x, [alpha, 0.0], sg)
        if elliptic_coordinates(family, x + 1e-5 * v)[1] > gamma:
            return x, v
    raise PonceletError("no inward tangent direction at the start point")


def geodesic_turns(family: ConfocalFamily, gamma: float, alpha: float, bounces: int):
    """Vertices and unwrapped turning angle (radians) of the boundary-curve bounce points.

    The angle is atan2 of the boundary curve's normalized (x_1, x_2), so one
    full turn around the curve is 2*pi.
    """
    x, v = geodesic_start(family, gamma, alpha)
    tr = geodesic_billiard_on_ellipsoid(family, [gamma], x, v, bounces)
    V = np.asarray(tr.vertices)
    a = family.arr
    ang = np.unwrap(np.arctan2(V[:, 1] / math.sqrt(a[1] - gamma), V[:, 0] / math.sqrt(a[0] - gamma)))
    return V, ang - ang[0]


@dataclass
class GeodesicClosure:
    """Simulator verdict at one (gamma, alpha): "closed", "open" or "abstain"."""

    gamma: float
    alpha: float
    status: str
    period: Optional[int] = None
    winding: Optional[int] = None
    gaps: dict = field(default_factory=dict)
    turns: dict = field(default_factory=dict)
    note: str = ""

    def counts(self, k: Optional[int] = None) -> list:
        """Winding data (n_1, n_2) after ``k`` bounces: lambda_1 passes its band twice per turn."""
        k = self.period if k is None else k
        w = int(round(abs(self.turns[k]) / (2 * math.pi)))
        return [2 * w, k]


def classify_geodesic(
    family: ConfocalFamily,
    gamma: float,
    alpha: float,
    periods: Sequence[int] = (5, 6, 7, 8),
    close_tol: float = GEODESIC_CLOSE_TOL,
    open_tol: float = GEODESIC_OPEN_TOL,
) -> GeodesicClosure:
    """Certify closure after some k in ``periods``, certify non-closure, or abstain."""
    kmax = max(periods)
    try:
        V, ang = geodesic_turns(family, gamma, alpha, kmax)
    except PonceletError as exc:
        return GeodesicClosure(gamma, alpha, "abstain", note=type(exc).__name__)
    gaps = {k: float(np.linalg.norm(V[k] - V[0])) for k in periods}
    turns = {k: float(ang[k]) for k in periods}
    out = GeodesicClosure(gamma, alpha, "open", gaps=gaps, turns=turns)
    for k in sorted(periods):
        if gaps[k] < close_tol:
            out.status, out.period = "closed", k
            out.winding = int(round(turns[k] / (2 * math.pi)))
            return out
    if min(gaps.values()) <= open_tol:
        out.status = "abstain"
        out.note = "near-closure between tolerances"
    return out


def search_geodesic_closure(
    family: ConfocalFamily,
    gamma: float,
    k: int,
    winding: int,
    bracket: tuple,
    xtol: float = 1e-13,
) -> SearchResult:
    """Caustic alpha in ``bracket`` whose geodesic billiard closes after k bounces with the given winding."""

    def f(al):
        return geodesic_turns(family, gamma, al, k)[1][-1] / (2 * math.pi) - winding

    try:
        al = brentq(f, *bracket, xtol=xtol)
    except (ValueError, PonceletError) as exc:
        return SearchResult(False, [], k, None, None, math.inf, winding, notes=[str(exc)])
    V, ang = geodesic_turns(family, gamma, al, k)
    x, v = geodesic_start(family, gamma, al)
    gap = float(np.linalg.norm(V[-1] - V[0]))
    return SearchResult(gap < 1e-8, [al], k, x.tolist(), v.tolist(), gap, winding)


# --- d = 3 annulus between two ellipsoids: rotation-number search -----------


def annulus_rotation_numbers(family: ConfocalFamily, betas, caustics) -> np.ndarray:
    """Per-round advance (t_1, t_2) of lambda_1, lambda_2 in units of their ranges.

    One round of the game between Q_{beta_1} (outer) and Q_{beta_2} (inner)
    sweeps lambda_3 over [beta_1, beta_2] twice.  With V_s the real integrals
    of (1, x) dx/y over the range of lambda_s, the invariant relations give
    V_3 = t_1 V_1 + t_2 V_2.  Caustics are (hyperboloid, ellipsoid) with the
    ellipsoid between beta_2 and a_3.
    """
    a = family.a
    al1, al2 = (float(c) for c in caustics)
    cur = gamma_curve(family, [al1, al2])
    V3 = real_part_integral(cur, [0, 1], float(betas[0]), float(betas[1]))
    if al1 < a[1]:
        V2 = real_part_integral(cur, [0, 1], a[2], al1)
        V1 = real_part_integral(cur, [0, 1], a[1], a[0])
    else:
        V2 = real_part_integral(cur, [0, 1], a[2], a[1])
        V1 = real_part_integral(cur, [0, 1], al1, a[0])
    return np.linalg.solve(np.array([V1, V2]).T, V3)


def annulus_targets(m: int, t_box) -> list:
    """Rational targets (t_1, t_2) = (n_1/m, n_2/m) inside ``t_box``.

    Exact return needs an even number of passes through each coordinate
    plane, so n_1 and n_2 are even.
    """
    (lo1, hi1), (lo2, hi2) = t_box
    out = []
    for n1 in range(-2 * m, 2 * m + 1, 2):
        for n2 in range(-2 * m, 2 * m + 1, 2):
            if n1 and n2 and lo1 <= n1 / m <= hi1 and lo2 <= n2 / m <= hi2:
                out.append((n1 / m, n2 / m))
    return out


def search_annulus_d3(
    family: ConfocalFamily,
    betas: Sequence[float],
    rounds: Sequence[int],
    grid: int = 5,
    tol: float = 1e-9,
) -> SearchResult:
    """Alternating closure between two confocal ellipsoids (d = 3).

    For each m in ``rounds`` the rotation numbers are driven to rational
    targets by bounded least squares over both hyperboloid bands; each
    candidate is then replayed by the ordered-game simulator, which alone
    certifies closure.
    """
    if family.d != 3:
        raise ValueError("annulus search is for d = 3")
    a = family.a
    b1, b2 = (float(b) for b in betas)
    sig = [1, -1]
    eps = 1e-6
    bands = [(a[2] + eps, a[1] - eps), (a[1] + eps, a[0] - eps)]
    lo2, hi2 = b2 + eps, a[2] - eps
    scan = []
    for band in bands:
        seeds = []
        for g1 in np.linspace(*band, grid + 2)[1:-1]:
            for g2 in np.linspace(lo2, hi2, grid + 2)[1:-1]:
                try:
                    seeds.append(((g1, g2), annulus_rotation_numbers(family, (b1, b2), (g1, g2))))
                except (np.linalg.LinAlgError, PonceletError, ValueError):
                    continue
        if not seeds:
            continue
        T = np.array([t for _, t in seeds])
        t_box = [(T[:, 0].min(), T[:, 0].max()), (T[:, 1].min(), T[:, 1].max())]
        for m in rounds:
            for target in annulus_targets(m, t_box):
                target = np.array(target)
                guess = min(seeds, key=lambda st: float(np.linalg.norm(st[1] - target)))[0]
                try:
                    fit = least_squares(
                        lambda z: annulus_rotation_numbers(family, (b1, b2), z) - target,
                        guess, bounds=([band[0], lo2], [band[1], hi2]), xtol=1e-15, ftol=1e-15, gtol=1e-15,
                    )
                    caustics = [float(c) for c in fit.x]
                    start = admissible_start(family, [b1, b2], sig, caustics)
                    traj = _game_run(family, [b1, b2], sig, start, caustics, m)
                    gap = _gap(traj)
                except (PonceletError, ValueError, np.linalg.LinAlgError):
                    continue
                scan.append({"m": m, "target": target.tolist(), "caustics": caustics, "gap": gap})
                if gap < tol:
                    return SearchResult(True, caustics, 2 * m, traj.vertices[0].tolist(), traj.directions[0].tolist(), gap,
                                        scan=scan, notes=[f"rotation numbers {target.tolist()}"], game_start=start)
    return SearchResult(False, [], None, None, None, math.inf, scan=scan)
