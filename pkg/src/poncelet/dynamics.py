"""Billiard flow inside domains cut out by confocal quadrics.

Segments are straight lines; walls are members of the confocal family.  A
wall ``Q_beta`` bounds exactly one elliptic coordinate ``lam_s`` (the one
whose band contains ``beta``), and a reflection there is an extremum of
``lam_s``: a minimum is a reflection *from inside*, a maximum *from outside*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .confocal import (
    AdmissiblePolynomial,
    ConfocalFamily,
    caustic_parameters,
    elliptic_coordinates,
)
from .errors import (
    CornerHit,
    EmptyRange,
    EscapeDetected,
    GrazingIncidence,
    InflectionAmbiguous,
    IntegrationFailure,
    InvalidSignature,
    OrderViolation,
    PointNotOnQuadric,
    UnbalancedCounts,
)

INSIDE = "inside"
OUTSIDE = "outside"

GRAZING_TOL = 1e-12
CORNER_TOL = 1e-12
ON_QUADRIC_TOL = 1e-8


@dataclass(frozen=True)
class Wall:
    lam: float
    s: int  # 1-based coordinate index bounded by this wall
    side: str  # "lo" (lam_s >= lam) or "hi" (lam_s <= lam)


@dataclass(frozen=True)
class Domain:
    """Box ``bounds[s-1] = (beta'_s, beta''_s)`` in elliptic coordinates."""

    family: ConfocalFamily
    bounds: tuple

    def __post_init__(self):
        a = self.family.a
        d = self.family.d
        if len(self.bounds) != d:
            raise ValueError(f"need {d} coordinate bounds")
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", b)
        for s, (lo, hi) in enumerate(b, start=1):
            upper = a[s - 1]
            lower = a[s] if s < d else -math.inf
            if not (lower <= lo < hi <= upper):
                raise ValueError(f"bounds for lambda_{s} must satisfy {lower} <= lo < hi <= {upper}; got {(lo, hi)}")
            if s == d and not math.isfinite(lo):
                raise ValueError("beta'_d must be finite for a bounded domain")

    @classmethod
    def inside(cls, family: ConfocalFamily, beta: float = 0.0) -> "Domain":
        """Interior of the ellipsoid Q_beta."""
        a = family.a
        d = family.d
        b = [(a[s], a[s - 1]) for s in range(1, d)] + [(beta, a[d - 1])]
        return cls(family, tuple(b))

    @classmethod
    def shell(cls, family: ConfocalFamily, beta_outer: float, beta_inner: float) -> "Domain":
        """Region between two confocal ellipsoids (beta_outer < beta_inner < a_d)."""
        a = family.a
        d = family.d
        b = [(a[s], a[s - 1]) for s in range(1, d)] + [(beta_outer, beta_inner)]
        return cls(family, tuple(b))

    @property
    def walls(self) -> list:
        a = self.family.a
        d = self.family.d
        out = []
        for s, (lo, hi) in enumerate(self.bounds, start=1):
            natural_lo = a[s] if s < d else -math.inf
            if lo != natural_lo:
                out.append(Wall(lo, s, "lo"))
            if hi != a[s - 1]:
                out.append(Wall(hi, s, "hi"))
        return out

    def diameter(self) -> float:
        lo_d = self.bounds[-1][0]
        return 2.0 * math.sqrt(self.family.a[0] - lo_d)

    def contains(self, point, slack: float = 1e-9) -> bool:
        lam = elliptic_coordinates(self.family, point)
        return all(lo - slack <= l <= hi + slack for l, (lo, hi) in zip(lam, self.bounds))


@dataclass
class BounceRecord:
    vertex: np.ndarray
    lam: float
    classification: str
    s: int
    index: int = -1  # position in an ordered game (0-based), -1 for plain billiards


@dataclass
class Trajectory:
    family: ConfocalFamily
    vertices: list
    directions: list
    bounces: list
    caustics: np.ndarray
    path: Optional[list] = field(default=None, repr=False)  # dense samples (geodesic billiards)

    @property
    def num_bounces(self) -> int:
        return len(self.bounces)

    def segment_caustics(self) -> np.ndarray:
        return np.array([caustic_parameters(self.family, x, v) for x, v in zip(self.vertices, self.directions)])

    def classifications(self) -> list:
        return [b.classification for b in self.bounces]


def _line_quadric(family: ConfocalFamily, lam: float, x: np.ndarray, v: np.ndarray):
    """Coefficients (A, B, C) of A t^2 + 2 B t + C for the line x + t v against Q_lam."""
    w = 1.0 / (family.arr - lam)
    A = float(np.sum(v * v * w))
    B = float(np.sum(x * v * w))
    C = float(np.sum(x * x * w) - 1.0)
    return A, B, C


def _quadratic_roots(A: float, B: float, C: float) -> list:
    if A == 0.0:
        return [] if B == 0.0 else [-C / (2.0 * B)]
    disc = B * B - A * C
    if disc < 0.0:
        return []
    sq = math.sqrt(disc)
    q = -(B + math.copysign(sq, B))
    if q == 0.0:
        return [0.0, 0.0]
    return sorted([q / A, C / q])


def _polish_hit(family: ConfocalFamily, lam: float, x: np.ndarray, v: np.ndarray, t: float) -> float:
    for _ in range(2):
        A, B, C = _line_quadric(family, lam, x, v)
        f = A * t * t + 2 * B * t + C
        df = 2 * A * t + 2 * B
        if df == 0.0:
            break
        t -= f / df
    return t


def reflect(family: ConfocalFamily, boundary_lambda: float, point, incoming, tol: float = ON_QUADRIC_TOL) -> np.ndarray:
    """Mirror ``incoming`` in the tangent plane of Q_lambda at ``point``."""
    x = np.asarray(point, dtype=float)
    v = np.asarray(incoming, dtype=float)
    if abs(family.quadric(boundary_lambda, x)) > tol:
        raise PointNotOnQuadric(f"point is off Q_{boundary_lambda} by {family.quadric(boundary_lambda, x):g}")
    n = x / (family.arr - boundary_lambda)
    nn = float(np.dot(n, n))
    vn = float(np.dot(v, n))
    if abs(vn) < GRAZING_TOL * math.sqrt(nn) * np.linalg.norm(v):
        raise GrazingIncidence("normal component below grazing threshold")
    return v - 2.0 * vn / nn * n


def trace_segment(domain: Domain, point, direction, max_length: Optional[float] = None, slack: float = 1e-9):
    """First wall hit along the ray.  Returns (hit point, wall lambda, coordinate index s, wall)."""
    fam = domain.family
    x = np.asarray(point, dtype=float)
    v = np.asarray(direction, dtype=float)
    v = v / np.linalg.norm(v)
    if max_length is None:
        max_length = 4.0 * domain.diameter()
    tmin = 1e-10 * math.sqrt(fam.a[0])
    cands = []
    for wall in domain.walls:
        A, B, C = _line_quadric(fam, wall.lam, x, v)
        for t in _quadratic_roots(A, B, C):
            if tmin < t <= max_length:
                cands.append((t, wall))
    cands.sort(key=lambda c: c[0])
    hits = []
    for t, wall in cands:
        t = _polish_hit(fam, wall.lam, x, v, t)
        y = x + t * v
        n = y / (fam.arr - wall.lam)
        if abs(np.dot(n, v)) < GRAZING_TOL * np.linalg.norm(n):
            continue  # tangency: the wall acts as a caustic here
        lam = elliptic_coordinates(fam, y)
        ok = all(
            lo - slack <= l <= hi + slack
            for k, (l, (lo, hi)) in enumerate(zip(lam, domain.bounds), start=1)
            if k != wall.s
        )
        if ok:
            hits.append((t, wall, y))
            if len(hits) == 2:
                break
    if not hits:
        raise EscapeDetected(f"no wall within length {max_length:g}")
    if len(hits) == 2 and hits[1][0] - hits[0][0] < CORNER_TOL * max(1.0, hits[0][0]) and hits[1][1] != hits[0][1]:
        raise CornerHit(f"walls {hits[0][1].lam} and {hits[1][1].lam} meet at the hit point")
    t, wall, y = hits[0]
    return y, wall.lam, wall.s, wall


def classify_reflection(lambda_before, lambda_at, lambda_after, s: int, tol: float = 0.0) -> str:
    """``outside`` if lam_s has a strict local maximum at the bounce, ``inside`` for a minimum.

    ``s`` is 1-based; scalars are accepted in place of coordinate vectors.
    """

    def pick(c):
        c = np.atleast_1d(np.asarray(c, dtype=float))
        return float(c[s - 1]) if c.size > 1 else float(c[0])

    b, m, a = pick(lambda_before), pick(lambda_at), pick(lambda_after)
    if m > b + tol and m > a + tol:
        return OUTSIDE
    if m < b - tol and m < a - tol:
        return INSIDE
    raise InflectionAmbiguous(f"no strict extremum of lambda_{s}: {b}, {m}, {a}")


def _side_class(wall: Wall) -> str:
    return INSIDE if wall.side == "lo" else OUTSIDE


def simulate(domain: Domain, start, direction, num_bounces: int, max_length: Optional[float] = None) -> Trajectory:
    """Billiard inside ``domain`` for ``num_bounces`` reflections."""
    fam = domain.family
    x = np.asarray(start, dtype=float)
    v = np.asarray(direction, dtype=float)
    v = v / np.linalg.norm(v)
    caustics = caustic_parameters(fam, x, v)
    verts, dirs, bounces = [x], [v], []
    for _ in range(num_bounces):
        y, lam, s, wall = trace_segment(domain, x, v, max_length)
        v = reflect(fam, lam, y, v)
        v = v / np.linalg.norm(v)
        bounces.append(BounceRecord(y, lam, _side_class(wall), s))
        verts.append(y)
        dirs.append(v)
        x = y
    return Trajectory(fam, verts, dirs, bounces, caustics)


def lambda_ranges(domain: Domain, poly: AdmissiblePolynomial, hint: Optional[Sequence[float]] = None) -> list:
    """Intervals [gamma'_s, gamma''_s] = {lam in [beta'_s, beta''_s] : P(lam) >= 0}.

    If P >= 0 on several disjoint pieces, ``hint`` (coordinates of a point on
    the trajectory) selects the piece.
    """
    out = []
    roots = poly.sorted_roots()
    for s, (lo, hi) in enumerate(domain.bounds):
        cuts = sorted({lo, hi, *[r for r in roots if lo < r < hi]})
        pieces = []
        for u, w in zip(cuts[:-1], cuts[1:]):
            if poly(0.5 * (u + w)) >= 0:
                if pieces and pieces[-1][1] == u:
                    pieces[-1] = (pieces[-1][0], w)
                else:
                    pieces.append((u, w))
        if not pieces:
            raise EmptyRange(f"P < 0 on all of [{lo}, {hi}] for lambda_{s + 1}")
        if len(pieces) > 1:
            if hint is None:
                raise EmptyRange(f"lambda_{s + 1} range splits into {pieces}; pass a hint point")
            h = float(hint[s])
            pieces = [min(pieces, key=lambda p: 0.0 if p[0] <= h <= p[1] else min(abs(h - p[0]), abs(h - p[1])))]
        out.append(pieces[0])
    return out


def segment_events(family: ConfocalFamily, x, y, caustics, rtol: float = 1e-12) -> list:
    """Interior extrema of elliptic coordinates along the open segment x -> y.

    Each event is (t, s, value): tangency with a caustic or crossing of a
    coordinate hyperplane (where some lam_s touches a_i).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    v = y - x
    a = family.arr
    ev = []
    eps = rtol
    for alpha in caustics:
        A, B, _ = _line_quadric(family, alpha, x, v)
        if A != 0.0:
            t = -B / A
            if eps < t < 1 - eps:
                ev.append((t, family.band(alpha), float(alpha)))
    for i in range(family.d):
        if v[i] != 0.0:
            t = -x[i] / v[i]
            if eps < t < 1 - eps:
                p = x + t * v
                p[i] = 0.0
                lam = elliptic_coordinates(family, p)
                # a_i is reached either by lam_i (upper end) or lam_{i-1} (lower end)
                idx = [k for k in range(family.d) if lam[k] == a[i]]
                s = idx[0] + 1 if idx else i + 1
                ev.append((t, s, float(a[i])))
    ev.sort()
    return ev


def extremum_sequence(traj: Trajectory, num_segments: Optional[int] = None) -> list:
    """Ordered list of (s, value) extremum events along the first ``num_segments`` segments."""
    n = len(traj.vertices) - 1 if num_segments is None else num_segments
    seq = []
    for k in range(n):
        for _, s, val in segment_events(traj.family, traj.vertices[k], traj.vertices[k + 1], traj.caustics):
            seq.append((s, val))
        b = traj.bounces[k]
        seq.append((b.s, b.lam))
    return seq


def winding_counts(traj: Trajectory, ranges, period: Optional[int] = None, tol: float = 1e-7) -> np.ndarray:
    """Per-coordinate counts n_s of hits at gamma'_s (equal to hits at gamma''_s) over one period."""
    if period is None:
        period = detect_period(traj)
        if period is None:
            raise UnbalancedCounts("trajectory is not closed")
    seq = extremum_sequence(traj, period)
    d = traj.family.d
    n = np.zeros(d, dtype=int)
    for s in range(1, d + 1):
        lo, hi = ranges[s - 1]
        scale = max(1.0, abs(lo), abs(hi))
        c_lo = sum(1 for (k, val) in seq if k == s and abs(val - lo) <= tol * scale)
        c_hi = sum(1 for (k, val) in seq if k == s and abs(val - hi) <= tol * scale)
        if c_lo != c_hi:
            raise UnbalancedCounts(f"lambda_{s}: {c_lo} hits at {lo} but {c_hi} at {hi}")
        n[s - 1] = c_lo
    return n


def detect_period(traj: Trajectory, tol_pos: Optional[float] = None, tol_dir: float = 1e-8) -> Optional[int]:
    """Smallest k >= 1 with vertex_k == vertex_0 and direction_k == direction_0."""
    x0, v0 = traj.vertices[0], traj.directions[0]
    if tol_pos is None:
        tol_pos = 1e-6 * 2.0 * math.sqrt(traj.family.a[0])
    for k in range(1, len(traj.vertices)):
        if np.linalg.norm(traj.vertices[k] - x0) < tol_pos and np.linalg.norm(traj.directions[k] - v0) < tol_dir:
            return k
    return None


def validate_signature(betas: Sequence[float], sig: Sequence[int]) -> bool:
    return first_signature_violation(betas, sig) is None


def first_signature_violation(betas: Sequence[float], sig: Sequence[int]) -> Optional[int]:
    """0-based index of the first bounce breaking the boundedness rule, or None."""
    k = len(sig)
    if len(betas) != k:
        raise ValueError("betas and signature lengths differ")
    if k < 1:
        raise ValueError("empty signature")
    for s in range(k):
        if sig[s] not in (1, -1):
            return s
        if sig[s] == -1:
            prv, nxt = (s - 1) % k, (s + 1) % k
            if sig[prv] != 1 or sig[nxt] != 1 or not (betas[nxt] < betas[s] and betas[prv] < betas[s]):
                return s
    return None


def play_ordered_game(
    family: ConfocalFamily,
    betas: Sequence[float],
    sig: Sequence[int],
    start,
    direction,
    rounds: int,
) -> Trajectory:
    """Ordered game: bounce j lands on Q_{beta_(j mod k)} from the side given by sig.

    ``+1`` reflects at the exit point of the line from the ellipsoid (from
    inside), ``-1`` at the entry point (from outside).  The particle passes
    freely through every other quadric.
    """
    bad = first_signature_violation(betas, sig)
    if bad is not None:
        raise InvalidSignature(f"signature violates boundedness rule at index {bad}", index=bad)
    k = len(betas)
    for b in betas:
        if not family.is_ellipsoid(b):
            raise ValueError(f"Q_{b} is not an ellipsoid (need beta < a_d)")
    x = np.asarray(start, dtype=float)
    v = np.asarray(direction, dtype=float)
    v = v / np.linalg.norm(v)
    caustics = caustic_parameters(family, x, v)
    verts, dirs, bounces = [x], [v], []
    tmin = 1e-10 * math.sqrt(family.a[0])
    for j in range(rounds * k):
        idx = j % k
        beta = float(betas[idx])
        A, B, C = _line_quadric(family, beta, x, v)
        roots = [t for t in _quadratic_roots(A, B, C) if t > tmin]
        if sig[idx] == 1:
            if not roots:
                raise OrderViolation(f"ray misses Q_{beta} (bounce {idx})", index=idx)
            t = roots[-1]
            cls = INSIDE
        else:
            if C < 0 or len(roots) < 2:
                raise OrderViolation(f"cannot reach Q_{beta} from outside (bounce {idx})", index=idx)
            t = roots[0]
            cls = OUTSIDE
        t = _polish_hit(family, beta, x, v, t)
        y = x + t * v
        v = reflect(family, beta, y, v)
        v = v / np.linalg.norm(v)
        bounces.append(BounceRecord(y, beta, cls, family.d, idx))
        verts.append(y)
        dirs.append(v)
        x = y
    return Trajectory(family, verts, dirs, bounces, caustics)


# --- billiards on the ellipsoid E = Q_0 (d = 3) -----------------------------


def _geodesic_rhs(inv_a):
    def rhs(_, z):
        x, v = z[:3], z[3:]
        n = inv_a * x
        mu = np.dot(v, inv_a * v) / np.dot(n, n)
        return np.concatenate([v, -mu * n])

    return rhs


def project_to_ellipsoid(family: ConfocalFamily, x, v):
    """Pull (x, v) back onto Q_0 and its tangent plane, keeping the speed."""
    inv_a = 1.0 / family.arr
    x = np.asarray(x, dtype=float)
    x = x / math.sqrt(float(np.dot(x, inv_a * x)))
    n = inv_a * x
    speed = np.linalg.norm(v)
    v = v - np.dot(v, n) / np.dot(n, n) * n
    return x, v * speed / np.linalg.norm(v)


def surface_caustic(family: ConfocalFamily, x, v) -> float:
    """Caustic parameter of a geodesic on Q_0 (the tangent-line root away from 0)."""
    c = caustic_parameters(family, x, v)
    return float(c[np.argmax(np.abs(c))])


def integrate_geodesic(family: ConfocalFamily, x0, v0, t_end: float, samples: int = 200, rtol: float = 1e-12):
    """Free geodesic on Q_0; returns (times, positions, velocities)."""
    from scipy.integrate import solve_ivp

    if family.d != 3:
        raise ValueError("geodesic flow implemented for d = 3")
    x0, v0 = project_to_ellipsoid(family, x0, v0)
    ts = np.linspace(0.0, t_end, samples)
    sol = solve_ivp(
        _geodesic_rhs(1.0 / family.arr), (0.0, t_end), np.concatenate([x0, v0]),
        method="DOP853", rtol=rtol, atol=rtol, t_eval=ts,
    )
    if not sol.success:
        raise IntegrationFailure(sol.message)
    return sol.t, sol.y[:3].T, sol.y[3:].T


def geodesic_billiard_on_ellipsoid(
    family: ConfocalFamily,
    boundaries: Sequence[float],
    start,
    direction,
    num_bounces: int,
    max_time: Optional[float] = None,
    rtol: float = 1e-12,
    keep_path: bool = False,
) -> Trajectory:
    """Billiard on Q_0 inside the region cut by the curves Q_0 ∩ Q_beta.

    Between bounces the particle follows a geodesic; the admissible side of
    each boundary curve is the side containing ``start``.  Reflection mirrors
    the velocity about the boundary curve inside the tangent plane of Q_0.
    """
    from scipy.integrate import solve_ivp

    if family.d != 3:
        raise ValueError("geodesic billiards implemented for d = 3")
    a = family.arr
    inv_a = 1.0 / a
    x, v = project_to_ellipsoid(family, start, direction)
    v = v / np.linalg.norm(v)
    if max_time is None:
        max_time = 20.0 * math.sqrt(a[0])
    betas = [float(b) for b in boundaries]
    sides = []
    for b in betas:
        g = family.quadric(b, x)
        if abs(g) < 1e-12:
            # on the wall: the admissible side is where the velocity points
            g = family.quadric(b, x + 1e-6 * v)
        sides.append(1.0 if g > 0 else -1.0)

    def make_event(b, side):
        def ev(_, z):
            return side * (float(np.sum(z[:3] ** 2 / (a - b))) - 1.0)

        ev.terminal = True
        ev.direction = -1
        return ev

    events = [make_event(b, sd) for b, sd in zip(betas, sides)]
    rhs = _geodesic_rhs(inv_a)
    caustic = surface_caustic(family, x, v)
    verts, dirs, bounces = [x], [v], []
    path = [x.copy()] if keep_path else None
    for _ in range(num_bounces):
        sol = solve_ivp(
            rhs, (0.0, max_time), np.concatenate([x, v]), method="DOP853",
            rtol=rtol, atol=rtol, events=events, dense_output=keep_path,
        )
        if sol.status == -1:
            raise IntegrationFailure(sol.message)
        hit = [(te[0], k) for k, te in enumerate(sol.t_events) if len(te)]
        if not hit:
            raise EscapeDetected(f"no boundary reached within time {max_time:g}")
        te, k = min(hit)
        z = sol.y_events[k][0]
        if keep_path:
            for t in np.linspace(0.0, te, 40)[1:]:
                path.append(sol.sol(t)[:3])
        y, w = project_to_ellipsoid(family, z[:3], z[3:])
        b = betas[k]
        # Newton along the normal of the curve within the surface to sit on Q_b
        for _ in range(3):
            g = family.quadric(b, y)
            m = family.gradient(b, y)
            n = inv_a * y
            m = m - np.dot(m, n) / np.dot(n, n) * n
            y = y - g * m / np.dot(m, family.gradient(b, y))
            y, w = project_to_ellipsoid(family, y, w)
        m = family.gradient(b, y)
        n = inv_a * y
        m = m - np.dot(m, n) / np.dot(n, n) * n
        wm = np.dot(w, m)
        if abs(wm) < GRAZING_TOL * np.linalg.norm(m) * np.linalg.norm(w):
            raise GrazingIncidence("geodesic grazes the boundary curve")
        w_out = w - 2.0 * wm / np.dot(m, m) * m
        w_out = w_out / np.linalg.norm(w_out)
        lam = elliptic_coordinates(family, y)
        s = family.band(b)
        before = elliptic_coordinates(family, y - 1e-5 * w)
        after = elliptic_coordinates(family, y + 1e-5 * w_out)
        cls = classify_reflection(before, lam, after, s)
        bounces.append(BounceRecord(y, b, cls, s, k))
        verts.append(y)
        dirs.append(w_out)
        x, v = y, w_out
    traj = Trajectory(family, verts, dirs, bounces, np.array([caustic, 0.0]))
    traj.path = path
    return traj
