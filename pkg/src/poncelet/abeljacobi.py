"""Real Abel-Jacobi integrals on y^2 = P(x) with real, simple branch values.

Only the real part of the Jacobian is modelled.  For the real trajectories
handled here every integral is real, and the period lattice that matters is
the Z-span of the real cycles: twice the integral over each bounded interval
where ``P >= 0``.  Cycles around intervals where ``P < 0`` have purely
imaginary periods and drop out.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import roots_legendre

from .confocal import AdmissiblePolynomial, ConfocalFamily
from .errors import DegenerateCurve, IntervalCrossesNegativeRegion, NoValidMuPair

QUAD_TOL = 1e-14
LATTICE_REL_EPS = 1e-6

THEOREM3_NOTES = (
    "bounce counts are indexed 1..d-2 in the statement but summed over s = 1..d-1; "
    "all constrained coordinates are summed here",
    "the upper endpoint point is written P_{beta''_s} in the statement; it is read as P_{gamma''_s}",
)
SUBGROUP_NOTE = (
    "'a sum of several expressions' is implemented as membership in the lattice "
    "extended by same-type caustic differences with bounded integer coefficients"
)


@dataclass(frozen=True)
class HyperellipticCurve:
    poly: AdmissiblePolynomial

    def __post_init__(self):
        r = self.branch
        scale = max(1.0, float(np.max(np.abs(r))))
        if len(r) > 1 and np.min(np.diff(r)) < 1e-12 * scale:
            raise DegenerateCurve(f"coincident branch values in {r}")

    @property
    def branch(self) -> np.ndarray:
        return self.poly.sorted_roots()

    @property
    def degree(self) -> int:
        return self.poly.degree

    @property
    def genus(self) -> int:
        return (self.degree - 1) // 2

    def __call__(self, x):
        return self.poly(x)

    def positive_intervals(self) -> list:
        """Bounded intervals between consecutive branch values where P > 0."""
        r = self.branch
        return [(float(u), float(w)) for u, w in zip(r[:-1], r[1:]) if self.poly(0.5 * (u + w)) > 0]


def gamma_curve(family: ConfocalFamily, caustics) -> HyperellipticCurve:
    """y^2 = (a_1-x)...(a_d-x)(alpha_1-x)...(alpha_{d-1}-x)."""
    return HyperellipticCurve(AdmissiblePolynomial(tuple(family.a) + tuple(float(c) for c in caustics)))


def gamma1_curve(family: ConfocalFamily, caustics) -> HyperellipticCurve:
    """y^2 = -x(a_1-x)...(a_d-x)(alpha_1-x)...(alpha_{d-2}-x)."""
    return HyperellipticCurve(AdmissiblePolynomial((0.0,) + tuple(family.a) + tuple(float(c) for c in caustics)))


_GL_CACHE: dict = {}


def _gauss(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = roots_legendre(n)
    return _GL_CACHE[n]


def _interval_integrals(curve: HyperellipticCurve, js: Sequence[int], u: float, w: float, tol: float) -> np.ndarray:
    """int_u^w x^j dx / sqrt(P) for u < w, with P >= 0 on [u, w].

    Substituting x = m + h sin(theta) cancels inverse-square-root endpoint
    singularities; the factors belonging to endpoint roots are evaluated in a
    cancellation-free form.
    """
    roots = sorted(curve.poly.roots)
    m, h = 0.5 * (u + w), 0.5 * (w - u)
    scale = max(1.0, abs(u), abs(w))
    # nearest branch value on each side; x - r_u = 2h sh^2 + (u - r_u) and
    # r_w - x = 2h ch^2 + (r_w - w) stay cancellation-free near the endpoints
    below = [k for k, r in enumerate(roots) if r <= u + 1e-13 * scale]
    above = [k for k, r in enumerate(roots) if r >= w - 1e-13 * scale]
    ku = below[-1] if below else None
    kw = above[0] if above else None
    if ku is not None and ku == kw:
        # sub-tolerance interval at one root: it belongs to the nearer end
        if abs(roots[ku] - u) <= abs(roots[kw] - w):
            kw = above[1] if len(above) > 1 else None
        else:
            ku = below[-2] if len(below) > 1 else None
    du = max(u - roots[ku], 0.0) if ku is not None else None
    dw = max(roots[kw] - w, 0.0) if kw is not None else None
    # a branch value just outside an endpoint leaves a near-singular peak that
    # quadrature cannot resolve; extend to the root and subtract the short piece
    if du is not None and 0.0 < du <= h:
        r = float(roots[ku])
        return _interval_integrals(curve, js, r, w, tol) - _interval_integrals(curve, js, r, u, tol)
    if dw is not None and 0.0 < dw <= h:
        r = float(roots[kw])
        return _interval_integrals(curve, js, u, r, tol) - _interval_integrals(curve, js, w, r, tol)
    rest = [r for k, r in enumerate(roots) if k not in (ku, kw)]

    def evaluate(n):
        t, wt = _gauss(n)
        phi = 0.5 * math.pi * (t + 1.0)  # theta + pi/2 in [0, pi]
        sh, ch = np.sin(0.5 * phi), np.cos(0.5 * phi)
        x = m - h * np.cos(phi)
        prod = np.ones_like(x)
        for r in rest:
            prod = prod * (r - x)
        jac = h * np.sin(phi)  # dx/dtheta = h cos(theta) = h sin(phi)
        if du == 0.0 and dw == 0.0:
            # sqrt((x - u)(w - x)) = 2h sh ch = h sin(phi): cancels the Jacobian
            core = 1.0 / np.sqrt(-prod)
        else:
            if du is not None:
                prod = prod * -(2.0 * h * sh * sh + du)
            if dw is not None:
                prod = prod * (2.0 * h * ch * ch + dw)
            core = jac / np.sqrt(prod)
        factor = 0.5 * math.pi
        return np.array([factor * np.sum(wt * core * x ** j) for j in js])

    n = 16
    prev = evaluate(n)
    while n < 8192:
        n *= 2
        cur = evaluate(n)
        if np.all(np.abs(cur - prev) <= tol * (1.0 + np.abs(cur))):
            return cur
        prev = cur
    return cur


def incomplete_integral(curve: HyperellipticCurve, j, x_from: float, x_to: float, sheet: int = 1, tol: float = QUAD_TOL):
    """sheet * int_{x_from}^{x_to} x^j dx / sqrt(P(x)); ``j`` may be an int or a sequence."""
    scalar = np.isscalar(j)
    js = [j] if scalar else list(j)
    if x_from == x_to:
        out = np.zeros(len(js))
        return float(out[0]) if scalar else out
    u, w = (x_from, x_to) if x_from < x_to else (x_to, x_from)
    sign = (1.0 if sheet >= 0 else -1.0) * (1.0 if x_from < x_to else -1.0)
    scale = max(1.0, abs(u), abs(w))
    inner = [r for r in curve.poly.roots if u + 1e-13 * scale < r < w - 1e-13 * scale]
    if inner or curve.poly(0.5 * (u + w)) < 0:
        raise IntervalCrossesNegativeRegion(f"P changes sign or is negative on [{u}, {w}]")
    out = sign * _interval_integrals(curve, js, u, w, tol)
    return float(out[0]) if scalar else out


def real_part_integral(curve: HyperellipticCurve, js: Sequence[int], x_from: float, x_to: float) -> np.ndarray:
    """Real part of int x^j dx/y along the real segment; pieces with P < 0 contribute i*R and are dropped."""
    if x_from == x_to:
        return np.zeros(len(js))
    u, w = sorted((x_from, x_to))
    sign = 1.0 if x_from < x_to else -1.0
    cuts = [u] + [float(r) for r in curve.branch if u < r < w] + [w]
    out = np.zeros(len(js))
    for p, q in zip(cuts[:-1], cuts[1:]):
        if curve.poly(0.5 * (p + q)) > 0:
            out += _interval_integrals(curve, js, p, q, QUAD_TOL)
    return sign * out


@dataclass
class PeriodLattice:
    generators: np.ndarray  # rows are generator vectors
    intervals: list
    cond: float = 0.0

    @property
    def shortest(self) -> float:
        return float(np.min(np.linalg.norm(self.generators, axis=1)))


def real_period_lattice(curve: HyperellipticCurve, js: Optional[Sequence[int]] = None, allow_high_genus: bool = False) -> PeriodLattice:
    """Real cycles 2*int over each bounded positive interval."""
    g = curve.genus
    if g > 2 and not allow_high_genus:
        raise ValueError(f"lattice decisions are restricted to genus <= 2 (got {g}); pass allow_high_genus=True")
    if js is None:
        js = list(range(g))
    ivs = curve.positive_intervals()
    gens = np.array([2.0 * _interval_integrals(curve, js, u, w, QUAD_TOL) for u, w in ivs])
    cond = float(np.linalg.cond(gens)) if gens.shape[0] == gens.shape[1] else float("nan")
    return PeriodLattice(gens, ivs, cond)


@dataclass
class MembershipResult:
    accepted: bool
    coefficients: list
    residual: float
    threshold: float


def lattice_membership(
    generators,
    v,
    max_coeff: int = 6,
    eps: Optional[float] = None,
) -> MembershipResult:
    """Closest combination sum c_i gen_i to ``v`` with |c_i| <= max_coeff.

    A basis of ``g`` well-conditioned generators is picked; coefficients of the
    remaining generators are enumerated exhaustively and basis coefficients
    are searched in a unit box around the real solution.
    """
    G = np.atleast_2d(np.asarray(generators, dtype=float))
    v = np.asarray(v, dtype=float)
    m, g = G.shape
    if eps is None:
        eps = LATTICE_REL_EPS * float(np.min(np.linalg.norm(G, axis=1)))
    best = (math.inf, [0] * m)
    if m == 0:
        r = float(np.linalg.norm(v))
        return MembershipResult(r < eps, [], r, eps)
    # choose basis rows greedily by conditioning
    basis = None
    for combo in itertools.combinations(range(m), min(g, m)):
        sub = G[list(combo)]
        sv = np.linalg.svd(sub, compute_uv=False)
        c = sv[-1] / sv[0] if sv[0] > 0 else 0.0
        if basis is None or c > basis[1]:
            basis = (list(combo), c)
    bidx = basis[0]
    others = [i for i in range(m) if i not in bidx]
    B = G[bidx]
    rng = range(-max_coeff, max_coeff + 1)
    for extra in itertools.product(rng, repeat=len(others)):
        w = v - (np.array(extra) @ G[others] if others else 0.0)
        c_real, *_ = np.linalg.lstsq(B.T, w, rcond=None)
        base = np.floor(c_real).astype(int)
        for delta in itertools.product((0, 1), repeat=len(bidx)):
            c = base + np.array(delta)
            if np.any(np.abs(c) > max_coeff):
                continue
            r = float(np.linalg.norm(w - c @ B))
            if r < best[0]:
                coeffs = [0] * m
                for k, i in enumerate(bidx):
                    coeffs[i] = int(c[k])
                for k, i in enumerate(others):
                    coeffs[i] = int(extra[k])
                best = (r, coeffs)
    return MembershipResult(best[0] < eps, best[1], best[0], eps)


@dataclass
class CheckReport:
    condition: str
    accepted: bool
    residual: float
    threshold: float
    vector: list
    coefficients: list
    generators: list
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "decision": "satisfied" if self.accepted else "not-satisfied",
            "accepted": self.accepted,
            "residual": self.residual,
            "threshold": self.threshold,
            "vector": list(self.vector),
            "coefficients": list(self.coefficients),
            "generators": [list(g) for g in self.generators],
            "notes": list(self.notes),
        }


def _default_max_coeff(counts_total: int) -> int:
    return max(2, 2 * counts_total)


def _finish(name, v, gens, max_coeff, notes=(), eps=None) -> CheckReport:
    gens = np.atleast_2d(gens)
    if eps is None:
        eps = LATTICE_REL_EPS * float(np.min(np.linalg.norm(gens, axis=1)))
    res = lattice_membership(gens, v, max_coeff, eps)
    return CheckReport(name, res.accepted, res.residual, res.threshold, [float(x) for x in v],
                       res.coefficients, gens.tolist(), list(notes))


def _range_vector(curve: HyperellipticCurve, ranges, counts, js, reduced: bool) -> np.ndarray:
    g = curve.genus
    v = np.zeros(g)
    for s, ((lo, hi), n) in enumerate(zip(ranges, counts), start=1):
        if n == 0:
            continue
        sheet = -1 if s % 2 else 1  # (-1)^s
        # A(P_lo) - A(P_hi) on sheet (-1)^s
        part = incomplete_integral(curve, js, hi, lo, sheet=sheet)
        if reduced:
            v[1:] += n * part
        else:
            v += n * part
    return v


def theorem1_check(curve: HyperellipticCurve, ranges, counts, max_coeff: Optional[int] = None) -> CheckReport:
    """sum_s n_s (A(P_gamma'_s) - A(P_gamma''_s)) on the real period lattice."""
    counts = [int(n) for n in counts]
    if max_coeff is None:
        max_coeff = _default_max_coeff(sum(counts))
    js = list(range(curve.genus))
    v = _range_vector(curve, ranges, counts, js, reduced=False)
    lat = real_period_lattice(curve)
    return _finish("theorem1", v, lat.generators, max_coeff)


def theorem3_check(curve: HyperellipticCurve, ranges, counts, max_coeff: Optional[int] = None) -> CheckReport:
    """Reduced map on y^2 = P_1: first component identically zero, then int x^j dx/y, j >= 1."""
    counts = [int(n) for n in counts]
    if max_coeff is None:
        max_coeff = _default_max_coeff(sum(counts))
    js = list(range(1, curve.genus))
    v = _range_vector(curve, ranges, counts, js, reduced=True)
    lat = real_period_lattice(curve)
    return _finish("theorem3", v, lat.generators, max_coeff, THEOREM3_NOTES)


def same_type_pairs(family: ConfocalFamily, caustics) -> list:
    c = [float(x) for x in caustics]
    return [(c[p], c[q]) for p in range(len(c)) for q in range(p + 1, len(c)) if family.band(c[p]) == family.band(c[q])]


def _pair_generators(curve, family, caustics, js, reduced):
    out = []
    for p, q in same_type_pairs(family, caustics):
        w = real_part_integral(curve, js, q, p)
        vec = np.zeros(curve.genus)
        if reduced:
            vec[1:] = w
        else:
            vec[:] = w
        if np.linalg.norm(vec) > 0:
            out.append(vec)
    return out


def theorem2_check(
    curve: HyperellipticCurve,
    family: ConfocalFamily,
    betas: Sequence[float],
    sig: Sequence[int],
    caustics,
    max_coeff: Optional[int] = None,
) -> CheckReport:
    """sum_s i_s (A(P_beta_s) - A(P_alpha)), alpha = min{a_d, alpha_j}, modulo the lattice and same-type pairs."""
    k = len(betas)
    if max_coeff is None:
        max_coeff = _default_max_coeff(k)
    alpha = min([family.a[-1]] + [float(c) for c in caustics])
    js = list(range(curve.genus))
    v = np.zeros(curve.genus)
    for b, i in zip(betas, sig):
        v += i * incomplete_integral(curve, js, alpha, float(b), sheet=1)
    lat = real_period_lattice(curve)
    extra = _pair_generators(curve, family, caustics, js, reduced=False)
    gens = np.vstack([lat.generators] + extra) if extra else lat.generators
    notes = [SUBGROUP_NOTE] if extra else []
    eps = LATTICE_REL_EPS * lat.shortest
    return _finish("theorem2", v, gens, max_coeff, notes, eps)


@dataclass(frozen=True)
class DivisorValue:
    """Formal sum of curve points keyed by abscissa (branch points only here)."""

    terms: tuple  # ((x, coeff), ...)

    @property
    def degree(self) -> int:
        return sum(c for _, c in self.terms)

    def abel(self, curve: HyperellipticCurve, js, base: float) -> np.ndarray:
        out = np.zeros(len(js))
        for x, c in self.terms:
            out += c * real_part_integral(curve, js, base, x)
        return out


def find_mu_pair(S: Sequence[float], betas: Sequence[float]) -> tuple:
    """Consecutive elements mu' < mu'' of S with every beta in [mu', mu'']."""
    s = sorted(float(x) for x in S)
    lo, hi = min(betas), max(betas)
    for u, w in zip(s[:-1], s[1:]):
        if u <= lo and hi <= w:
            return u, w
    raise NoValidMuPair(f"no consecutive pair of {s} brackets all betas {list(betas)}")


def divisor_table(sig: Sequence[int], betas: Sequence[float], mu_prime: float, mu_double_prime: float) -> list:
    k = len(sig)
    out = []
    for s in range(k):
        i, j = sig[s], sig[(s + 1) % k]
        b, bn = betas[s], betas[(s + 1) % k]
        if i == 1 and j == 1:
            terms = ((mu_double_prime, 1),)
        elif i == -1 and j == -1:
            terms = ((mu_prime, 1),)
        elif b == bn:
            raise ValueError(f"divisor undefined for mixed signs with equal betas at index {s}")
        elif (i == 1 and b < bn) or (i == -1 and b > bn):
            terms = ()
        elif i == 1:  # b > bn
            terms = ((mu_double_prime, 1), (mu_prime, -1))
        else:  # i == -1, b < bn
            terms = ((mu_prime, 1), (mu_double_prime, -1))
        out.append(DivisorValue(terms))
    return out


def theorem4_check(
    curve: HyperellipticCurve,
    family: ConfocalFamily,
    betas: Sequence[float],
    sig: Sequence[int],
    caustics,
    max_coeff: Optional[int] = None,
) -> CheckReport:
    """sum_s i_s (A~(P_beta_s) - A~(D_s)) on y^2 = P_1, modulo lattice and same-type pairs."""
    k = len(betas)
    if max_coeff is None:
        max_coeff = _default_max_coeff(k)
    S = list(family.a) + [float(c) for c in caustics]
    mu1, mu2 = find_mu_pair(S, betas)
    table = divisor_table(sig, betas, mu1, mu2)
    js = list(range(1, curve.genus))
    v = np.zeros(curve.genus)
    for b, i, D in zip(betas, sig, table):
        v[1:] += i * (real_part_integral(curve, js, mu1, float(b)) - D.abel(curve, js, mu1))
    lat = real_period_lattice(curve)
    extra = _pair_generators(curve, family, caustics, js, reduced=True)
    gens = np.vstack([lat.generators] + extra) if extra else lat.generators
    notes = [SUBGROUP_NOTE] if extra else []
    eps = LATTICE_REL_EPS * lat.shortest
    return _finish("theorem4", v, gens, max_coeff, notes, eps)
