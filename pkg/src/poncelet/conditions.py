"""Determinant and rank criteria built from Taylor data of sqrt(P).

Matrices hold Taylor coefficients instead of derivatives; the factor r! per
row is a positive row scaling and cannot move a vanishing locus or a rank.
Every decision is taken at ``prec`` bits and repeated at ``2*prec`` bits; the
report is *certified* when both agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import mpmath
from mpmath import mp

from .confocal import (
    AdmissiblePolynomial,
    ConfocalFamily,
    admissibility_polynomial,
    constrained_polynomial,
)
from .errors import (
    BranchPointCenter,
    HypothesisViolated,
    InsufficientOrder,
    NegativeDiscriminant,
)
from .series import (
    DEFAULT_PREC,
    TruncatedSeries,
    mobius_substitute,
    recenter,
    sqrt_of_poly,
)

SATISFIED = "satisfied"
NOT_SATISFIED = "not-satisfied"
VACUOUS = "vacuous"
EXPANSION_PREC = 1024


@dataclass(frozen=True)
class PencilDiscriminant:
    """Cubic Delta(x) = det(C + x Gamma), ascending coefficients."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(self.coeffs)
        if len(c) > 4:
            raise ValueError("discriminant has degree <= 3")
        if all(float(x) == 0.0 for x in c):
            raise ValueError("discriminant is identically zero")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_conics(cls, C, Gamma) -> "PencilDiscriminant":
        """Interpolate det(C + x Gamma) from four exact evaluations."""
        with mpmath.workprec(256):
            Cm, Gm = mp.matrix(C), mp.matrix(Gamma)
            xs = [0, 1, 2, 3]
            vals = [mp.det(Cm + x * Gm) for x in xs]
            V = mp.matrix([[mp.mpf(x) ** j for j in range(4)] for x in xs])
            sol = mp.lu_solve(V, mp.matrix(vals))
            return cls(tuple(float(sol[j]) for j in range(4)))

    @classmethod
    def from_polynomial(cls, poly: AdmissiblePolynomial) -> "PencilDiscriminant":
        if any(isinstance(r, mpmath.mpf) for r in poly.roots):
            # exact expansion of high-precision roots
            with mpmath.workprec(EXPANSION_PREC):
                return cls(tuple(poly.coeffs_mp()))
        return cls(tuple(float(c) for c in poly.coeffs()))

    def coeffs_mp(self):
        return [mp.mpf(c) for c in self.coeffs]

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc


def confocal_discriminant(family: ConfocalFamily, alpha: float) -> PencilDiscriminant:
    """Planar adapter: Delta(x) = (a_1 - x)(a_2 - x)(alpha - x)."""
    if family.d != 2:
        raise ValueError("pencil adapter is planar")
    return PencilDiscriminant.from_polynomial(admissibility_polynomial(family, [alpha]))


def mobius_discriminant(family: ConfocalFamily, alpha: float) -> PencilDiscriminant:
    """Planar adapter sending the caustic point to infinity.

    With xt = 1/(alpha - x) the curve y^2 = (a_1-x)(a_2-x)(alpha-x) becomes
    yt^2 = xt (1 + (a_1-alpha) xt)(1 + (a_2-alpha) xt), and the boundary
    Q_beta sits at xt = 1/(alpha - beta).  Unlike ``confocal_discriminant``
    this form is correct for polygons with an odd number of sides.
    """
    if family.d != 2:
        raise ValueError("pencil adapter is planar")
    if isinstance(alpha, mpmath.mpf):
        with mpmath.workprec(EXPANSION_PREC):
            u, w = family.a[0] - alpha, family.a[1] - alpha
            return PencilDiscriminant((0.0, 1.0, u + w, u * w))
    u, w = family.a[0] - alpha, family.a[1] - alpha
    return PencilDiscriminant((0.0, 1.0, u + w, u * w))


def mobius_parameters(alpha: float, betas: Sequence[float]) -> list:
    """Pencil parameters 1/(alpha - beta) matching ``mobius_discriminant``."""
    if isinstance(alpha, mpmath.mpf):
        with mpmath.workprec(EXPANSION_PREC):
            return [1 / (alpha - b) for b in betas]
    return [1.0 / (alpha - b) for b in betas]


@dataclass
class RankResult:
    rank: int
    residual: float
    certified: bool
    singular_values: list


@dataclass
class ConditionReport:
    condition: str
    inputs: dict
    decision: str
    residual: float
    certified: bool
    precision_bits: int
    matrix: Optional[list] = None
    rank: Optional[int] = None
    notes: list = field(default_factory=list)

    @property
    def satisfied(self) -> bool:
        return self.decision == SATISFIED

    def to_dict(self, include_matrix: bool = True) -> dict:
        out = {
            "condition": self.condition,
            "inputs": self.inputs,
            "decision": self.decision,
            "residual": _num(self.residual, self.precision_bits),
            "certified": self.certified,
            "precision_bits": self.precision_bits,
        }
        if self.rank is not None:
            out["rank"] = self.rank
        if include_matrix and self.matrix is not None:
            out["matrix"] = [[_num(x, self.precision_bits) for x in row] for row in self.matrix]
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _num(x, prec):
    if prec > 53:
        return mpmath.nstr(mp.mpf(x), max(17, int(prec * 0.30103)), strip_zeros=False) if isinstance(x, mpmath.mpf) else repr(float(x))
    return float(x)


def _as_matrix(rows):
    return mp.matrix([[mp.mpf(x) for x in r] for r in rows])


def scaled_det(rows) -> object:
    """|det| divided by the product of row norms (Hadamard bound), in [0, 1]."""
    M = _as_matrix(rows)
    norms = [mp.sqrt(mp.fsum(M[i, j] ** 2 for j in range(M.cols))) for i in range(M.rows)]
    if any(n == 0 for n in norms):
        return mp.mpf(0)
    return abs(mp.det(M)) / mp.fprod(norms)


def _rank_at(rows, prec):
    with mpmath.workprec(prec):
        M = _as_matrix(rows)
        if M.rows == 0 or M.cols == 0:
            return 0, mp.mpf(0), []
        sv = sorted((abs(s) for s in mp.svd_r(M, compute_uv=False)), reverse=True)
        smax = sv[0]
        eps = mp.mpf(2) ** (-prec / 2)
        if smax == 0:
            return 0, mp.mpf(0), sv
        r = sum(1 for s in sv if s > eps * smax)
        nxt = sv[r] / smax if r < len(sv) else mp.mpf(0)
        return r, max(nxt, mp.mpf(2) ** (-prec)), sv


def rank_decision(matrix, prec: int = DEFAULT_PREC) -> RankResult:
    """Numerical rank with eps = 2^(-p/2) relative to sigma_max, certified against 2p bits.

    ``matrix`` is a list of rows or a callable ``prec -> rows`` that rebuilds
    the entries at the requested precision.
    """
    build = matrix if callable(matrix) else (lambda _p: matrix)
    r1, res1, sv = _rank_at(build(prec), prec)
    r2, _, _ = _rank_at(build(2 * prec), 2 * prec)
    return RankResult(r1, float(res1), r1 == r2, [float(s) for s in sv])


def _det_decision(build: Callable, prec: int):
    """(decision, residual, certified, rows) for a square determinant test."""

    def decide(p):
        with mpmath.workprec(p):
            rows = build(p)
            if rows is None:
                return SATISFIED, mp.mpf(0), None
            res = scaled_det(rows)
            return (SATISFIED if res < mp.mpf(2) ** (-p / 2) else NOT_SATISFIED), res, rows

    d1, r1, rows = decide(prec)
    d2, _, _ = decide(2 * prec)
    return d1, r1, d1 == d2, rows


def _sqrt_delta(delta, lam, prec):
    with mpmath.workprec(prec):
        val = delta(mp.mpf(lam))
        if val < 0:
            raise NegativeDiscriminant(f"Delta({lam}) = {mpmath.nstr(val, 8)} < 0")
        return mp.sqrt(val)


def lebesgue_matrix(delta: PencilDiscriminant, lambdas: Sequence[float], prec: int = DEFAULT_PREC) -> list:
    k = len(lambdas)
    p = k // 2
    nsq = p - 1 if k % 2 else p - 2
    rows = []
    with mpmath.workprec(prec):
        for lam in lambdas:
            lm = mp.mpf(lam)
            sq = _sqrt_delta(delta, lam, prec)
            rows.append([lm ** j for j in range(p + 1)] + [lm ** j * sq for j in range(nsq + 1)])
    return rows


def lebesgue_condition(delta: PencilDiscriminant, lambdas: Sequence[float], prec: int = DEFAULT_PREC) -> ConditionReport:
    """Poncelet polygon inscribed in one conic with sides touching conics lambda_1..lambda_k."""
    k = len(lambdas)
    if k < 2:
        raise ValueError("need k >= 2")
    inputs = {"lambdas": [float(x) for x in lambdas], "delta": [float(c) for c in delta.coeffs]}
    for lam in lambdas:
        _sqrt_delta(delta, lam, prec)
    if len(set(float(x) for x in lambdas)) < k:
        return ConditionReport("lebesgue", inputs, SATISFIED, 0.0, True, prec, notes=["repeated lambda: two equal rows"])
    d, res, cert, rows = _det_decision(lambda p: lebesgue_matrix(delta, lambdas, p), prec)
    return ConditionReport("lebesgue", inputs, d, res, cert, prec, rows)


def _poly_taylor(coeffs_fn, center, order, prec):
    return recenter(coeffs_fn(), center, order, prec)


def _xpow_series(j: int, center, order: int, prec: int) -> TruncatedSeries:
    with mpmath.workprec(prec):
        c = mp.mpf(center)
        return TruncatedSeries(c, [mp.binomial(j, r) * c ** (j - r) if r <= j else 0 for r in range(order + 1)], prec)


def corollary1_matrix(delta: PencilDiscriminant, gamma: float, m: int, prec: int = DEFAULT_PREC, branch_at_gamma: int = 1) -> list:
    """2m x 2m matrix: Taylor orders 0..m-1 at x = 0 and x = gamma of
    f_j = x^j (0 <= j <= m) and f_{m+i} = x^(i-1) sqrt(Delta) (1 <= i <= m-1)."""
    order = m - 1
    rows = []
    with mpmath.workprec(prec):
        for center, sign in ((0, 1), (gamma, branch_at_gamma)):
            sq = sqrt_of_poly(delta.coeffs_mp(), center, sign, order, prec)
            cols = [_xpow_series(j, center, order, prec) for j in range(m + 1)]
            cols += [_xpow_series(i - 1, center, order, prec) * sq for i in range(1, m)]
            for r in range(m):
                rows.append([col.coeffs[r] for col in cols])
    return rows


def corollary1_condition(
    delta: PencilDiscriminant, gamma: float, m: int, prec: int = DEFAULT_PREC, branch_at_gamma: int = 1
) -> ConditionReport:
    """Closed 2m-gon bouncing m times on each of two conics of the pencil (centers 0 and gamma)."""
    if m < 1:
        raise ValueError("m >= 1")
    inputs = {"gamma": float(gamma), "m": m, "delta": [float(c) for c in delta.coeffs], "branch_at_gamma": branch_at_gamma}
    for c in (0.0, gamma):
        if float(delta(c)) <= 0:
            raise BranchPointCenter(f"Delta({c}) <= 0")
    if gamma == 0:
        return ConditionReport("corollary1", inputs, SATISFIED, 0.0, True, prec, notes=["gamma = 0: row blocks coincide"])
    d, res, cert, rows = _det_decision(lambda p: corollary1_matrix(delta, gamma, m, p, branch_at_gamma), prec)
    return ConditionReport("corollary1", inputs, d, res, cert, prec, rows)


def corollary1_determinant(delta: PencilDiscriminant, gamma: float, m: int, prec: int = DEFAULT_PREC, branch_at_gamma: int = 1):
    with mpmath.workprec(prec):
        return mp.det(_as_matrix(corollary1_matrix(delta, gamma, m, prec, branch_at_gamma)))


def example1_matrix(B: TruncatedSeries, C: TruncatedSeries, gamma, variant: str = "printed") -> list:
    """The explicit 3x3 matrix for four alternating bounces on each conic.

    ``B`` expands sqrt(Delta) about gamma, ``C`` about 0.  ``variant="printed"``
    reproduces the published entries verbatim.  ``variant="derived"`` is the
    reduction of the generic 8x8 determinant obtained by subtracting from each
    sqrt column its Taylor polynomial at 0, scaling the rows at gamma by
    gamma^r and taking rows R1 - 4R0, R2 - 6R0, R3 - 4R0; it differs from the
    printed entries in X_21 (5 C_2), X_22 (5 C_1) and X_33 (2 B_2).
    """
    if variant not in ("printed", "derived"):
        raise ValueError("variant is 'printed' or 'derived'")
    if B.order < 3 or C.order < 3:
        raise InsufficientOrder("need Taylor coefficients up to order 3")
    fix = variant == "derived"
    with mpmath.workprec(max(B.prec, C.prec)):
        g = mp.mpf(gamma)
        B0, B1, B2, B3 = B.coeffs[:4]
        C0, C1, C2, C3 = C.coeffs[:4]
        g2, g3 = g * g, g ** 3
        return [
            [
                -4 * B0 + B1 * g + 4 * C0 + 3 * C1 * g + 2 * C2 * g2 + C3 * g3,
                -3 * B0 + B1 * g + 3 * C0 + 2 * C1 * g + C2 * g2,
                -2 * B0 + B1 * g + 2 * C0 + C1 * g,
            ],
            [
                -6 * B0 + B2 * g2 + 6 * C0 + 6 * C1 * g + (5 if fix else 4) * C2 * g2 + 3 * C3 * g3,
                -6 * B0 + B1 * g + B2 * g2 + 6 * C0 + (5 if fix else 4) * C1 * g + 3 * C2 * g2,
                -5 * B0 + 2 * B1 * g + B2 * g2 + 5 * C0 + 3 * C1 * g,
            ],
            [
                -4 * B0 + B3 * g3 + 4 * C0 + 4 * C1 * g + 4 * C2 * g2 + 3 * C3 * g3,
                -4 * B0 + B2 * g2 + B3 * g3 + 4 * C0 + 4 * C1 * g + 3 * C2 * g2,
                -4 * B0 + B1 * g + (2 if fix else 1) * B2 * g2 + B3 * g3 + 4 * C0 + 3 * C1 * g,
            ],
        ]


def example1_determinant(
    delta: PencilDiscriminant, gamma: float, prec: int = DEFAULT_PREC, branch_at_gamma: int = 1, variant: str = "printed"
):
    with mpmath.workprec(prec):
        C = sqrt_of_poly(delta.coeffs_mp(), 0, 1, 3, prec)
        B = sqrt_of_poly(delta.coeffs_mp(), gamma, branch_at_gamma, 3, prec)
        return mp.det(_as_matrix(example1_matrix(B, C, gamma, variant)))


def example1_condition(
    delta: PencilDiscriminant, gamma: float, prec: int = DEFAULT_PREC, branch_at_gamma: int = 1, variant: str = "printed"
) -> ConditionReport:
    """det X = 0 for the explicit 3x3 matrix, decided on the Hadamard-scaled determinant."""

    def build(p):
        with mpmath.workprec(p):
            C = sqrt_of_poly(delta.coeffs_mp(), 0, 1, 3, p)
            B = sqrt_of_poly(delta.coeffs_mp(), gamma, branch_at_gamma, 3, p)
            return example1_matrix(B, C, gamma, variant)

    inputs = {"delta": [float(c) for c in delta.coeffs], "gamma": float(gamma),
              "branch_at_gamma": branch_at_gamma, "variant": variant}
    d, res, cert, rows = _det_decision(build, prec)
    notes = ["printed entries X21, X22, X33 differ from the reduction of the m = 4 determinant"] if variant == "printed" else []
    return ConditionReport("example1", inputs, d, res, cert, prec, rows, notes=notes)


def _rank_report(name, inputs, build, ncols, prec, notes=()) -> ConditionReport:
    rr = rank_decision(build, prec)
    decision = SATISFIED if rr.rank < ncols else NOT_SATISFIED
    # distance from the deficient locus: the ncols-th singular value, relative
    sv = rr.singular_values
    residual = sv[ncols - 1] / sv[0] if len(sv) >= ncols and sv[0] > 0 else 0.0
    with mpmath.workprec(prec):
        rows = build(prec)
    return ConditionReport(name, inputs, decision, residual, rr.certified, prec, rows, rr.rank, list(notes))


def prop1_matrix(poly: AdmissiblePolynomial, d: int, beta1: float, beta2: float, m: int, prec: int, denominator: str = "literal") -> list:
    """(m-1) x (m-d+1) Taylor coefficients (orders 1..m-1) at P_beta2 of
    f_j = (y - B_0 - ... - B_{d+j-2}(x-beta1)^{d+j-2}) / D^{d+j-1},
    D = x (literal) or x - beta1 (shifted); y expanded on the sheet of the
    involuted point of P_beta1."""
    ncols = m - d + 1
    N = m - 1
    top = d + ncols - 2
    with mpmath.workprec(prec):
        b1, b2 = mp.mpf(beta1), mp.mpf(beta2)
        coeffs = poly.coeffs_mp()
        B = sqrt_of_poly(coeffs, b1, -1, max(top, 0), prec)
        Y2 = sqrt_of_poly(coeffs, b2, 1, N, prec)
        shift = b1 if denominator == "shifted" else mp.mpf(0)
        if denominator not in ("literal", "shifted"):
            raise ValueError("denominator is 'literal' or 'shifted'")
        cols = []
        for j in range(1, ncols + 1):
            deg = d + j - 2
            # Taylor polynomial of y at beta1, in powers of (x - beta1), re-expanded at beta2
            T = [mp.mpf(0)] * (N + 1)
            for n in range(deg + 1):
                ser = _xpow_series(n, b2 - b1, N, prec)  # (x - beta1)^n about x - beta1 = beta2 - beta1
                for r in range(N + 1):
                    T[r] += B.coeffs[n] * ser.coeffs[r]
            num = Y2 - TruncatedSeries(b2, T, prec)
            den = _xpow_series(d + j - 1, b2 - shift, N, prec)
            den = TruncatedSeries(b2, den.coeffs, prec)
            f = num / den
            cols.append(f.coeffs[1 : N + 1])
        return [[cols[c][r] for c in range(ncols)] for r in range(N)]


def prop1_condition(
    family: ConfocalFamily,
    beta1: float,
    beta2: float,
    caustics,
    m: int,
    prec: int = DEFAULT_PREC,
    denominator: str = "literal",
) -> ConditionReport:
    """Closed trajectory bouncing m times on each of two confocal ellipsoids."""
    d = family.d
    poly = admissibility_polynomial(family, caustics)
    inputs = {
        "a": list(family.a), "beta1": float(beta1), "beta2": float(beta2),
        "caustics": [float(c) for c in caustics], "m": m, "denominator": denominator,
    }
    ncols = m - d + 1
    if ncols <= 0 or m < 2:
        return ConditionReport("prop1", inputs, VACUOUS, 0.0, True, prec, notes=["m < d: no columns"])
    for b in (beta1, beta2):
        if poly(float(b)) <= 0:
            raise BranchPointCenter(f"P({b}) <= 0")
    build = lambda p: prop1_matrix(poly, d, beta1, beta2, m, p, denominator)
    return _rank_report("prop1", inputs, build, ncols, prec)


def prop2_shape(k: int) -> tuple:
    """(first index, rows, columns) of the Hankel block for period k."""
    p = k // 2
    if k % 2 == 0:
        return p + 1, p, p - 2
    return p + 1, p, p - 1


def prop2_matrix_from_coeffs(C: Sequence, k: int) -> list:
    first, nrows, ncols = prop2_shape(k)
    return [[C[first + i + c] for c in range(ncols)] for i in range(nrows)]


def prop2_condition(
    a: Sequence[float], gamma: float, alpha: float, k: int, prec: int = DEFAULT_PREC, weight: int = 0
) -> ConditionReport:
    """k-periodic billiard on Q_0 bounded by Q_gamma with caustic Q_alpha (d = 3)."""
    a = [float(x) for x in a]
    if len(a) != 3:
        raise ValueError("prop2 is stated for d = 3")
    if not (a[2] < gamma < alpha < a[1]):
        raise HypothesisViolated(f"need a_3 < gamma < alpha < a_2, got {a[2]}, {gamma}, {alpha}, {a[1]}")
    inputs = {"a": a, "gamma": float(gamma), "alpha": float(alpha), "k": k, "weight": weight}
    first, nrows, ncols = prop2_shape(k)
    if ncols <= 0:
        return ConditionReport("prop2", inputs, VACUOUS, 0.0, True, prec, notes=["matrix has no columns"])
    poly = constrained_polynomial(ConfocalFamily(a), [alpha])
    N = first + nrows + ncols

    def build(p):
        C = mobius_substitute(poly, alpha, gamma, N, p, 1, weight)
        return prop2_matrix_from_coeffs(C.coeffs, k)

    return _rank_report("prop2", inputs, build, ncols, prec)
