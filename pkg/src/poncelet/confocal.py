"""Confocal quadrics, Jacobi elliptic coordinates and caustics of lines.

A family is fixed by ``a_1 > ... > a_d > 0``; its members are

    Q_lam : sum_i x_i^2 / (a_i - lam) = 1.

Elliptic coordinates of a point are the ``d`` values of ``lam`` for which the
point lies on ``Q_lam``.  They are the eigenvalues of ``diag(a) - x x^T``
(a rank-one downdate, so Cauchy interlacing is automatic).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    ConvergenceFailure,
    DegenerateLine,
    NegativeRadicand,
    NonFiniteInput,
    RootIsolationFailure,
)

RESIDUAL_TOL = 1e-10
LEMMA1_SLACK = 1e-9


def scaled_tolerance(base: float, precision_bits: int = 53) -> float:
    """Scale a double-precision tolerance as 2^(-p/2) relative to p = 53."""
    return base * 2.0 ** (-(precision_bits - 53) / 2)


@dataclass(frozen=True)
class ConfocalFamily:
    a: tuple

    def __init__(self, a: Sequence[float]):
        a = tuple(float(v) for v in a)
        if len(a) < 2:
            raise ValueError("need d >= 2 semi-axis parameters")
        if not all(math.isfinite(v) for v in a):
            raise NonFiniteInput("semi-axis parameters must be finite")
        if not all(a[i] > a[i + 1] for i in range(len(a) - 1)) or a[-1] <= 0:
            raise ValueError(f"need a_1 > ... > a_d > 0, got {a}")
        object.__setattr__(self, "a", a)

    @property
    def d(self) -> int:
        return len(self.a)

    @property
    def arr(self) -> np.ndarray:
        return np.asarray(self.a)

    def quadric(self, lam: float, x) -> float:
        """Value of sum x_i^2/(a_i - lam) - 1 (zero on Q_lam, negative inside)."""
        x = np.asarray(x, dtype=float)
        return float(np.sum(x * x / (self.arr - lam)) - 1.0)

    def gradient(self, lam: float, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return 2.0 * x / (self.arr - lam)

    def band(self, lam: float) -> int:
        """1-based index s with a_{s+1} < lam <= a_s (a_{d+1} = -inf).

        Values above a_1 get 0 (empty quadric)."""
        if lam > self.a[0]:
            return 0
        for s in range(self.d - 1, 0, -1):
            if lam <= self.a[s - 1] and lam > self.a[s]:
                return s
        return self.d

    def is_ellipsoid(self, lam: float) -> bool:
        return lam < self.a[-1]


def caustic_type(family: ConfocalFamily, alpha: float) -> int:
    """Band of {-inf, a_d, ..., a_1} containing ``alpha``."""
    return family.band(alpha)


def _secular(a: np.ndarray, x2: np.ndarray, lam: float) -> tuple[float, float]:
    r = 1.0 / (a - lam)
    return float(np.sum(x2 * r) - 1.0), float(np.sum(x2 * r * r))


def _polish(a: np.ndarray, x2: np.ndarray, lam0: float, lo: float, hi: float) -> float:
    # safeguarded Newton on the increasing secular function inside (lo, hi)
    lam = min(max(lam0, lo), hi)
    if not lo < lam < hi:
        lam = 0.5 * (lo + hi)
    for _ in range(100):
        f, df = _secular(a, x2, lam)
        if f == 0.0:
            return lam
        if f > 0:
            hi = lam
        else:
            lo = lam
        step = f / df
        new = lam - step
        if not lo < new < hi:
            new = 0.5 * (lo + hi)
        if abs(new - lam) <= 4e-16 * max(1.0, abs(lam)):
            return new
        lam = new
    f, _ = _secular(a, x2, lam)
    if abs(f) > 1e-8:
        raise ConvergenceFailure(f"elliptic coordinate did not converge (residual {f:g})")
    return lam


def elliptic_coordinates(family: ConfocalFamily, point) -> np.ndarray:
    """Jacobi elliptic coordinates lam_1 > ... > lam_d of ``point``.

    Components with ``x_i == 0`` give the exact degenerate value ``a_i``.
    """
    x = np.asarray(point, dtype=float)
    if x.shape != (family.d,):
        raise ValueError(f"point must have {family.d} components")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("point has non-finite components")
    a = family.arr
    nz = x != 0.0
    out = [a[i] for i in range(family.d) if not nz[i]]
    if nz.any():
        an, xn = a[nz], x[nz]
        x2 = xn * xn
        guesses = np.sort(np.linalg.eigvalsh(np.diag(an) - np.outer(xn, xn)))[::-1]
        floor = an[-1] - float(np.sum(x2)) - 1.0
        for k, g in enumerate(guesses):
            hi = an[k]
            lo = an[k + 1] if k + 1 < len(an) else floor
            out.append(_polish(an, x2, float(g), float(lo), float(hi)))
    return np.sort(np.asarray(out, dtype=float))[::-1]


def cartesian_from_elliptic(family: ConfocalFamily, coords, signs=None, tol: float = 1e-12) -> np.ndarray:
    """Inverse coordinate map; ``signs`` picks the orthant (default all +)."""
    a = family.arr
    lam = np.asarray(coords, dtype=float)
    d = family.d
    if signs is None:
        signs = np.ones(d)
    signs = np.where(np.asarray(signs, dtype=float) < 0, -1.0, 1.0)
    x = np.empty(d)
    scale = max(1.0, abs(a[0]))
    for i in range(d):
        num = np.prod(a[i] - lam)
        den = np.prod([a[i] - a[j] for j in range(d) if j != i])
        q = num / den
        if q < -tol * scale ** d:
            raise NegativeRadicand(f"x_{i + 1}^2 = {q:g} < 0; coordinates violate interlacing")
        x[i] = signs[i] * math.sqrt(max(q, 0.0))
    return x


def caustic_polynomial(family: ConfocalFamily, base, direction) -> np.ndarray:
    """Ascending coefficients (in alpha) of the tangency polynomial.

    F(alpha) = -sum_i v_i^2 prod_{k!=i}(a_k - alpha)
               + sum_{i<j} (b_i v_j - b_j v_i)^2 prod_{k!=i,j}(a_k - alpha)
    """
    a = family.arr
    b = np.asarray(base, dtype=float)
    v = np.asarray(direction, dtype=float)
    d = family.d
    lin = [np.array([ak, -1.0]) for ak in a]

    def prod_except(skip):
        p = np.array([1.0])
        for k in range(d):
            if k not in skip:
                p = npoly.polymul(p, lin[k])
        return p

    F = np.zeros(d)
    for i in range(d):
        F = npoly.polyadd(F, -v[i] ** 2 * prod_except({i}))
    for i in range(d):
        for j in range(i + 1, d):
            m = b[i] * v[j] - b[j] * v[i]
            F = npoly.polyadd(F, m * m * prod_except({i, j}))
    return F


def caustic_parameters(family: ConfocalFamily, base, direction) -> np.ndarray:
    """Parameters of the d-1 confocal quadrics tangent to the line base + t*direction."""
    v = np.asarray(direction, dtype=float)
    b = np.asarray(base, dtype=float)
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(b))):
        raise NonFiniteInput("line data must be finite")
    nv = np.linalg.norm(v)
    if nv == 0.0:
        raise DegenerateLine("direction is zero")
    v = v / nv
    b = b - np.dot(b, v) * v  # foot of the perpendicular from the origin
    F = caustic_polynomial(family, b, v)
    if family.d == 2:
        roots = np.array([-F[0] / F[1]])
    else:
        roots = np.real(npoly.polyroots(F))
        dF = npoly.polyder(F)
        for k in range(len(roots)):
            r = roots[k]
            for _ in range(3):
                dv = npoly.polyval(r, dF)
                if dv == 0.0:
                    break
                step = npoly.polyval(r, F) / dv
                if not math.isfinite(step) or abs(step) > 1e-6 * max(1.0, abs(r)):
                    break
                r -= step
            roots[k] = r
    if not np.all(np.isfinite(roots)):
        raise RootIsolationFailure("caustic roots not finite")
    return np.sort(roots)[::-1]


@dataclass(frozen=True)
class AdmissiblePolynomial:
    """P(x) = prod_r (r - x) over ``roots`` (with multiplicity)."""

    roots: tuple

    def __call__(self, x):
        out = 1
        for r in self.roots:
            out = out * (r - x)
        return out

    @property
    def degree(self) -> int:
        return len(self.roots)

    def coeffs(self) -> np.ndarray:
        """Ascending float coefficients."""
        c = np.array([1.0])
        for r in self.roots:
            c = npoly.polymul(c, np.array([float(r), -1.0]))
        return c

    def coeffs_mp(self, ctx=None) -> list:
        """Ascending coefficients in the current mpmath precision."""
        import mpmath

        mp = ctx or mpmath.mp
        c = [mp.mpf(1)]
        for r in self.roots:
            r = mp.mpf(r)
            nxt = [mp.mpf(0)] * (len(c) + 1)
            for k, ck in enumerate(c):
                nxt[k] += r * ck
                nxt[k + 1] -= ck
            c = nxt
        return c

    def sorted_roots(self) -> np.ndarray:
        return np.sort(np.asarray([float(r) for r in self.roots]))


def _root_value(c):
    # keep arbitrary-precision caustics intact, normalize everything else to float
    return c if type(c).__module__.startswith("mpmath") else float(c)


def admissibility_polynomial(family: ConfocalFamily, caustics) -> AdmissiblePolynomial:
    """(a_1-x)...(a_d-x)(alpha_1-x)...(alpha_{d-1}-x)."""
    return AdmissiblePolynomial(tuple(family.a) + tuple(_root_value(c) for c in caustics))


def constrained_polynomial(family: ConfocalFamily, caustics) -> AdmissiblePolynomial:
    """-x(a_1-x)...(a_d-x)(alpha_1-x)...(alpha_{d-2}-x), the curve of billiards on Q_0."""
    return AdmissiblePolynomial((0.0,) + tuple(family.a) + tuple(_root_value(c) for c in caustics))


def check_lemma1(coords, poly: AdmissiblePolynomial, slack: float = LEMMA1_SLACK) -> bool:
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    return all(poly(float(l)) >= -slack for l in coords)


def tangent_direction(family: ConfocalFamily, point, caustics, signs=None) -> np.ndarray:
    """Unit direction at ``point`` whose line is tangent to the given caustics.

    In the orthonormal frame of normals to the coordinate quadrics through the
    point the squared components are
        c_s^2 = prod_j (alpha_j - lam_s) / prod_{r != s} (lam_r - lam_s),
    which sum to one.  ``signs`` chooses the orientation of each component.
    """
    x = np.asarray(point, dtype=float)
    lam = elliptic_coordinates(family, x)
    a = family.arr
    d = family.d
    alpha = np.asarray(caustics, dtype=float)
    if signs is None:
        signs = np.ones(d)
    v = np.zeros(d)
    for s in range(d):
        c2 = np.prod(alpha - lam[s]) / np.prod([lam[r] - lam[s] for r in range(d) if r != s])
        if c2 < -1e-9:
            raise NegativeRadicand(f"point is not reachable with these caustics (c_{s + 1}^2 = {c2:g})")
        n = x / (a - lam[s])
        nn = np.linalg.norm(n)
        if nn == 0.0 or not np.isfinite(nn):
            raise NegativeRadicand("point lies on a coordinate hyperplane; frame undefined")
        v += (1.0 if signs[s] >= 0 else -1.0) * math.sqrt(max(c2, 0.0)) * n / nn
    return v / np.linalg.norm(v)
