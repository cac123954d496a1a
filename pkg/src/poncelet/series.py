"""Truncated power series with mpmath coefficients.

Everything here runs at an explicit working precision ``prec`` (bits); the
coefficients of a series are stored as ``mpf`` values created at that
precision and all arithmetic re-enters ``mpmath.workprec(prec)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mp

from .errors import (
    BranchPointCenter,
    CenterMismatch,
    DivisionByZeroConstantTerm,
    SubstitutionPole,
)

DEFAULT_PREC = 256
GUARD_BITS = 32


@dataclass(frozen=True)
class TruncatedSeries:
    center: object
    coeffs: tuple
    prec: int = DEFAULT_PREC

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise ValueError("series needs at least one coefficient")
        with mpmath.workprec(self.prec):
            object.__setattr__(self, "center", mp.mpf(self.center))
            object.__setattr__(self, "coeffs", tuple(mp.mpf(c) for c in self.coeffs))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, i):
        return self.coeffs[i]

    def _check(self, other: "TruncatedSeries"):
        if self.order != other.order:
            raise ValueError("orders differ")
        with mpmath.workprec(max(self.prec, other.prec)):
            if self.center != other.center:
                raise CenterMismatch(f"centers {self.center} and {other.center} differ")

    def _new(self, coeffs):
        return TruncatedSeries(self.center, coeffs, self.prec)

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self._new((self.coeffs[0] + other,) + self.coeffs[1:])
        self._check(other)
        with mpmath.workprec(self.prec):
            return self._new([u + w for u, w in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return self._new([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            with mpmath.workprec(self.prec):
                return self._new([c * other for c in self.coeffs])
        self._check(other)
        n = self.order
        u, w = self.coeffs, other.coeffs
        with mpmath.workprec(self.prec):
            out = [mp.fsum(u[i] * w[k - i] for i in range(k + 1)) for k in range(n + 1)]
        return self._new(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, TruncatedSeries):
            with mpmath.workprec(self.prec):
                return self._new([c / other for c in self.coeffs])
        self._check(other)
        if other.coeffs[0] == 0:
            raise DivisionByZeroConstantTerm("divisor has zero constant term")
        n = self.order
        u, w = self.coeffs, other.coeffs
        with mpmath.workprec(self.prec):
            q = []
            for k in range(n + 1):
                acc = u[k] - mp.fsum(q[i] * w[k - i] for i in range(k))
                q.append(acc / w[0])
        return self._new(q)

    def truncate(self, order: int) -> "TruncatedSeries":
        c = list(self.coeffs[: order + 1]) + [0] * max(0, order - self.order)
        return self._new(c)

    def __call__(self, x):
        """Evaluate the truncated polynomial at ``x`` (absolute abscissa)."""
        with mpmath.workprec(self.prec):
            t = mp.mpf(x) - self.center
            acc = mp.mpf(0)
            for c in reversed(self.coeffs):
                acc = acc * t + c
            return acc

    def floats(self) -> list:
        return [float(c) for c in self.coeffs]


def series_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a + b


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a * b


def series_div(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a / b


def _poly_coeffs(P, prec):
    """Ascending mpf coefficients from a coefficient sequence or an object with ``coeffs_mp``."""
    with mpmath.workprec(prec):
        if hasattr(P, "coeffs_mp"):
            return P.coeffs_mp()
        return [mp.mpf(c) for c in P]


def recenter(P, center, order: int, prec: int = DEFAULT_PREC) -> TruncatedSeries:
    """Taylor coefficients of the polynomial ``P`` about ``center`` (exact shift)."""
    c = _poly_coeffs(P, prec)
    with mpmath.workprec(prec):
        x0 = mp.mpf(center)
        c = list(c)
        n = len(c)
        # repeated synthetic division
        out = []
        for _ in range(n):
            acc = mp.mpf(0)
            nxt = [mp.mpf(0)] * max(0, len(c) - 1)
            for i in range(len(c) - 1, -1, -1):
                acc = acc * x0 + c[i]
                if i > 0:
                    nxt[i - 1] = acc
            out.append(acc)
            c = nxt
            if not c:
                break
        out = out[: order + 1] + [mp.mpf(0)] * max(0, order + 1 - len(out))
    return TruncatedSeries(x0, out, prec)


def series_sqrt(s: TruncatedSeries, sign: int = 1) -> TruncatedSeries:
    """Square root by Newton iteration y <- (y + s/y)/2, doubling the order each pass."""
    c0 = s.coeffs[0]
    if c0 <= 0:
        raise BranchPointCenter(f"constant term {mpmath.nstr(c0, 8)} is not positive")
    N = s.order
    work = s.prec + GUARD_BITS
    with mpmath.workprec(work):
        y = [mp.sqrt(c0) * (1 if sign >= 0 else -1)]
        k = 0
        while k < N:
            k = min(2 * k + 1, N)
            sk = TruncatedSeries(s.center, s.coeffs[: k + 1], work)
            yk = TruncatedSeries(s.center, y + [0] * (k + 1 - len(y)), work)
            yk = (yk + sk / yk) * mp.mpf(0.5)
            y = list(yk.coeffs)
    return TruncatedSeries(s.center, y, s.prec)


def sqrt_of_poly(P, center, sign: int = 1, N: int = 16, prec: int = DEFAULT_PREC, tol=None) -> TruncatedSeries:
    """Taylor expansion of sign*sqrt(P(x)) about ``center`` up to order N."""
    s = recenter(P, center, N, prec)
    with mpmath.workprec(prec):
        if tol is None:
            tol = mp.mpf(2) ** (-prec // 2)
        if s.coeffs[0] <= tol * max(1, max(abs(c) for c in s.coeffs)):
            raise BranchPointCenter(f"P({center}) = {mpmath.nstr(s.coeffs[0], 8)}; center is (near) a branch point")
    return series_sqrt(s, sign)


def compose_poly(P, inner: TruncatedSeries) -> TruncatedSeries:
    """P(inner(t)) by Horner's rule in series arithmetic."""
    c = _poly_coeffs(P, inner.prec)
    acc = TruncatedSeries(inner.center, [0] * (inner.order + 1), inner.prec)
    for ck in reversed(c):
        acc = acc * inner + ck
    return acc


def mobius_substitute(P, alpha, gamma, N: int = 16, prec: int = DEFAULT_PREC, sign: int = 1, weight: int = 0) -> TruncatedSeries:
    """Expansion of y = sign*sqrt(P(x)) in the variable xt = 1/(alpha - x) about xt0 = 1/(alpha - gamma).

    With ``weight = w`` the series of ``xt**w * y`` is returned instead (the
    ordinate of the transformed curve for w = (deg P + 1) // 2).
    """
    with mpmath.workprec(prec):
        alpha = mp.mpf(alpha)
        gamma = mp.mpf(gamma)
        if alpha == gamma:
            raise SubstitutionPole("alpha == gamma sends the center to infinity")
        xt0 = 1 / (alpha - gamma)
        # x(t) = alpha - 1/(xt0 + t) = alpha - (1/xt0) * sum (-t/xt0)^n
        xs = [alpha - 1 / xt0] + [-(1 / xt0) * (-1 / xt0) ** n for n in range(1, N + 1)]
    inner = TruncatedSeries(xt0, xs, prec)
    y = series_sqrt(compose_poly(P, inner), sign)
    if weight:
        xt = TruncatedSeries(xt0, [xt0, 1] + [0] * (N - 1), prec)
        for _ in range(abs(weight)):
            y = y * xt if weight > 0 else y / xt
    return y
