import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poncelet.abeljacobi import (
    HyperellipticCurve,
    divisor_table,
    find_mu_pair,
    gamma1_curve,
    gamma_curve,
    incomplete_integral,
    lattice_membership,
    real_period_lattice,
    theorem1_check,
    theorem2_check,
    theorem3_check,
    theorem4_check,
)
from poncelet.confocal import (
    AdmissiblePolynomial,
    ConfocalFamily,
    admissibility_polynomial,
    elliptic_coordinates,
)
from poncelet.dynamics import Domain, lambda_ranges, simulate, winding_counts
from poncelet.errors import (
    DegenerateCurve,
    IntervalCrossesNegativeRegion,
    NoValidMuPair,
)
from poncelet.search import (
    classify_geodesic,
    search_geodesic_closure,
    search_period_d2,
    search_planar_game,
)

SAMPLE = HyperellipticCurve(AdmissiblePolynomial((0.0, 1.0, 2.0, 3.0, 4.0)))


def oracle(curve, j, u, w):
    # tanh-sinh needs extra digits to resolve the inverse-square-root endpoints
    with mpmath.workdps(30):
        f = lambda x: x**j / mpmath.sqrt(curve.poly(x))
        return float(mpmath.quad(f, [u, 0.5 * (u + w), w]))


def test_curve_genus_and_degeneracy():
    assert SAMPLE.genus == 2
    assert gamma1_curve(ConfocalFamily((4.0, 2.0, 1.0)), [1.5]).genus == 2
    with pytest.raises(DegenerateCurve):
        gamma_curve(ConfocalFamily((4.0, 1.0)), [1.0])


def test_incomplete_integral_empty_and_sign_checks():
    assert incomplete_integral(SAMPLE, 0, 1.5, 1.5) == 0.0
    with pytest.raises(IntervalCrossesNegativeRegion):
        incomplete_integral(SAMPLE, 0, 0.5, 1.5)


@pytest.mark.parametrize("j", [0, 1])
def test_incomplete_integral_matches_quadrature(j):
    (u, w), *_ = SAMPLE.positive_intervals()
    for a, b in ((u, w), (u, 0.5 * (u + w)), (u + 0.1, w - 0.2)):
        assert incomplete_integral(SAMPLE, j, a, b) == pytest.approx(oracle(SAMPLE, j, a, b), abs=1e-10)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_incomplete_integral_is_additive(s, t, r):
    (u, w), *_ = SAMPLE.positive_intervals()
    a, b, c = (u + (w - u) * z for z in (s, t, r))
    lhs = incomplete_integral(SAMPLE, [0, 1], a, b) + incomplete_integral(SAMPLE, [0, 1], b, c)
    assert np.allclose(lhs, incomplete_integral(SAMPLE, [0, 1], a, c), atol=1e-12)


def test_genus_one_generator_is_twice_band_integral():
    curve = gamma_curve(ConfocalFamily((4.0, 1.0)), [0.5])
    lat = real_period_lattice(curve)
    (u, w), = lat.intervals
    assert lat.generators[0, 0] == pytest.approx(2 * oracle(curve, 0, u, w), rel=1e-10)


@given(st.floats(0.3, 3.0))
def test_lattice_scaling(c):
    # x -> c x multiplies int x^j dx / sqrt(P) by c^(j + 1 - deg/2)
    roots = (0.2, 1.0, 1.7, 2.5, 4.0)
    base = real_period_lattice(HyperellipticCurve(AdmissiblePolynomial(roots))).generators
    scaled = real_period_lattice(HyperellipticCurve(AdmissiblePolynomial(tuple(c * r for r in roots)))).generators
    for j in range(2):
        assert np.allclose(scaled[:, j], c ** (j + 1 - 2.5) * base[:, j], rtol=1e-9)


def test_lattice_membership_basics():
    G = real_period_lattice(SAMPLE).generators
    zero = lattice_membership(G, np.zeros(2))
    assert zero.accepted and zero.residual == 0.0 and zero.coefficients == [0, 0]
    one = lattice_membership(G, G[0])
    assert one.accepted and one.coefficients == [1, 0]
    half = lattice_membership(G, 0.5 * G[0])
    assert not half.accepted and half.residual >= 0.1 * float(np.linalg.norm(G[0]))


@pytest.fixture(scope="module")
def triangle():
    fam = ConfocalFamily((4.0, 1.0))
    res = search_period_d2(fam, 3)
    assert res.found
    return fam, res


def _theorem1(fam, caustics, x, counts=None, n=3, v=None):
    dom = Domain.inside(fam)
    ranges = lambda_ranges(dom, admissibility_polynomial(fam, caustics), elliptic_coordinates(fam, x))
    if counts is None:
        counts = winding_counts(simulate(dom, x, v, n), ranges, n)
    return theorem1_check(gamma_curve(fam, caustics), ranges, counts), counts


def test_theorem1_zero_counts_accepted(triangle):
    fam, res = triangle
    rep, _ = _theorem1(fam, res.caustics, np.array(res.start), counts=[0, 0])
    assert rep.accepted and rep.residual == 0.0


def test_theorem1_period_three(triangle):
    fam, res = triangle
    x, v = np.array(res.start), np.array(res.direction)
    rep, counts = _theorem1(fam, res.caustics, x, v=v)
    assert rep.accepted and rep.residual < 1e-6
    for e in (0.05, -0.05):
        bad, _ = _theorem1(fam, [res.caustics[0] + e], x, counts=counts)
        assert not bad.accepted


def test_theorem2_single_ellipsoid_reduction(triangle):
    fam, res = triangle
    alpha = res.caustics[0]
    at = theorem2_check(gamma_curve(fam, [alpha]), fam, [0.0] * 3, [1] * 3, [alpha])
    assert at.accepted
    off = theorem2_check(gamma_curve(fam, [alpha + 0.05]), fam, [0.0] * 3, [1] * 3, [alpha + 0.05])
    assert not off.accepted


def test_divisor_table_rows():
    plus = divisor_table([1, 1], [0.0, 0.5], 1.0, 2.0)
    assert all(D.terms == ((2.0, 1),) for D in plus)
    assert divisor_table([-1, -1], [0.5, 0.0], 1.0, 2.0)[0].terms == ((1.0, 1),)
    mixed = divisor_table([1, -1], [0.0, 0.5], 1.0, 2.0)
    assert mixed[0].terms == () and mixed[0].degree == 0


def test_find_mu_pair():
    assert find_mu_pair([4.0, 2.0, 1.0, 1.5], [1.2, 1.4]) == (1.0, 1.5)
    with pytest.raises(NoValidMuPair):
        find_mu_pair([4.0, 2.0, 1.0], [0.5, 1.5])


GEO = ConfocalFamily((4.0, 2.0, 1.0))


def test_theorem3_zero_counts_and_leading_component():
    curve = gamma1_curve(GEO, [1.5])
    ranges = [(2.0, 4.0), (1.3, 1.5)]
    assert theorem3_check(curve, ranges, [0, 0]).accepted
    rep = theorem3_check(curve, ranges, [2, 3])
    assert rep.vector[0] == 0.0


@pytest.fixture(scope="module")
def geodesic_closure():
    res = search_geodesic_closure(GEO, 1.3, 6, -1, (1.35, 1.55))
    assert res.found
    return res.caustics[0]


def test_theorem3_at_geodesic_closure(geodesic_closure):
    alpha = geodesic_closure
    ver = classify_geodesic(GEO, 1.3, alpha, (5, 6, 7, 8))
    assert ver.status == "closed" and ver.period == 6
    ranges = [(2.0, 4.0), (1.3, alpha)]
    rep = theorem3_check(gamma1_curve(GEO, [alpha]), ranges, ver.counts())
    assert rep.accepted and rep.residual < 1e-6
    off = theorem3_check(gamma1_curve(GEO, [alpha + 0.05]), [(2.0, 4.0), (1.3, alpha + 0.05)], ver.counts())
    assert not off.accepted


def test_theorem4_runs_for_single_and_all_minus_signatures():
    curve = gamma1_curve(GEO, [1.5])
    one = theorem4_check(curve, GEO, [1.2], [1], [1.5])
    assert one.vector[0] == 0.0 and math.isfinite(one.residual)
    minus = theorem4_check(curve, GEO, [1.2, 1.3], [-1, -1], [1.5])
    assert math.isfinite(minus.residual)


def test_theorem2_alternating_game_closure():
    fam, betas = ConfocalFamily((1.1, 1.0)), [-20.0, 0.0]
    res = search_planar_game(fam, betas, [1, -1], 3, 1)
    assert res.found
    alpha = res.caustics[0]
    at = theorem2_check(gamma_curve(fam, [alpha]), fam, betas * 3, [1, -1] * 3, [alpha])
    assert at.accepted and at.residual < 1e-6
    for e in (0.05, -0.05):
        off = theorem2_check(gamma_curve(fam, [alpha + e]), fam, betas * 3, [1, -1] * 3, [alpha + e])
        assert not off.accepted
