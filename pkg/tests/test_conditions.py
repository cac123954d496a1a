import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mp

from poncelet.conditions import (
    PencilDiscriminant,
    confocal_discriminant,
    corollary1_condition,
    corollary1_determinant,
    example1_condition,
    example1_matrix,
    lebesgue_condition,
    lebesgue_matrix,
    mobius_discriminant,
    mobius_parameters,
    prop1_condition,
    prop1_matrix,
    prop2_condition,
    prop2_matrix_from_coeffs,
    rank_decision,
)
from poncelet.confocal import ConfocalFamily, admissibility_polynomial
from poncelet.errors import HypothesisViolated, InsufficientOrder, NegativeDiscriminant
from poncelet.search import refine_game, search_planar_game
from poncelet.series import TruncatedSeries

FAM = ConfocalFamily((4.0, 1.0))


def test_discriminant_from_conics_matches_confocal_adapter():
    # det(diag(1, 2, 3) - x I) = (1 - x)(2 - x)(3 - x)
    delta = PencilDiscriminant.from_conics([[1, 0, 0], [0, 2, 0], [0, 0, 3]], [[-1, 0, 0], [0, -1, 0], [0, 0, -1]])
    assert delta.coeffs == pytest.approx((6.0, -11.0, 6.0, -1.0))
    conf = confocal_discriminant(FAM, 0.5)
    assert float(conf(0.0)) == pytest.approx(4.0 * 1.0 * 0.5)


def test_lebesgue_two_conics_is_difference():
    delta = confocal_discriminant(FAM, 0.5)
    rows = lebesgue_matrix(delta, [0.1, 0.3], 64)
    assert [float(v) for r in rows for v in r] == pytest.approx([1.0, 0.1, 1.0, 0.3])
    assert not lebesgue_condition(delta, [0.1, 0.3]).satisfied
    assert lebesgue_condition(delta, [0.2, 0.2]).satisfied


def test_lebesgue_repeated_lambda_is_satisfied():
    rep = lebesgue_condition(confocal_discriminant(FAM, 0.5), [0.1, 0.2, 0.1, 0.3])
    assert rep.satisfied and rep.residual == 0.0


def test_lebesgue_negative_discriminant():
    with pytest.raises(NegativeDiscriminant):
        lebesgue_condition(confocal_discriminant(FAM, 0.5), [0.1, 0.7])


@pytest.fixture(scope="module")
def closed_triangle():
    betas = [0.0, 0.3, 0.6]
    res = search_planar_game(FAM, betas, [1, 1, 1], 1, 1)
    assert res.found and res.closure_error < 1e-9
    z, _ = refine_game(FAM, betas, [1, 1, 1], 1, res.caustics)
    return betas, z[0]


def test_lebesgue_at_simulated_triangle(closed_triangle):
    betas, alpha = closed_triangle
    rep = lebesgue_condition(mobius_discriminant(FAM, alpha), mobius_parameters(alpha, betas), 256)
    assert rep.satisfied and rep.certified and rep.residual < 1e-20
    for e in (0.05, -0.05):
        shifted = float(alpha) + e
        bad = lebesgue_condition(mobius_discriminant(FAM, shifted), mobius_parameters(shifted, betas), 256)
        assert not bad.satisfied and bad.residual > 1e-6


def test_corollary1_coincident_centers():
    rep = corollary1_condition(confocal_discriminant(FAM, 0.5), 0.0, 3)
    assert rep.satisfied and rep.residual == 0.0


@given(st.floats(0.5, 3.0))
def test_corollary1_determinant_scaling(c):
    # sqrt(c Delta) = sqrt(c) sqrt(Delta) multiplies each of the m - 1 sqrt columns by sqrt(c);
    # the tolerance covers rounding of the scaled double coefficients
    base = PencilDiscriminant((1.0, 0.5, -0.2, 0.01))
    scaled = PencilDiscriminant(tuple(c * v for v in base.coeffs))
    m = 3
    with mpmath.workprec(128):
        d0 = corollary1_determinant(base, 0.4, m, 128)
        d1 = corollary1_determinant(scaled, 0.4, m, 128)
        assert abs(d1 - mp.mpf(c) ** ((m - 1) / mp.mpf(2)) * d0) <= 1e-12 * abs(d1)


def test_example1_degenerate_inputs():
    B = TruncatedSeries(0, [1, 2, 3, 4], 64)
    zero = example1_matrix(B, B, 0)
    assert all(float(v) == 0.0 for r in zero for v in r)
    with pytest.raises(InsufficientOrder):
        example1_matrix(TruncatedSeries(0, [1, 2], 64), B, 0.3)
    with pytest.raises(ValueError):
        example1_matrix(B, B, 0.3, variant="other")


def test_example1_printed_and_derived_disagree():
    delta = confocal_discriminant(ConfocalFamily((1.1, 1.0)), 0.4)
    printed = example1_condition(delta, -20.0, 128, -1)
    derived = example1_condition(delta, -20.0, 128, -1, variant="derived")
    assert printed.notes and not derived.notes
    assert printed.residual != derived.residual


def test_prop1_single_column_when_m_equals_d():
    fam = ConfocalFamily((3.0, 2.0, 1.0))
    poly = admissibility_polynomial(fam, [1.5, 0.95])
    rows = prop1_matrix(poly, 3, 0.0, 0.9, 3, 64)
    assert len(rows) == 2 and all(len(r) == 1 for r in rows)
    assert prop1_condition(fam, 0.0, 0.9, [1.5, 0.95], 2).decision == "vacuous"


def test_rank_identity_rank_one_and_hilbert():
    eye = [[1 if i == j else 0 for j in range(3)] for i in range(3)]
    r = rank_decision(eye, 128)
    assert r.rank == 3 and r.certified
    outer = [[(i + 1) * (j + 2) for j in range(4)] for i in range(4)]
    r1 = rank_decision(outer, 128)
    assert r1.rank == 1 and r1.certified

    def hilbert(p):
        with mpmath.workprec(p):
            return [[mp.mpf(1) / (i + j + 1) for j in range(8)] for i in range(8)]

    assert not rank_decision(hilbert, 64).certified
    high = rank_decision(hilbert, 256)
    assert high.certified and high.rank == 8


@given(st.lists(st.floats(0.1, 10.0), min_size=2, max_size=2))
def test_rank_invariant_under_column_scaling(scales):
    rows = [[1, 2], [2, 4.000001], [3, 6]]
    base = rank_decision(rows, 128).rank
    scaled = [[r[0] * scales[0], r[1] * scales[1]] for r in rows]
    assert rank_decision(scaled, 128).rank == base


def test_prop2_matrix_shape_and_zero_coefficients():
    C = list(range(20))
    assert prop2_matrix_from_coeffs(C, 6) == [[4], [5], [6]]
    assert prop2_matrix_from_coeffs(C, 7) == [[4, 5], [5, 6], [6, 7]]
    zero = rank_decision([[0], [0], [0]], 128)
    assert zero.rank == 0


def test_prop2_hypothesis_and_decision():
    with pytest.raises(HypothesisViolated):
        prop2_condition((4.0, 2.0, 1.0), 1.5, 1.3, 6)
    rep = prop2_condition((4.0, 2.0, 1.0), 1.3, 1.6, 6, 128)
    assert rep.decision in ("satisfied", "not-satisfied") and rep.rank is not None
