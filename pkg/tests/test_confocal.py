import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poncelet.confocal import (
    ConfocalFamily,
    admissibility_polynomial,
    cartesian_from_elliptic,
    caustic_parameters,
    check_lemma1,
    elliptic_coordinates,
    tangent_direction,
)
from poncelet.errors import NonFiniteInput


def test_family_rejects_unordered_axes():
    with pytest.raises(ValueError):
        ConfocalFamily((1.0, 2.0))
    with pytest.raises(NonFiniteInput):
        ConfocalFamily((float("nan"), 1.0))


def test_elliptic_coordinates_closed_form():
    lam = elliptic_coordinates(ConfocalFamily((3.0, 1.0)), (1.0, 1.0))
    assert lam[0] == pytest.approx(1 + math.sqrt(2), abs=1e-13)
    assert lam[1] == pytest.approx(1 - math.sqrt(2), abs=1e-13)


@given(
    st.floats(-2.5, 2.5).filter(lambda v: abs(v) > 1e-3),
    st.floats(-1.8, 1.8).filter(lambda v: abs(v) > 1e-3),
    st.floats(-0.9, 0.9).filter(lambda v: abs(v) > 1e-3),
)
def test_elliptic_coordinates_roundtrip(x, y, z):
    fam = ConfocalFamily((9.0, 4.0, 1.0))
    p = np.array([x, y, z])
    lam = elliptic_coordinates(fam, p)
    a = fam.arr
    assert a[1] <= lam[0] <= a[0] and a[2] <= lam[1] <= a[1] and lam[2] <= a[2]
    for l in lam:
        assert fam.quadric(l, p) == pytest.approx(0.0, abs=1e-9)
    back = cartesian_from_elliptic(fam, lam, signs=np.sign(p))
    assert np.allclose(back, p, atol=1e-7)


def test_caustic_of_horizontal_chord():
    fam = ConfocalFamily((3.0, 1.0))
    alpha = caustic_parameters(fam, (0.0, 0.5), (1.0, 0.0))
    assert alpha[0] == pytest.approx(0.75, abs=1e-12)


def test_admissibility_polynomial_value():
    poly = admissibility_polynomial(ConfocalFamily((9.0, 4.0, 1.0)), (6.0, 2.0))
    assert poly(0.0) == pytest.approx(432.0)
    assert poly.degree == 5


def test_lemma1_holds_along_line():
    fam = ConfocalFamily((2.0, 0.5))
    x, v = np.array([0.3, 0.1]), np.array([0.6, 0.8])
    poly = admissibility_polynomial(fam, caustic_parameters(fam, x, v))
    for t in np.linspace(-1.0, 1.0, 21):
        assert check_lemma1(elliptic_coordinates(fam, x + t * v), poly)
    with pytest.raises(ValueError):
        check_lemma1([0.0, 0.0], poly, slack=-1.0)


@given(st.floats(-math.pi, math.pi), st.floats(0.1, math.pi - 0.1))
def test_tangent_direction_reproduces_caustics(phi, theta):
    fam = ConfocalFamily((9.0, 4.0, 1.0))
    point = np.array([1.0, 0.7, 0.3])
    v0 = np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
    caus = caustic_parameters(fam, point, v0)
    v = tangent_direction(fam, point, caus)
    assert np.linalg.norm(v) == pytest.approx(1.0)
    assert np.allclose(np.sort(caustic_parameters(fam, point, v)), np.sort(caus), atol=1e-7)
