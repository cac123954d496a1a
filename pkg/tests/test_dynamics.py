import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poncelet.confocal import ConfocalFamily
from poncelet.dynamics import (
    Domain,
    classify_reflection,
    detect_period,
    geodesic_billiard_on_ellipsoid,
    play_ordered_game,
    reflect,
    simulate,
    surface_caustic,
    trace_segment,
    validate_signature,
)
from poncelet.errors import (
    EscapeDetected,
    GrazingIncidence,
    InflectionAmbiguous,
    InvalidSignature,
    PointNotOnQuadric,
)
from poncelet.search import geodesic_start

FAM2 = ConfocalFamily((4.0, 1.0))
FAM3 = ConfocalFamily((9.0, 4.0, 1.0))


def test_reflect_at_vertex_of_ellipse():
    out = reflect(FAM2, 0.0, (2.0, 0.0), np.array([-1.0, 1.0]) / math.sqrt(2))
    assert np.allclose(out, np.array([1.0, 1.0]) / math.sqrt(2), atol=1e-15)


def test_reflect_rejects_bad_input():
    with pytest.raises(PointNotOnQuadric):
        reflect(FAM2, 0.0, (1.0, 0.0), (1.0, 0.0))
    with pytest.raises(GrazingIncidence):
        reflect(FAM2, 0.0, (2.0, 0.0), (0.0, 1.0))


@given(st.floats(0.0, 2 * math.pi), st.floats(0.0, 2 * math.pi))
def test_reflect_is_an_isometric_involution(t, phi):
    p = np.array([2.0 * math.cos(t), math.sin(t)])
    v = np.array([math.cos(phi), math.sin(phi)])
    n = p / FAM2.arr
    if abs(v @ n) < 1e-3 * np.linalg.norm(n):
        return
    w = reflect(FAM2, 0.0, p, v)
    assert np.linalg.norm(w) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(reflect(FAM2, 0.0, p, w), v, atol=1e-12)


def test_trace_segment_axial_hit():
    y, lam, s, _ = trace_segment(Domain.inside(FAM2), (0.0, 0.0), (1.0, 0.0))
    assert np.allclose(y, (2.0, 0.0), atol=1e-14)
    assert lam == 0.0 and s == 2


def test_trace_segment_escape_with_short_length():
    with pytest.raises(EscapeDetected):
        trace_segment(Domain.inside(FAM2), (0.0, 0.0), (1.0, 0.0), max_length=1.0)


def test_classify_reflection():
    assert classify_reflection(0.3, 0.5, 0.3, 1) == "outside"
    assert classify_reflection(0.5, 0.3, 0.5, 1) == "inside"
    with pytest.raises(InflectionAmbiguous):
        classify_reflection(0.3, 0.4, 0.5, 1)


def test_simulate_shape_and_caustic_conservation():
    dom = Domain.inside(FAM3)
    traj = simulate(dom, (0.5, 0.3, 0.2), (0.6, 0.64, 0.48), 50)
    assert len(traj.vertices) == 51 and traj.num_bounces == 50
    caus = traj.segment_caustics()
    assert np.max(np.abs(caus - caus[0])) < 1e-9
    for b in traj.bounces:
        assert FAM3.quadric(0.0, b.vertex) == pytest.approx(0.0, abs=1e-12)


def test_axial_orbit_has_period_two():
    traj = simulate(Domain.inside(FAM2), (0.0, 0.0), (1.0, 0.0), 4)
    traj.vertices[0] = traj.vertices[2].copy()
    traj.directions[0] = traj.directions[2].copy()
    assert detect_period(traj) == 2


def test_signature_rule():
    assert validate_signature((0.5, 0.2), (-1, 1))
    assert not validate_signature((0.5, 0.2), (-1, -1))
    assert not validate_signature((0.2, 0.5), (-1, 1))


def test_ordered_game_reports_bad_index():
    with pytest.raises(InvalidSignature) as err:
        play_ordered_game(FAM2, (0.5, 0.2), (-1, -1), (0.0, 0.0), (1.0, 0.0), 1)
    assert "index 0" in str(err.value)


def test_ordered_game_conserves_caustic():
    fam = ConfocalFamily((1.1, 1.0))
    traj = play_ordered_game(fam, (0.0, 0.5), (1, -1), (0.0, 0.3), (1.0, 0.1), 20)
    caus = traj.segment_caustics()
    assert np.max(np.abs(caus - caus[0])) < 1e-9
    kinds = traj.classifications()
    assert kinds[0::2] == ["inside"] * 20 and kinds[1::2] == ["outside"] * 20


def test_geodesic_billiard_stays_on_surface():
    fam = ConfocalFamily((4.0, 2.0, 1.0))
    x, v = geodesic_start(fam, 1.3, 1.45)
    traj = geodesic_billiard_on_ellipsoid(fam, (1.3,), x, v, 6)
    c0 = surface_caustic(fam, traj.vertices[0], traj.directions[0])
    assert c0 == pytest.approx(1.45, abs=1e-9)
    for p, w in zip(traj.vertices, traj.directions):
        assert fam.quadric(0.0, p) == pytest.approx(0.0, abs=1e-9)
        assert fam.quadric(1.3, p) == pytest.approx(0.0, abs=1e-9)
        assert surface_caustic(fam, p, w) == pytest.approx(c0, abs=1e-7)
