import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poncelet.confocal import ConfocalFamily
from poncelet.dynamics import Domain, play_ordered_game, simulate
from poncelet.search import (
    annulus_targets,
    classify_geodesic,
    rotation_number,
    search_annulus_d3,
    search_period_d2,
)

ELLIPSE = ConfocalFamily((4.0, 1.0))


def test_rotation_number_increases_with_caustic():
    rhos = [rotation_number(ELLIPSE, al) for al in (0.2, 0.5, 0.8, 0.95)]
    assert rhos == sorted(rhos) and 0 < rhos[0] and rhos[-1] < 0.5


@pytest.mark.parametrize("n", [3, 4, 5])
def test_period_search_closes(n):
    res = search_period_d2(ELLIPSE, n)
    assert res.found and res.closure_error < 1e-9
    tr = simulate(Domain.inside(ELLIPSE), res.start, res.direction, n)
    assert np.linalg.norm(tr.vertices[n] - tr.vertices[0]) < 1e-8
    assert rotation_number(ELLIPSE, res.caustics[0]) == pytest.approx(1 / n, abs=1e-3)


def test_period_search_rejects_impossible_winding():
    with pytest.raises(ValueError):
        search_period_d2(ELLIPSE, 4, winding=2)


@given(st.integers(2, 9))
def test_annulus_targets_are_even_fractions(m):
    for t1, t2 in annulus_targets(m, ((-2.0, 2.0), (-2.0, 2.0))):
        assert round(t1 * m) % 2 == 0 and round(t2 * m) % 2 == 0
        assert t1 != 0 and t2 != 0


def test_annulus_closure_replays():
    fam = ConfocalFamily((3.0, 2.0, 1.0))
    res = search_annulus_d3(fam, [0.0, 0.9], range(3, 9))
    assert res.found and res.period == 14
    tr = play_ordered_game(fam, [0.0, 0.9], [1, -1], res.start, res.direction, res.period // 2)
    assert np.linalg.norm(tr.vertices[-1] - tr.vertices[0]) < 1e-8


def test_geodesic_classifier_open_point():
    ver = classify_geodesic(ConfocalFamily((4.0, 2.0, 1.0)), 1.3, 1.5)
    assert ver.status in ("open", "abstain") and ver.period is None
    assert set(ver.gaps) == {5, 6, 7, 8} and all(math.isfinite(g) for g in ver.gaps.values())
