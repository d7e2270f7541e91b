import math

import numpy as np
import pytest

from selfsim import words as wd
from selfsim.attractor import (
    IFSystem,
    build_level,
    estimate_diameter,
    level_points,
    make_piece,
    refinement_check,
    root_piece,
    sample_points,
)
from selfsim.errors import IFSValidationError
from selfsim.geometry import similitude_1d


def test_system_validation():
    with pytest.raises(IFSValidationError):
        IFSystem([similitude_1d(0.5, 0.0)])
    with pytest.raises(IFSValidationError):
        IFSystem([similitude_1d(0.5, 0.0), similitude_1d(1.1, 0.5)])


def test_bisection_diameter(bisection):
    est = estimate_diameter(bisection, tol=1e-9)
    assert est.lower <= 1.0 <= est.upper
    assert est.upper - est.lower <= 1e-9
    assert est.lower == pytest.approx(1.0, abs=1e-9)


def test_cantor_diameter(cantor):
    # 0 and 1 are fixed points inside K and [0,1] is invariant, so diam K = 1.
    est = estimate_diameter(cantor, tol=1e-6)
    assert est.lower == pytest.approx(1.0, abs=1e-6)
    assert est.upper == pytest.approx(1.0, abs=1e-6)


def test_gasket_diameter(gasket):
    # The three vertex fixed points realize the diameter of the invariant hull.
    est = estimate_diameter(gasket, tol=1e-6)
    assert est.lower == pytest.approx(1.0, abs=1e-6)
    assert est.upper == pytest.approx(1.0, abs=1e-6)


def test_build_level_cantor(cantor):
    lvl = build_level(cantor, 2)
    assert len(lvl) == 4
    assert [p.word for p in lvl.pieces] == wd.enumerate_level(2, 2)
    for p in lvl.pieces:
        assert p.diameter == pytest.approx(1.0 / 9.0, rel=1e-9)


def test_build_level_bisection_enclosures(bisection):
    lvl = build_level(bisection, 1)
    spans = [
        (p.enclosure.center[0] - p.enclosure.radius, p.enclosure.center[0] + p.enclosure.radius)
        for p in lvl.pieces
    ]
    assert spans[0][0] <= 0.0 and spans[0][1] >= 0.5
    assert spans[1][0] <= 0.5 and spans[1][1] >= 1.0


def test_build_level_gasket(gasket):
    lvl = build_level(gasket, 1)
    assert len(lvl) == 3
    for p in lvl.pieces:
        assert p.diameter == pytest.approx(0.5, rel=1e-6)


def test_sample_points_bisection(bisection):
    pts = sample_points(bisection, root_piece(bisection), 1).ravel()
    assert sorted(pts) == pytest.approx([0.0, 0.5])


def test_sample_points_cantor_piece1(cantor):
    # f1(f1(0)) = 0 and f1(f2(0)) = 2/9 with f2 = (x+2)/3.
    p1 = make_piece(cantor, (1,))
    pts = sorted(sample_points(cantor, p1, 1).ravel())
    assert pts == pytest.approx([0.0, 2.0 / 9.0])


def test_samples_inside_enclosure(gasket):
    piece = make_piece(gasket, (2, 3))
    pts = sample_points(gasket, piece, 3)
    dist = np.linalg.norm(pts - piece.enclosure.center, axis=1)
    assert (dist <= piece.enclosure.radius + 1e-9).all()


def test_sample_net_property(cantor, gasket):
    # A depth-q sample is a (ratio * max_ratio^q * diam)-net of the piece:
    # much deeper samples never stray farther than that from it.
    for ifs in (cantor, gasket):
        piece = make_piece(ifs, (1, 2))
        q = 2
        net = piece.ratio * ifs.max_ratio**q * ifs.diameter_upper
        coarse = sample_points(ifs, piece, q)
        fine = sample_points(ifs, piece, q + 3)
        dists = np.linalg.norm(fine[:, None, :] - coarse[None, :, :], axis=2).min(axis=1)
        assert float(dists.max()) <= net + 1e-12


def test_refinement_check(cantor, gasket, duplicate_cantor):
    assert refinement_check(cantor, 1)
    assert refinement_check(gasket, 3)
    assert refinement_check(duplicate_cantor, 2)


def test_child_diameter_ratio(cantor, gasket):
    for ifs in (cantor, gasket):
        parent = make_piece(ifs, (1, 2))
        for j in range(1, ifs.k + 1):
            child = make_piece(ifs, (1, 2, j))
            expected = ifs.maps[j - 1].scale * parent.diameter
            assert child.diameter == pytest.approx(expected, rel=1e-12)


def test_enclosure_nesting(gasket, cantor, squares):
    for ifs in (gasket, cantor, squares):
        for word in [(1,), (2, 1), (1, 2, ifs.k)]:
            parent = make_piece(ifs, word)
            for j in range(1, ifs.k + 1):
                child = make_piece(ifs, word + (j,))
                gap = np.linalg.norm(child.enclosure.center - parent.enclosure.center)
                assert gap + child.enclosure.radius <= parent.enclosure.radius + 1e-9


def test_level_sum_constancy_at_alpha(cantor, gasket):
    # Sum of diam(piece)^alpha over a level equals diam(K)^alpha at the
    # similarity dimension: the geometric factor is exactly 1.
    for ifs, alpha in ((cantor, math.log(2) / math.log(3)), (gasket, math.log(3) / math.log(2))):
        target = ifs.diameter_upper**alpha
        for n in (1, 2, 3):
            total = sum(p.diameter**alpha for p in build_level(ifs, n).pieces)
            assert total == pytest.approx(target, rel=1e-9)


def test_max_piece_diameter_law(cantor):
    for n in (1, 2, 4):
        lvl = build_level(cantor, n)
        expected = cantor.max_ratio**n * cantor.diameter_upper
        assert max(p.diameter for p in lvl.pieces) == pytest.approx(expected, rel=1e-12)


def test_level_points_lexicographic(bisection):
    pts = level_points(bisection, 2).ravel()
    assert pts == pytest.approx([0.0, 0.25, 0.5, 0.75])


def test_squares_diameter(squares):
    est = squares.diameter_bounds
    assert est.lower == pytest.approx(math.sqrt(2.0), abs=1e-9)
    assert est.upper == pytest.approx(math.sqrt(2.0), abs=1e-9)
