import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selfsim.geometry import (
    Similitude,
    approx_equal,
    identity,
    rotation_2d,
    similitude_1d,
    similitude_2d,
)

finite = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)
scales = st.floats(min_value=0.1, max_value=0.9)
angles = st.floats(min_value=-360.0, max_value=360.0, allow_nan=False)


@st.composite
def similitudes_2d(draw):
    return similitude_2d(
        draw(scales),
        (draw(finite), draw(finite)),
        rotation_deg=draw(angles),
        reflect=draw(st.booleans()),
    )


def test_apply_1d():
    f = similitude_1d(0.5, 0.0)
    assert f.apply([1.0])[0] == pytest.approx(0.5)


def test_apply_mattila_map():
    x3 = np.array([0.5, 1.0 / (2.0 * math.sqrt(3))])
    f = similitude_2d(1.0 / 3.0, (2.0 / 3.0) * x3)
    image = f.apply((0.0, 0.0))
    assert image == pytest.approx([1.0 / 3.0, 1.0 / (3.0 * math.sqrt(3))])


def test_fixed_point_identity():
    f = similitude_2d(0.4, (0.3, -0.2), rotation_deg=37.0)
    x = f.fixed_point()
    assert f.apply(x) == pytest.approx(x, abs=1e-12)


def test_compose_with_identity():
    f = similitude_2d(0.5, (0.1, 0.2), rotation_deg=90.0)
    g = f.compose(identity(2))
    assert approx_equal(f, g, 1e-12)
    assert approx_equal(identity(2).compose(f), f, 1e-12)


def test_compose_cantor_map_with_itself():
    f = similitude_1d(1.0 / 3.0, 0.0)
    ff = f.compose(f)
    assert ff.scale == pytest.approx(1.0 / 9.0, rel=1e-12)
    assert ff.translation[0] == pytest.approx(0.0, abs=1e-15)


def test_composite_scale_multiplicative():
    maps = [similitude_2d(c, (0.1 * i, 0.0), rotation_deg=10.0 * i) for i, c in enumerate((0.3, 0.5, 0.7, 0.4))]
    comp = identity(2)
    expected = 1.0
    for f in maps:
        comp = comp.compose(f)
        expected *= f.scale
    assert comp.scale == pytest.approx(expected, rel=1e-12)


def test_relative_map_of_itself_is_identity():
    f = similitude_2d(0.6, (0.4, 0.1), rotation_deg=-20.0)
    rel = f.relative_to(f)
    assert approx_equal(rel, identity(2), 1e-12)


def test_relative_map_cancels_one_factor():
    f = similitude_1d(1.0 / 3.0, 0.0)
    rel = f.compose(f).relative_to(f)
    assert approx_equal(rel, f, 1e-12)


def test_approx_equal_requires_closeness():
    f1 = similitude_1d(1.0 / 3.0, 0.0)
    f3 = similitude_1d(1.0 / 3.0, 2.0 / 3.0)
    assert approx_equal(f1, f1, 1e-12)
    assert not approx_equal(f1, f3, 1e-9)


def test_orthogonality_validated():
    with pytest.raises(ValueError):
        Similitude(0.5, np.array([[1.0, 0.5], [0.0, 1.0]]), np.zeros(2))


def test_dimension_mismatch():
    f = similitude_1d(0.5, 0.0)
    with pytest.raises(ValueError):
        f.apply([1.0, 2.0])
    with pytest.raises(ValueError):
        f.compose(similitude_2d(0.5, (0.0, 0.0)))


def test_orthogonal_preserves_norm():
    q = rotation_2d(123.0) @ np.diag([1.0, -1.0])
    rng = np.random.default_rng(7)
    for x in rng.normal(size=(8, 2)):
        assert np.linalg.norm(q @ x) == pytest.approx(np.linalg.norm(x), rel=1e-12)


@settings(max_examples=60)
@given(similitudes_2d(), similitudes_2d(), similitudes_2d())
def test_compose_associative(f, g, h):
    a = f.compose(g).compose(h)
    b = f.compose(g.compose(h))
    assert approx_equal(a, b, 1e-10)


@settings(max_examples=60)
@given(similitudes_2d(), similitudes_2d())
def test_relative_map_inverts_composition(g, h):
    rel = g.compose(h).relative_to(g)
    assert approx_equal(rel, h, 1e-10)


@settings(max_examples=60)
@given(similitudes_2d(), similitudes_2d(), st.tuples(finite, finite))
def test_apply_compose_consistent(f, g, x):
    x = np.array(x)
    assert f.compose(g).apply(x) == pytest.approx(f.apply(g.apply(x)), abs=1e-10)


@settings(max_examples=60)
@given(similitudes_2d(), st.tuples(finite, finite), st.tuples(finite, finite))
def test_distance_scaling(f, x, y):
    x, y = np.array(x), np.array(y)
    before = np.linalg.norm(x - y)
    after = np.linalg.norm(f.apply(x) - f.apply(y))
    assert after == pytest.approx(f.scale * before, rel=1e-10, abs=1e-12)
