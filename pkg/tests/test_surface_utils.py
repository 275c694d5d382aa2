import logging
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from src.errors import ConfigurationError, DimensionError
from src.surface_utils import (
    build_surface,
    default_node_count,
    refine_surface,
    surface_l2_norm,
)


def test_circle_four_nodes():
    rule = build_surface("circle", 2, 4)
    expected = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    np.testing.assert_allclose(rule.nodes, expected, atol=1e-15)
    np.testing.assert_allclose(rule.weights, math.pi / 2)
    assert rule.total_measure == pytest.approx(2 * math.pi, rel=1e-15)


def test_sphere_total_measure():
    rule = build_surface("sphere", 3, 100)
    assert rule.total_measure == pytest.approx(4 * math.pi, rel=1e-12)
    np.testing.assert_allclose(np.linalg.norm(rule.nodes, axis=1), 1.0, atol=1e-12)


def test_paraboloid_cap_matches_arc_length():
    rule = build_surface("paraboloid-cap", 2, 64)
    arc_length, _ = quad(lambda t: math.sqrt(1 + t * t), -0.5, 0.5, epsabs=1e-13)
    assert rule.total_measure == pytest.approx(arc_length, rel=1e-3)


def test_planar_cap_in_three_dimensions_rounds_to_square_grid(caplog):
    with caplog.at_level(logging.WARNING):
        rule = build_surface("planar-cap", 3, 50)
    assert rule.M == 64
    assert "using 64 nodes instead of 50" in caplog.text
    assert rule.total_measure == pytest.approx(1.0, rel=1e-12)
    np.testing.assert_array_equal(rule.nodes[:, 2], 0.0)


@pytest.mark.parametrize(
    ("kind", "d", "M"),
    [("circle", 3, 16), ("sphere", 2, 16), ("torus", 2, 16), ("circle", 2, 3)],
)
def test_invalid_surfaces_are_rejected(kind, d, M):
    with pytest.raises(ConfigurationError):
        build_surface(kind, d, M)


@pytest.mark.parametrize("M", [4, 7, 64, 1000])
def test_circle_measure_does_not_depend_on_m(M):
    assert build_surface("circle", 2, M).total_measure == pytest.approx(2 * math.pi)


@pytest.mark.parametrize(
    ("kind", "d"),
    [
        ("circle", 2),
        ("paraboloid-cap", 2),
        ("planar-cap", 2),
        ("sphere", 3),
        ("paraboloid-cap", 3),
        ("planar-cap", 3),
    ],
)
def test_nodes_stay_in_unit_ball(kind, d):
    rule = build_surface(kind, d, 81)
    assert np.max(np.linalg.norm(rule.nodes, axis=1)) <= 1.0
    assert np.all(rule.weights > 0)


def test_l2_norm_of_simple_functions():
    rule = build_surface("circle", 2, 4)
    assert surface_l2_norm(rule, np.zeros(4)) == 0.0
    assert surface_l2_norm(rule, np.ones(4)) == pytest.approx(math.sqrt(2 * math.pi))


def test_l2_norm_matches_reordered_sum(circle32, rng):
    g = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    terms = [float(w * abs(v) ** 2) for w, v in zip(circle32.weights, g, strict=True)]
    reference = math.sqrt(math.fsum(reversed(terms)))
    assert surface_l2_norm(circle32, g) == pytest.approx(reference, rel=1e-12)


def test_l2_norm_rejects_length_mismatch(circle32):
    with pytest.raises(DimensionError):
        surface_l2_norm(circle32, np.ones(31))


@given(
    st.floats(-1e3, 1e3),
    st.floats(-1e3, 1e3),
    st.integers(0, 2**32 - 1),
)
def test_l2_norm_is_absolutely_homogeneous(real, imag, seed):
    rule = build_surface("circle", 2, 32)
    generator = np.random.default_rng(seed)
    g = generator.standard_normal(32) + 1j * generator.standard_normal(32)
    scalar = complex(real, imag)
    scaled = surface_l2_norm(rule, scalar * g)
    expected = abs(scalar) * surface_l2_norm(rule, g)
    assert scaled == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_default_node_count_and_refinement():
    assert default_node_count(2, 16) == 256
    assert default_node_count(3, 4) == 128
    rule = build_surface("sphere", 3, 40)
    refined = refine_surface(rule)
    assert (refined.kind, refined.d, refined.M) == ("sphere", 3, 80)


def test_square_node_count_is_kept_silently(caplog):
    with caplog.at_level(logging.WARNING):
        rule = build_surface("paraboloid-cap", 3, 49)
    assert rule.M == 49
    assert "nodes instead of" not in caplog.text
