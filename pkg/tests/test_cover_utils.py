import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import dblquad

from src.cover_utils import build_cover, cell_fourier, cell_volume
from src.errors import ConfigurationError
from src.general_utils import unit_ball_volume


def test_unit_radius_covers():
    plane = build_cover(1, 2)
    assert plane.count == 5
    assert {tuple(center) for center in plane.centers} == {
        (0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0),
    }
    assert build_cover(1, 3).count == 7


def test_disk_count_matches_double_loop():
    R = 20
    expected = sum(
        1 for x in range(-R, R + 1) for y in range(-R, R + 1) if x * x + y * y <= R * R
    )
    cover = build_cover(R, 2)
    assert cover.count == expected
    assert 0.98 <= cover.count / (math.pi * R * R) <= 1.02


@pytest.mark.parametrize(
    ("R", "d"), [(3.0, 2), (7.5, 2), (12.0, 2), (4.0, 3), (6.5, 3)],
)
def test_count_lies_between_shrunken_and_grown_balls(R, d):
    cover = build_cover(R, d)
    volume = unit_ball_volume(d)
    low, high = volume * (R - math.sqrt(d)) ** d, volume * (R + math.sqrt(d)) ** d
    assert low <= cover.count <= high
    assert np.all(np.linalg.norm(cover.centers, axis=1) <= R)
    assert len({tuple(center) for center in cover.centers}) == cover.count


@pytest.mark.parametrize(
    ("R", "d", "geometry"), [(0.5, 2, "cube"), (4, 4, "cube"), (4, 2, "hexagon")],
)
def test_invalid_covers_are_rejected(R, d, geometry):
    with pytest.raises(ConfigurationError):
        build_cover(R, d, geometry)


def test_cell_volumes():
    assert cell_volume("cube", 3) == 1.0
    assert cell_volume("ball", 2) == pytest.approx(math.pi / 4)
    assert build_cover(3, 3, "ball").cell_volume == pytest.approx(math.pi / 6)


def test_cube_transform_special_values():
    assert cell_fourier("cube", 2, np.zeros(2)) == 1.0
    assert cell_fourier("cube", 3, np.zeros(3)) == 1.0
    assert abs(cell_fourier("cube", 2, np.array([1.0, 0.0]))) < 1e-15


def test_ball_transform_limit_at_origin():
    assert cell_fourier("ball", 2, np.zeros(2)) == pytest.approx(math.pi / 4, rel=1e-14)
    assert cell_fourier("ball", 3, np.zeros(3)) == pytest.approx(math.pi / 6, rel=1e-14)


def test_ball_transform_matches_polar_quadrature():
    xi = np.array([0.3, 0.4])

    def integrand(r, theta):
        projection = xi[0] * math.cos(theta) + xi[1] * math.sin(theta)
        return math.cos(2 * math.pi * r * projection) * r

    reference, _ = dblquad(
        integrand, 0, 2 * math.pi, 0, 0.5, epsabs=1e-13, epsrel=1e-13,
    )
    assert cell_fourier("ball", 2, xi) == pytest.approx(reference, abs=1e-8)


def test_transform_accepts_frequency_arrays():
    frequencies = np.zeros((3, 4, 2))
    values = cell_fourier("cube", 2, frequencies)
    assert values.shape == (3, 4)
    with pytest.raises(ConfigurationError):
        cell_fourier("cube", 2, np.zeros(3))


@given(
    st.sampled_from(["cube", "ball"]),
    st.sampled_from([2, 3]),
    st.lists(st.floats(-5, 5), min_size=3, max_size=3),
)
def test_transform_is_bounded_and_even(geometry, d, coordinates):
    xi = np.array(coordinates[:d])
    value = cell_fourier(geometry, d, xi)
    assert abs(value) <= cell_volume(geometry, d) + 1e-12
    assert cell_fourier(geometry, d, -xi) == pytest.approx(value, abs=1e-15)


def test_translation_covariance_for_cubes():
    center = np.array([2.0, -1.0])
    xi = np.array([0.37, 1.3])
    exact = 1.0 + 0.0j
    for c, frequency in zip(center, xi, strict=True):
        upper = cmath.exp(2j * math.pi * frequency * (c + 0.5))
        lower = cmath.exp(2j * math.pi * frequency * (c - 0.5))
        exact *= (upper - lower) / (2j * math.pi * frequency)

    phase = cmath.exp(2j * math.pi * float(xi @ center))
    covariant = phase * cell_fourier("cube", 2, xi)
    assert covariant == pytest.approx(exact, rel=1e-12)
