import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.config import TubeSearchSpec
from src.cover_utils import build_cover
from src.errors import ConfigurationError
from src.tube_utils import (
    Tube,
    axis_distance,
    make_tube,
    refine_tube,
    search_directions,
    tube_occupancy,
    tube_sup,
)
from src.weight_utils import (
    combine_weights,
    custom_weight,
    full_weight,
    make_weight,
    sample_selector_weight,
)

GRID_ONLY = TubeSearchSpec(refinement_rounds=0)


def cells_where(cover, predicate):
    return [index for index, center in enumerate(cover.centers) if predicate(center)]


def mirrored(weight, transform):
    """The weight moved by a lattice symmetry of the cover."""
    cover = weight.cover
    lookup = {tuple(center): index for index, center in enumerate(cover.centers)}
    images = [lookup[tuple(transform(center))] for center in weight.centers]
    return make_weight(cover, images, weight.multiplicities)


def test_tube_validation():
    with pytest.raises(ConfigurationError):
        Tube(np.array([1.0, 1.0]), np.zeros(2))
    with pytest.raises(ConfigurationError):
        Tube(np.array([1.0, 0.0]), np.array([1.0, 0.0]))


def test_anchor_is_closest_axis_point():
    tube = make_tube([2.0, 0.0], [3.0, 2.0])
    np.testing.assert_allclose(tube.direction, [1.0, 0.0])
    np.testing.assert_allclose(tube.anchor, [0.0, 2.0])
    np.testing.assert_allclose(axis_distance(np.array([[7.0, 2.5]]), tube), [0.5])


def test_center_indicator_counts_one_row(cover4):
    row = custom_weight(cover4, cells_where(cover4, lambda center: center[1] == 0))
    assert tube_occupancy(row, make_tube([1, 0], [0, 0])) == 9.0
    assert tube_occupancy(row, make_tube([0, 1], [0, 0])) == 3.0
    assert tube_occupancy(row, make_tube([1, 0], [0, 3])) == 0.0


def test_closed_tube_includes_boundary_rows(cover4):
    assert tube_occupancy(full_weight(cover4), make_tube([1, 0], [0, 0])) == 23.0


def test_volume_fraction_of_horizontal_tube(cover4):
    tube = make_tube([1, 0], [0, 0])
    value = tube_occupancy(full_weight(cover4), tube, "volume-fraction")
    assert value == pytest.approx(16.0, abs=0.05)


def test_unknown_occupancy_method(cover4):
    with pytest.raises(ConfigurationError):
        tube_occupancy(full_weight(cover4), make_tube([1, 0], [0, 0]), "exact")


def test_search_directions():
    planar = search_directions(2, 0.1)
    assert planar.shape == (math.ceil(math.pi / 0.1), 2)
    np.testing.assert_allclose(planar[0], [1.0, 0.0])

    spatial = search_directions(3, 0.25)
    assert spatial.shape == (math.ceil(2 * math.pi / 0.25**2), 3)
    np.testing.assert_allclose(np.linalg.norm(spatial, axis=1), 1.0)
    assert np.all(spatial[:, 2] > 0)


def test_empty_weight_has_zero_supremum(cover4):
    assert tube_sup(custom_weight(cover4, [])).value == 0.0


def test_single_cell_supremum_is_its_volume(cover4):
    index = cells_where(cover4, lambda center: tuple(center) == (2.0, -3.0))[0]
    result = tube_sup(custom_weight(cover4, [index]))
    assert result.value == 1.0
    assert axis_distance(cover4.centers[[index]], result.tube)[0] <= 1e-9


def test_full_weight_supremum(cover4):
    result = tube_sup(full_weight(cover4))
    assert result.value >= 23.0
    assert result.value == tube_occupancy(full_weight(cover4), result.tube)
    assert result.angular_resolution == pytest.approx(1 / 8)
    assert result.as_dict()["resolution"] == {"angular": 0.125, "offset": 0.5}


def test_supremum_in_three_dimensions():
    cover = build_cover(4, 3)
    result = tube_sup(full_weight(cover))
    assert 19.0 <= result.value <= cover.count
    assert result.value == tube_occupancy(full_weight(cover), result.tube)


def test_volume_fraction_search_reports_volume_fraction(cover4):
    spec = TubeSearchSpec(method="volume-fraction")
    result = tube_sup(full_weight(cover4), spec)
    expected = tube_occupancy(full_weight(cover4), result.tube, "volume-fraction")
    assert result.value == expected


@settings(max_examples=5)
@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
def test_grid_supremum_is_monotone(first_seed, second_seed):
    cover = build_cover(6, 2)
    lower = sample_selector_weight(cover, c=1.0, seed=first_seed)
    extra = sample_selector_weight(cover, c=1.0, seed=second_seed)
    upper = combine_weights(lower, extra)
    assert tube_sup(lower, GRID_ONLY).value <= tube_sup(upper, GRID_ONLY).value


@pytest.mark.parametrize(
    "transform",
    [
        lambda center: np.array([center[1], center[0]]),
        lambda center: np.array([center[0], -center[1]]),
        lambda center: -center,
    ],
)
def test_grid_supremum_respects_lattice_symmetries(transform):
    cover = build_cover(8, 2)
    weight = sample_selector_weight(cover, c=2.0, seed=17)
    spec = TubeSearchSpec(angular_resolution=math.pi / 63.5, refinement_rounds=0)
    original = tube_sup(weight, spec).value
    assert tube_sup(mirrored(weight, transform), spec).value == original


def test_refinement_never_loses_mass(cover4, selector4):
    start = make_tube([1, 0.3], [0, 0.5])
    value = tube_occupancy(selector4, start)
    refined, refined_value = refine_tube(selector4, start, value, 1 / 16, 0.25)
    assert refined_value >= value
    assert tube_occupancy(selector4, refined) == refined_value


def test_search_is_independent_of_workers():
    cover = build_cover(8, 2)
    weight = sample_selector_weight(cover, c=2.0, seed=3)
    spec = TubeSearchSpec(angular_resolution=0.01)
    serial = tube_sup(weight, spec, workers=1)
    pooled = tube_sup(weight, spec, workers=4)
    assert serial.value == pooled.value
    np.testing.assert_array_equal(serial.tube.direction, pooled.tube.direction)
    np.testing.assert_array_equal(serial.tube.anchor, pooled.tube.anchor)
