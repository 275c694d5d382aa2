import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import binom, chisquare

from src.config import ModelSpec
from src.cover_utils import build_cover
from src.errors import ConfigurationError
from src.general_utils import derive_seed
from src.weight_utils import (
    Weight,
    combine_weights,
    custom_weight,
    dominates,
    expected_selector_mass,
    full_weight,
    inclusion_probability,
    make_weight,
    matched_draw_count,
    sample_carbery_weight,
    sample_selector_weight,
    sample_weight,
    scale_weight,
    selection_probability,
    truncate_weight,
    weight_from_dict,
    weight_mass,
    weight_to_dict,
)


def test_zero_probability_gives_empty_weight(cover4):
    weight = sample_selector_weight(cover4, c=0.0, seed=1)
    assert weight.support_size == 0
    assert weight_mass(weight) == 0.0


def test_sure_selection_takes_every_cell(cover4):
    weight = sample_selector_weight(cover4, c=4.0, seed=1)
    assert weight.support_size == cover4.count
    assert weight_mass(weight) == cover4.count * cover4.cell_volume


@pytest.mark.parametrize(("c", "lam"), [(1.0, 1.0), (1.0, -0.1), (-1.0, 0.0)])
def test_selector_rejects_bad_parameters(cover4, c, lam):
    with pytest.raises(ConfigurationError):
        sample_selector_weight(cover4, c=c, lam=lam, seed=0)


def test_selector_is_reproducible(cover4):
    first = sample_selector_weight(cover4, c=2.0, seed=99)
    second = sample_selector_weight(cover4, c=2.0, seed=99)
    np.testing.assert_array_equal(first.indices, second.indices)
    np.testing.assert_array_equal(first.multiplicities, second.multiplicities)
    assert first.weight_id == second.weight_id


def test_selector_mean_mass_matches_binomial_mean():
    cover = build_cover(32, 2)
    seeds = [derive_seed(7, i) for i in range(200)]
    masses = np.array(
        [weight_mass(sample_selector_weight(cover, seed=seed)) for seed in seeds],
    )
    expected = expected_selector_mass(cover, 1.0, 0.0)
    error = np.std(masses, ddof=1) / math.sqrt(masses.size)
    assert abs(np.mean(masses) - expected) <= 4 * error


def test_sure_selection_has_the_full_mass():
    cover = build_cover(8, 2)
    expected = expected_selector_mass(cover, 8.0, 0.0)
    assert expected == pytest.approx(weight_mass(full_weight(cover)))


def test_selector_support_size_is_binomial():
    cover = build_cover(16, 2)
    delta = selection_probability(16, 1.0, 0.0)
    seeds = [derive_seed(3, i) for i in range(1000)]
    sizes = np.array(
        [sample_selector_weight(cover, seed=seed).support_size for seed in seeds],
    )
    distribution = binom(cover.count, delta)
    low, high = int(distribution.ppf(0.02)), int(distribution.ppf(0.98))
    middle = np.arange(low + 1, high)
    observed = [
        np.sum(sizes <= low),
        *(np.sum(sizes == k) for k in middle),
        np.sum(sizes >= high),
    ]
    expected = np.array(
        [distribution.cdf(low), *distribution.pmf(middle), distribution.sf(high - 1)],
    ) * sizes.size
    _, p_value = chisquare(observed, expected)
    assert p_value > 1e-3


def test_exhaustive_draw_without_replacement_is_full(cover4):
    weight = sample_carbery_weight(cover4, cover4.count, replacement=False, seed=5)
    np.testing.assert_array_equal(weight.indices, np.arange(cover4.count))
    assert np.all(weight.multiplicities == 1)


@pytest.mark.parametrize("replacement", [True, False])
def test_single_draw_gives_one_cell(cover4, replacement):
    weight = sample_carbery_weight(cover4, 1, replacement=replacement, seed=5)
    assert weight.support_size == 1
    assert weight.multiplicities.tolist() == [1]


def test_carbery_rejects_bad_draw_counts(cover4):
    with pytest.raises(ConfigurationError):
        sample_carbery_weight(cover4, cover4.count + 1, replacement=False, seed=0)
    with pytest.raises(ConfigurationError):
        sample_carbery_weight(cover4, 0, replacement=True, seed=0)


def test_inclusion_probability_with_replacement():
    cover = build_cover(32, 2)
    m = 32
    hit_fractions = np.array(
        [
            sample_carbery_weight(cover, m, replacement=True, seed=seed).support_size
            / cover.count
            for seed in (derive_seed(8, i) for i in range(500))
        ],
    )
    expected = inclusion_probability(cover.count, m)
    assert expected == pytest.approx(1 - (1 - 1 / cover.count) ** m, rel=1e-12)
    error = np.std(hit_fractions, ddof=1) / math.sqrt(hit_fractions.size)
    assert abs(np.mean(hit_fractions) - expected) <= 4 * error


@given(st.integers(1, 49), st.integers(0, 2**32 - 1))
def test_without_replacement_support_is_exactly_m(m, seed):
    cover = build_cover(4, 2)
    weight = sample_carbery_weight(cover, m, replacement=False, seed=seed)
    assert weight.support_size == m


def test_with_replacement_multiplicities_sum_to_m(cover4):
    weight = sample_carbery_weight(cover4, 200, replacement=True, seed=2)
    assert int(np.sum(weight.multiplicities)) == 200
    assert weight.model_tag == "carbery-with-replacement"


def test_mass_of_simple_weights():
    cover = build_cover(1, 2)
    assert weight_mass(full_weight(cover)) == 5.0
    assert weight_mass(custom_weight(cover, [])) == 0.0


def test_mass_matches_recount(cover4):
    weight = sample_carbery_weight(cover4, 30, replacement=True, seed=4)
    recount = 0
    for index, multiplicity in zip(weight.indices, weight.multiplicities, strict=True):
        recount += int(multiplicity) * cover4.cell_volume
        assert weight.dense()[index] == multiplicity
    assert weight_mass(weight) == recount


def test_weight_validation(cover4):
    with pytest.raises(ConfigurationError):
        Weight(cover4, np.array([3, 1]), np.array([1, 1]))
    with pytest.raises(ConfigurationError):
        Weight(cover4, np.array([1]), np.array([0]))
    with pytest.raises(ConfigurationError):
        Weight(cover4, np.array([cover4.count]), np.array([1]))
    with pytest.raises(ConfigurationError):
        Weight(cover4, np.array([1]), np.array([2]), "selector")


def test_make_weight_sorts_indices(cover4):
    weight = make_weight(cover4, [7, 2, 5], [1, 3, 2])
    assert weight.indices.tolist() == [2, 5, 7]
    assert weight.multiplicities.tolist() == [3, 2, 1]


def test_record_rebuilds_the_same_weight(cover4):
    weight = sample_carbery_weight(cover4, 20, replacement=True, seed=6)
    rebuilt = weight_from_dict(weight_to_dict(weight))
    np.testing.assert_array_equal(rebuilt.indices, weight.indices)
    np.testing.assert_array_equal(rebuilt.multiplicities, weight.multiplicities)
    assert (rebuilt.model_tag, rebuilt.seed) == (weight.model_tag, weight.seed)
    assert rebuilt.cover.cover_id == cover4.cover_id


def test_record_missing_field(cover4):
    record = weight_to_dict(full_weight(cover4))
    del record["indices"]
    with pytest.raises(ConfigurationError, match="indices"):
        weight_from_dict(record)


def test_truncate_scale_and_combine(cover4):
    weight = make_weight(cover4, [0, 1, 2], [1, 5, 9])
    assert truncate_weight(weight).multiplicities.tolist() == [1, 4, 4]
    assert truncate_weight(weight, 2).multiplicities.tolist() == [1, 2, 2]
    assert scale_weight(weight, 3).multiplicities.tolist() == [3, 15, 27]

    other = make_weight(cover4, [2, 3], [1, 1])
    combined = combine_weights(weight, other)
    assert combined.indices.tolist() == [0, 1, 2, 3]
    assert combined.multiplicities.tolist() == [1, 5, 10, 1]
    assert dominates(combined, weight)
    assert not dominates(weight, combined)


def test_sample_weight_dispatch(cover4):
    full = sample_weight(cover4, ModelSpec(model_tag="full"), 0)
    assert full.support_size == cover4.count
    no_replacement = ModelSpec(model_tag="carbery", replacement=False)
    carbery = sample_weight(cover4, no_replacement, 0)
    assert carbery.support_size == matched_draw_count(cover4, 1.0, 0.0)
    with pytest.raises(ConfigurationError):
        sample_weight(cover4, ModelSpec(model_tag="poisson"), 0)
