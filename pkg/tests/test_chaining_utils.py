import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.chaining_utils import (
    PolytopeSpec,
    coverage_audit,
    covering_check,
    greedy_packing,
    maurey_depth,
    maurey_net,
    net_witness,
    random_hull_points,
    random_polytope,
    random_unit_densities,
)
from src.errors import ConfigurationError, DimensionError
from src.extension_utils import cell_integrals
from src.surface_utils import surface_l2_norm


def test_depth_formula():
    assert maurey_depth(1.0, 0.5) == 16
    assert maurey_depth(1.0, 2.0) == 1
    assert maurey_depth(1.0, 0.3) == math.ceil((2 / 0.3) ** 2)
    with pytest.raises(ConfigurationError):
        maurey_depth(1.0, 0.0)


def test_polytope_validation_and_atoms():
    with pytest.raises(ConfigurationError):
        PolytopeSpec(np.zeros(3))
    spec = PolytopeSpec(np.array([[3.0, 4.0], [0.0, 1.0]]))
    assert (spec.n, spec.dimension, spec.K) == (2, 2, 5.0)
    np.testing.assert_array_equal(spec.atoms()[[0, 1, 3]], [[0, 0], [3, 4], [-3, -4]])


def test_random_polytope_has_unit_generators():
    spec = random_polytope(8, 16, 0)
    assert spec.vectors.shape == (8, 16)
    np.testing.assert_allclose(np.linalg.norm(spec.vectors, axis=1), 1.0)


def test_small_enumerated_net():
    spec = random_polytope(1, 2, 3)
    net = maurey_net(spec, 1.0, mode="auto")
    assert net.mode == "enumerated"
    assert net.depth == 4
    assert net.size == math.comb(3 + 4 - 1, 4)
    assert np.all(np.sum(np.abs(net.coefficients), axis=1) <= 1 + 1e-12)
    np.testing.assert_allclose(net.points, net.coefficients @ spec.vectors)


def test_enumerated_net_covers_its_hull():
    spec = random_polytope(2, 3, 4)
    net = maurey_net(spec, 1.0, mode="enumerated")
    points, _ = random_hull_points(spec, 200, 5)
    audit = coverage_audit(net, points)
    assert audit.successes == audit.total == 200
    assert audit.max_error <= 1.0


def test_enumeration_budget_is_enforced():
    spec = random_polytope(8, 16, 0)
    with pytest.raises(ConfigurationError, match="17\\^16"):
        maurey_net(spec, 0.5, mode="enumerated")


def test_large_net_falls_back_to_implicit_witnesses():
    spec = random_polytope(8, 16, 1)
    net = maurey_net(spec, 0.5, mode="auto")
    assert net.mode == "implicit"
    assert net.size is None
    assert net.depth == 16
    assert net.log_size_bound == pytest.approx(16 * math.log(17))

    points, _ = random_hull_points(spec, 200, 2)
    audit = coverage_audit(net, points)
    assert audit.successes == audit.total
    assert audit.max_error <= 2 * spec.K / math.sqrt(net.depth) + 1e-12


@settings(max_examples=20)
@given(
    st.integers(1, 6),
    st.integers(1, 8),
    st.floats(0.3, 1.5),
    st.integers(0, 2**32 - 1),
)
def test_greedy_witness_meets_the_maurey_rate(n, N, epsilon, seed):
    spec = random_polytope(n, N, seed)
    net = maurey_net(spec, epsilon, mode="implicit")
    x = random_hull_points(spec, 1, seed)[0][0]
    witness, coefficients = net_witness(net, x)
    assert np.linalg.norm(witness - x) <= epsilon + 1e-12
    assert np.sum(np.abs(coefficients)) <= 1 + 1e-12
    np.testing.assert_allclose(witness, coefficients @ spec.vectors, atol=1e-12)


def test_sampled_net():
    spec = random_polytope(4, 6, 0)
    net = maurey_net(spec, 0.5, mode="sampled", rng=9, samples=50)
    assert net.size == 50
    again = maurey_net(spec, 0.5, mode="sampled", rng=9, samples=50)
    np.testing.assert_array_equal(net.points, again.points)
    with pytest.raises(ConfigurationError):
        maurey_net(spec, 0.5, mode="sampled", samples=0)


def test_unknown_net_mode():
    with pytest.raises(ConfigurationError):
        maurey_net(random_polytope(2, 2, 0), 0.5, mode="lazy")


def test_witness_checks_dimension():
    net = maurey_net(random_polytope(2, 3, 0), 0.5, mode="implicit")
    with pytest.raises(DimensionError):
        net_witness(net, np.zeros(2))


def test_hull_points_have_small_coefficients():
    spec = random_polytope(5, 3, 0)
    points, coefficients = random_hull_points(spec, 100, 1)
    assert np.all(np.sum(np.abs(coefficients), axis=1) <= 1 + 1e-12)
    np.testing.assert_allclose(points, coefficients @ spec.vectors)


def test_unit_densities(circle32):
    densities = random_unit_densities(circle32, 5, 0)
    for density in densities:
        assert surface_l2_norm(circle32, density) == pytest.approx(1.0)


def test_greedy_packing_is_separated_and_extends_its_seed(rng):
    integrals = rng.standard_normal((60, 4)) + 1j * rng.standard_normal((60, 4))
    coarse = greedy_packing(integrals, 1.5)
    fine = greedy_packing(integrals, 0.5, coarse)
    assert fine[: len(coarse)] == coarse
    for packing, epsilon in ((coarse, 1.5), (fine, 0.5)):
        for i, first in enumerate(packing):
            for second in packing[i + 1 :]:
                assert np.max(np.abs(integrals[first] - integrals[second])) > epsilon


def test_covering_check_rows(circle32, cover4):
    result = covering_check(circle32, cover4, (0.5, 0.25, 1.0), 40, 3)
    sizes = {row["epsilon"]: row["packingSize"] for row in result.rows}
    assert sizes[1.0] <= sizes[0.5] <= sizes[0.25] <= 40
    assert [row["epsilon"] for row in result.rows] == [0.5, 0.25, 1.0]
    for row in result.rows:
        envelope = math.log(cover4.count) / row["epsilon"] ** 2
        assert row["envelope"] == pytest.approx(envelope)
        assert row["logPacking"] == pytest.approx(math.log(row["packingSize"]))
    assert result.integrals.shape == (40, cover4.count)


def test_cosine_covering_uses_cosine_integrals(circle32, cover4):
    result = covering_check(circle32, cover4, (0.5,), 20, 3, cosine=True)
    densities = random_unit_densities(circle32, 20, 3)
    expected = [cell_integrals(circle32, cover4, g, cosine=True) for g in densities]
    np.testing.assert_array_equal(result.integrals, np.array(expected))


@pytest.mark.parametrize(
    ("epsilons", "count"),
    [((0.5,), 9), ((0.0,), 20), ((1.5,), 20), ((), 20)],
)
def test_covering_check_validation(circle32, cover4, epsilons, count):
    with pytest.raises(ConfigurationError):
        covering_check(circle32, cover4, epsilons, count, 0)
