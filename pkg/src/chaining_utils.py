"""Maurey empirical-method nets and packing witnesses for covering numbers.

The balanced hull C = {sum a_k y_k : sum |a_k| <= 1} is approximated by averages of k
picks from the atoms {0, +-y_1, ..., +-y_n}. With k = ceil((2K/eps)^2) some average lies
within eps of every hull point. Small nets are enumerated outright; larger ones are
represented implicitly and a witness average is built greedily on demand.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .config import ENUMERATION_BUDGET, ENVELOPE_CONSTANT, NET_MODES
from .errors import ConfigurationError, DimensionError
from .extension_utils import cell_integrals
from .general_utils import check_same_dimension, make_rng

if TYPE_CHECKING:
    from .cover_utils import CellCover
    from .surface_utils import QuadratureRule


@dataclass(frozen=True)
class PolytopeSpec:
    """Generating vectors y_1..y_n (rows) of a balanced convex hull in R^N."""

    vectors: np.ndarray

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2 or self.vectors.shape[0] < 1:  # noqa: PLR2004
            message = "a polytope needs at least one generating vector"
            raise ConfigurationError(message)

    @property
    def n(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def K(self) -> float:  # noqa: N802
        return float(np.max(np.linalg.norm(self.vectors, axis=1)))

    def atoms(self) -> np.ndarray:
        """Rows 0, y_1..y_n, -y_1..-y_n."""
        zero = np.zeros((1, self.dimension))
        return np.vstack((zero, self.vectors, -self.vectors))


@dataclass(frozen=True)
class MaureyNet:
    """Averages of k atoms; `points` is None for implicitly represented nets."""

    spec: PolytopeSpec
    epsilon: float
    depth: int
    mode: str
    points: np.ndarray | None = None
    coefficients: np.ndarray | None = None

    @property
    def size(self) -> int | None:
        return None if self.points is None else int(self.points.shape[0])

    @property
    def log_size_bound(self) -> float:
        """k log(2n+1), the log of the number of ordered k-picks."""
        return self.depth * math.log(2 * self.spec.n + 1)


@dataclass(frozen=True)
class CoverageAudit:
    total: int
    successes: int
    errors: tuple[float, ...]

    @property
    def max_error(self) -> float:
        return max(self.errors, default=0.0)


@dataclass(frozen=True)
class CoveringResult:
    """Greedy packings per epsilon under the cell-integral seminorm.

    Packing sizes are lower-bound witnesses for covering numbers, not covering numbers.
    """

    rows: tuple[dict, ...]
    packings: dict[float, tuple[int, ...]]
    integrals: np.ndarray


def random_polytope(
    n: int,
    N: int,  # noqa: N803
    rng: np.random.Generator | int | None,
) -> PolytopeSpec:
    """n independent uniformly random unit vectors in R^N."""
    if n < 1 or N < 1:
        message = f"polytope needs n >= 1 and N >= 1, got n={n}, N={N}"
        raise ConfigurationError(message)
    generator = make_rng(rng)
    vectors = generator.standard_normal((n, N))
    return PolytopeSpec(vectors / np.linalg.norm(vectors, axis=1, keepdims=True))


def maurey_depth(K: float, epsilon: float) -> int:  # noqa: N803
    """k = ceil((2K/eps)^2)."""
    if epsilon <= 0:
        message = f"net scale must be positive, got {epsilon}"
        raise ConfigurationError(message)
    return max(1, math.ceil((2.0 * K / epsilon) ** 2 - 1e-12))


def pick_coefficients(picks: np.ndarray, n: int) -> np.ndarray:
    """Hull coefficients of averages of atom picks (index 0 is the zero atom)."""
    depth = picks.shape[1]
    coefficients = np.zeros((picks.shape[0], n))
    for column in range(depth):
        chosen = picks[:, column]
        positive = (chosen >= 1) & (chosen <= n)
        negative = chosen > n
        rows = np.arange(chosen.size)
        np.add.at(coefficients, (rows[positive], chosen[positive] - 1), 1.0)
        np.add.at(coefficients, (rows[negative], chosen[negative] - n - 1), -1.0)
    return coefficients / depth


def maurey_net(
    spec: PolytopeSpec,
    epsilon: float,
    mode: str = "auto",
    rng: np.random.Generator | int | None = None,
    samples: int = 200,
) -> MaureyNet:
    """Build the Maurey net of the hull at scale epsilon.

    enumerated lists every k-multiset average and refuses beyond (2n+1)^k > 10^6;
    sampled draws `samples` random averages; implicit stores nothing. auto enumerates
    when the budget allows and falls back to implicit otherwise.
    """
    if mode not in NET_MODES:
        message = f"unknown net mode '{mode}', expected one of {NET_MODES}"
        raise ConfigurationError(message)

    depth = maurey_depth(spec.K, epsilon)
    atom_count = 2 * spec.n + 1
    budget = atom_count**depth
    if mode == "auto":
        mode = "enumerated" if budget <= ENUMERATION_BUDGET else "implicit"
        log_message = f"Net mode resolved to {mode} (k={depth}, (2n+1)^k={budget:.3g})"
        logging.info(log_message)

    if mode == "implicit":
        return MaureyNet(spec, epsilon, depth, mode)

    if mode == "enumerated":
        if budget > ENUMERATION_BUDGET:
            message = (
                f"enumerating the net needs (2n+1)^k = {atom_count}^{depth} = "
                f"{budget:.3g} "
                f"points, above the budget of {ENUMERATION_BUDGET:.0e}"
            )
            raise ConfigurationError(message)
        picks = np.array(
            list(itertools.combinations_with_replacement(range(atom_count), depth)),
        )
    else:
        if samples < 1:
            message = f"sampled net needs at least one point, got {samples}"
            raise ConfigurationError(message)
        picks = make_rng(rng).integers(0, atom_count, size=(samples, depth))

    coefficients = pick_coefficients(picks, spec.n)
    points = coefficients @ spec.vectors
    return MaureyNet(spec, epsilon, depth, mode, points, coefficients)


def greedy_average(
    spec: PolytopeSpec, x: np.ndarray, depth: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Average of `depth` atoms chosen one at a time to minimize the running error.

    For x in the hull the error after k picks is at most max_a |x - a| / sqrt(k).
    """
    atoms = spec.atoms()
    total = np.zeros(spec.dimension)
    picks = np.empty(depth, dtype=np.int64)
    for step in range(1, depth + 1):
        candidates = (total[None, :] + atoms) / step
        choice = int(np.argmin(np.linalg.norm(candidates - x, axis=1)))
        picks[step - 1] = choice
        total += atoms[choice]

    coefficients = pick_coefficients(picks[None, :], spec.n)[0]
    return total / depth, coefficients


def net_witness(net: MaureyNet, x: object) -> tuple[np.ndarray, np.ndarray]:
    """A net point close to the hull point x, with its hull coefficients."""
    point = np.asarray(x, dtype=float)
    if point.shape != (net.spec.dimension,):
        message = f"point has shape {point.shape}, expected ({net.spec.dimension},)"
        raise DimensionError(message)

    if net.points is None:
        return greedy_average(net.spec, point, net.depth)
    nearest = int(np.argmin(np.linalg.norm(net.points - point, axis=1)))
    return net.points[nearest], net.coefficients[nearest]


def random_hull_points(
    spec: PolytopeSpec,
    count: int,
    rng: np.random.Generator | int | None,
) -> tuple[np.ndarray, np.ndarray]:
    """Random hull points from signed Dirichlet coefficients with sum |a_k| <= 1."""
    generator = make_rng(rng)
    weights = generator.dirichlet(np.ones(spec.n + 1), size=count)[:, : spec.n]
    signs = generator.choice((-1.0, 1.0), size=(count, spec.n))
    coefficients = weights * signs
    return coefficients @ spec.vectors, coefficients


def coverage_audit(net: MaureyNet, points: np.ndarray) -> CoverageAudit:
    """Distance from each point to its net witness, and how many lie within eps."""
    errors = tuple(
        float(np.linalg.norm(net_witness(net, point)[0] - point)) for point in points
    )
    successes = sum(error <= net.epsilon + 1e-12 for error in errors)  # noqa: PLR2004
    if successes < len(errors):
        missed = len(errors) - successes
        log_message = f"{missed} of {len(errors)} hull points not covered"
        logging.warning(log_message)
    return CoverageAudit(len(errors), successes, errors)


def random_unit_densities(
    rule: QuadratureRule,
    count: int,
    rng: np.random.Generator | int | None,
) -> np.ndarray:
    """Complex Gaussian node values with unit L^2(surface) norm, one per row."""
    generator = make_rng(rng)
    shape = (count, rule.M)
    values = generator.standard_normal(shape) + 1j * generator.standard_normal(shape)
    norms = np.sqrt(np.sum(rule.weights * np.abs(values) ** 2, axis=1))
    return values / norms[:, None]


def greedy_packing(
    integrals: np.ndarray,
    epsilon: float,
    seed_packing: tuple[int, ...] = (),
) -> tuple[int, ...]:
    """Extend a packing with every sample farther than epsilon from all kept ones."""
    kept = list(seed_packing)
    for index in range(integrals.shape[0]):
        if index in kept:
            continue
        if kept:
            distances = np.max(np.abs(integrals[kept] - integrals[index]), axis=1)
            if np.any(distances <= epsilon):
                continue
        kept.append(index)
    return tuple(kept)


def covering_check(  # noqa: PLR0913
    rule: QuadratureRule,
    cover: CellCover,
    epsilons: tuple[float, ...],
    sample_count: int,
    rng: np.random.Generator | int | None,
    *,
    cosine: bool = False,
) -> CoveringResult:
    """Packing sizes under the cell-integral seminorm against (log n) / eps^2.

    Packings are built from the largest epsilon down, each extending the previous one,
    so their sizes never increase with epsilon.
    """
    check_same_dimension(rule.d, cover.d, "surface and cover")
    if sample_count < 10:  # noqa: PLR2004
        message = f"covering check needs at least 10 samples, got {sample_count}"
        raise ConfigurationError(message)
    if not epsilons or any(not 0 < eps <= 1 for eps in epsilons):
        message = f"covering scales must lie in (0, 1], got {epsilons}"
        raise ConfigurationError(message)

    densities = random_unit_densities(rule, sample_count, rng)
    integrals = np.array(
        [cell_integrals(rule, cover, density, cosine=cosine) for density in densities],
    )

    packings: dict[float, tuple[int, ...]] = {}
    current: tuple[int, ...] = ()
    for epsilon in sorted(set(epsilons), reverse=True):
        current = greedy_packing(integrals, epsilon, current)
        packings[epsilon] = current

    log_n = math.log(cover.count)
    rows = []
    for epsilon in epsilons:
        size = len(packings[epsilon])
        envelope = log_n / epsilon**2
        rows.append(
            {
                "epsilon": float(epsilon),
                "packingSize": size,
                "logPacking": math.log(size),
                "envelope": envelope,
            },
        )
        if math.log(size) > ENVELOPE_CONSTANT * envelope:
            log_message = (
                f"eps={epsilon}: log packing exceeds {ENVELOPE_CONSTANT:g} x envelope"
            )
            logging.warning(log_message)

    return CoveringResult(tuple(rows), packings, integrals)
