"""Radius-1 tubes, their occupancy w(T), and a grid search for sup_T w(T).

A tube is stored as a unit direction plus the anchor, the point of its axis closest to
the origin. The supremum search scans directions at angular resolution 1/(2R) and axis
offsets at spacing 1/2, then refines the best tube locally by halving both grids.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np
from scipy.stats import qmc

from .config import (
    BALL_CELL_RADIUS,
    OCCUPANCY_METHODS,
    REFINEMENT_HALF_WIDTH,
    TUBE_RADIUS,
    VOLUME_FRACTION_LOG2_POINTS,
    TubeSearchSpec,
)
from .errors import ConfigurationError
from .task_utils import run_in_parallel

if TYPE_CHECKING:
    from .weight_utils import Weight

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
DIRECTION_CHUNK = 64
CONTAINMENT_SLACK = 1e-12


@dataclass(frozen=True)
class Tube:
    """The 1-neighborhood of the line anchor + t * direction."""

    direction: np.ndarray
    anchor: np.ndarray

    def __post_init__(self) -> None:
        if abs(np.linalg.norm(self.direction) - 1.0) > 1e-12:  # noqa: PLR2004
            message = "tube direction must be a unit vector"
            raise ConfigurationError(message)
        if abs(float(self.anchor @ self.direction)) > 1e-12:  # noqa: PLR2004
            message = "tube anchor must be orthogonal to the direction"
            raise ConfigurationError(message)

    def as_dict(self) -> dict:
        return {"direction": self.direction.tolist(), "anchor": self.anchor.tolist()}


@dataclass(frozen=True)
class TubeSupResult:
    value: float
    tube: Tube
    angular_resolution: float
    offset_spacing: float

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            **self.tube.as_dict(),
            "resolution": {
                "angular": self.angular_resolution,
                "offset": self.offset_spacing,
            },
        }


def make_tube(direction: object, point: object) -> Tube:
    """Tube along a direction whose axis passes through a point."""
    unit = np.asarray(direction, dtype=float)
    unit = unit / np.linalg.norm(unit)
    through = np.asarray(point, dtype=float)
    anchor = through - (through @ unit) * unit
    anchor = anchor - (anchor @ unit) * unit
    return Tube(unit, anchor)


def orthonormal_complement(direction: np.ndarray) -> np.ndarray:
    """Rows spanning the hyperplane orthogonal to a unit direction."""
    if direction.shape[0] == 2:  # noqa: PLR2004
        return np.array([[-direction[1], direction[0]]])

    tilted = abs(direction[2]) < 0.9  # noqa: PLR2004
    helper = np.array([0.0, 0.0, 1.0]) if tilted else np.array([1.0, 0.0, 0.0])
    first = helper - (helper @ direction) * direction
    first /= np.linalg.norm(first)
    second = np.cross(direction, first)
    return np.vstack((first, second))


def axis_distance(points: np.ndarray, tube: Tube) -> np.ndarray:
    """Distance from each point to the tube axis."""
    relative = points - tube.anchor
    along = relative @ tube.direction
    return np.linalg.norm(relative - along[..., None] * tube.direction, axis=-1)


@lru_cache(maxsize=8)
def cell_sample_points(geometry: str, d: int) -> np.ndarray:
    """Fixed Sobol points of the origin-centered cell (256 for cubes)."""
    sampler = qmc.Sobol(d=d, scramble=False)
    points = sampler.random_base2(VOLUME_FRACTION_LOG2_POINTS) - 0.5
    if geometry == "ball":
        points = points[np.linalg.norm(points, axis=1) <= BALL_CELL_RADIUS]
    points.setflags(write=False)
    return points


def tube_occupancy(
    weight: Weight, tube: Tube, method: str = "center-indicator",
) -> float:
    """w(T) by counting cells whose center lies in T, or by Sobol volume fractions."""
    if method not in OCCUPANCY_METHODS:
        message = f"unknown occupancy method '{method}'"
        raise ConfigurationError(message)
    if weight.support_size == 0:
        return 0.0

    centers = weight.centers
    volume = weight.cover.cell_volume
    if method == "center-indicator":
        inside = axis_distance(centers, tube) <= TUBE_RADIUS + CONTAINMENT_SLACK
        return float(np.sum(weight.multiplicities[inside])) * volume

    samples = cell_sample_points(weight.cover.geometry, weight.cover.d)
    distances = axis_distance(centers[:, None, :] + samples[None, :, :], tube)
    fractions = np.mean(distances <= TUBE_RADIUS + CONTAINMENT_SLACK, axis=1)
    return float(np.sum(weight.multiplicities * fractions)) * volume


def search_directions(d: int, angular_resolution: float) -> np.ndarray:
    """Directions covering the projective sphere at the given angular resolution."""
    if d == 2:  # noqa: PLR2004
        count = math.ceil(math.pi / angular_resolution)
        angles = math.pi * np.arange(count) / count
        return np.column_stack((np.cos(angles), np.sin(angles)))

    count = max(2, math.ceil(2.0 * math.pi / angular_resolution**2))
    index = np.arange(count)
    z = 1.0 - (index + 0.5) / count
    radius = np.sqrt(1.0 - z * z)
    azimuth = GOLDEN_ANGLE * index
    return np.column_stack((radius * np.cos(azimuth), radius * np.sin(azimuth), z))


@dataclass(frozen=True)
class OffsetGrid:
    """Square grid of axis offsets in the orthogonal hyperplane, clipped to a disk."""

    spacing: float
    half_count: int
    dimension: int
    radius: float

    @property
    def side(self) -> int:
        return 2 * self.half_count + 1

    def coordinates(self, flat_index: int) -> np.ndarray:
        position = np.unravel_index(flat_index, (self.side,) * self.dimension)
        return self.spacing * (np.asarray(position, dtype=float) - self.half_count)

    @lru_cache(maxsize=1)  # noqa: B019
    def stencil(self) -> np.ndarray:
        reach = math.ceil(TUBE_RADIUS / self.spacing) + 1
        steps = range(-reach, reach + 1)
        return np.array(list(itertools.product(steps, repeat=self.dimension)))

    @lru_cache(maxsize=1)  # noqa: B019
    def outside_disk(self) -> np.ndarray:
        axis = self.spacing * (np.arange(self.side) - self.half_count)
        grids = np.meshgrid(*([axis] * self.dimension), indexing="ij")
        squared = sum(grid * grid for grid in grids)
        return (squared > self.radius**2 + CONTAINMENT_SLACK).ravel()


def direction_occupancies(
    direction: np.ndarray,
    grid: OffsetGrid,
    centers: np.ndarray,
    masses: np.ndarray,
) -> np.ndarray:
    """Center-indicator occupancy of every grid tube along one direction."""
    totals = np.zeros(grid.side**grid.dimension)
    if centers.shape[0]:
        basis = orthonormal_complement(direction)
        projected = centers @ basis.T
        nearest = np.rint(projected / grid.spacing).astype(np.int64)
        candidates = nearest[:, None, :] + grid.stencil()[None, :, :]
        offsets = candidates * grid.spacing
        close = (
            np.linalg.norm(offsets - projected[:, None, :], axis=-1)
            <= TUBE_RADIUS + CONTAINMENT_SLACK
        )
        in_grid = np.all(np.abs(candidates) <= grid.half_count, axis=-1)
        keep = close & in_grid
        flat = np.ravel_multi_index(
            tuple((candidates[keep] + grid.half_count).T),
            (grid.side,) * grid.dimension,
        )
        mass_per_candidate = np.broadcast_to(masses[:, None], keep.shape)[keep]
        totals = np.bincount(flat, weights=mass_per_candidate, minlength=totals.size)

    totals[grid.outside_disk()] = -1.0
    return totals


def scan_directions(
    bounds: tuple[int, int],
    directions: np.ndarray,
    grid: OffsetGrid,
    centers: np.ndarray,
    masses: np.ndarray,
) -> list[tuple[float, int]]:
    """Best (value, offset index) for each direction in a contiguous chunk."""
    start, stop = bounds
    best = []
    for direction in directions[start:stop]:
        totals = direction_occupancies(direction, grid, centers, masses)
        offset_index = int(np.argmax(totals))
        best.append((float(totals[offset_index]), offset_index))
    return best


def tube_from_offset(direction: np.ndarray, offset: np.ndarray) -> Tube:
    basis = orthonormal_complement(direction)
    return make_tube(direction, offset @ basis)


def perturbed_directions(
    direction: np.ndarray, step: float, reach: int,
) -> list[np.ndarray]:
    """Directions within +-reach steps of an incumbent, in a fixed order."""
    if direction.shape[0] == 2:  # noqa: PLR2004
        angle = math.atan2(direction[1], direction[0])
        return [
            np.array([math.cos(angle + k * step), math.sin(angle + k * step)])
            for k in range(-reach, reach + 1)
        ]

    basis = orthonormal_complement(direction)
    candidates = []
    for first, second in itertools.product(range(-reach, reach + 1), repeat=2):
        moved = direction + step * (first * basis[0] + second * basis[1])
        candidates.append(moved / np.linalg.norm(moved))
    return candidates


def refine_tube(
    weight: Weight,
    incumbent: Tube,
    value: float,
    angular_step: float,
    offset_step: float,
) -> tuple[Tube, float]:
    """One local refinement round around the incumbent at halved grid steps."""
    reach = 2 * REFINEMENT_HALF_WIDTH
    best_tube, best_value = incumbent, value
    point = incumbent.anchor
    steps = range(-reach, reach + 1)

    for direction in perturbed_directions(incumbent.direction, angular_step, reach):
        centered = make_tube(direction, point)
        basis = orthonormal_complement(centered.direction)
        for shift in itertools.product(steps, repeat=basis.shape[0]):
            offset = np.asarray(shift, dtype=float) @ basis
            anchor = centered.anchor + offset_step * offset
            candidate = make_tube(centered.direction, anchor)
            occupancy = tube_occupancy(weight, candidate)
            if occupancy > best_value:
                best_tube, best_value = candidate, occupancy

    return best_tube, best_value


def recenter_tube(weight: Weight, tube: Tube, value: float) -> Tube:
    """Move the axis to the middle of the captured centers if nothing is lost."""
    if weight.support_size == 0:
        return tube
    centers = weight.centers
    captured = centers[axis_distance(centers, tube) <= TUBE_RADIUS + CONTAINMENT_SLACK]
    if captured.shape[0] == 0:
        return tube

    basis = orthonormal_complement(tube.direction)
    projected = captured @ basis.T
    middle = 0.5 * (projected.min(axis=0) + projected.max(axis=0))
    candidate = make_tube(tube.direction, middle @ basis)
    return candidate if tube_occupancy(weight, candidate) >= value else tube


def tube_sup(
    weight: Weight,
    search: TubeSearchSpec | None = None,
    workers: int | None = 1,
) -> TubeSupResult:
    """Approximate sup_T w(T) over tubes meeting B_R by grid search plus refinement.

    The search counts cell centers; the reported value of the winning tube uses the
    occupancy method of the search spec.

    Ties are broken towards the smallest (direction index, offset index), so the
    result does not depend on how directions are shared among workers.
    """
    spec = search if search is not None else TubeSearchSpec()
    cover = weight.cover
    angular = spec.angular_resolution
    if angular is None:
        angular = 1.0 / (2.0 * cover.R)
    grid = OffsetGrid(
        spacing=spec.offset_spacing,
        half_count=math.floor(cover.R / spec.offset_spacing + CONTAINMENT_SLACK),
        dimension=cover.d - 1,
        radius=cover.R,
    )

    directions = search_directions(cover.d, angular)
    centers = weight.centers
    masses = weight.multiplicities * cover.cell_volume
    chunks = [
        (start, min(start + DIRECTION_CHUNK, directions.shape[0]))
        for start in range(0, directions.shape[0], DIRECTION_CHUNK)
    ]
    scanned = run_in_parallel(
        scan_directions, chunks, directions, grid, centers, masses, workers=workers,
    )

    best_value, best_direction, best_offset = -math.inf, 0, 0
    for index, (value, offset_index) in enumerate(itertools.chain(*scanned)):
        if value > best_value:
            best_value, best_direction, best_offset = value, index, offset_index

    tube = tube_from_offset(directions[best_direction], grid.coordinates(best_offset))
    value = max(best_value, 0.0)
    angular_step, offset_step = angular, spec.offset_spacing
    for _ in range(spec.refinement_rounds):
        angular_step, offset_step = angular_step / 2.0, offset_step / 2.0
        tube, value = refine_tube(weight, tube, value, angular_step, offset_step)

    tube = recenter_tube(weight, tube, value)
    if spec.method != "center-indicator":
        value = tube_occupancy(weight, tube, spec.method)
    return TubeSupResult(value, tube, angular, spec.offset_spacing)
