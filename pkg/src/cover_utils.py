"""Unit-cell covers of the ball B_R and the exact Fourier transform of one cell.

Cells are centered at the integer lattice points inside B_R. Cubes of side 1 tile the
ball exactly; balls of radius 1/2 are the inscribed, finitely overlapping variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import jv

from .config import (
    BALL_CELL_RADIUS,
    CELL_GEOMETRIES,
    LATTICE_TOLERANCE,
    SUPPORTED_DIMENSIONS,
)
from .errors import ConfigurationError
from .general_utils import unit_ball_volume


@dataclass(frozen=True)
class CellCover:
    """Lattice-centered unit cells covering B_R."""

    R: float
    d: int
    geometry: str
    centers: np.ndarray
    cell_volume: float

    def __post_init__(self) -> None:
        self.centers.setflags(write=False)

    @property
    def count(self) -> int:
        return int(self.centers.shape[0])

    @property
    def cover_id(self) -> str:
        return f"{self.geometry}-d{self.d}-R{self.R:g}"


def cell_volume(geometry: str, d: int) -> float:
    """Volume of one cell: 1 for unit cubes, v_d (1/2)^d for inscribed balls."""
    if geometry == "cube":
        return 1.0
    return unit_ball_volume(d) * BALL_CELL_RADIUS**d


def lattice_points(R: float, d: int) -> np.ndarray:
    """All integer points c with |c| <= R, in lexicographic order."""
    reach = math.floor(R + LATTICE_TOLERANCE)
    axis = np.arange(-reach, reach + 1)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    points = np.column_stack([grid.ravel() for grid in grids]).astype(float)
    inside = np.sum(points * points, axis=1) <= R * R + LATTICE_TOLERANCE
    return points[inside]


def build_cover(R: float, d: int, geometry: str = "cube") -> CellCover:
    """Build the lattice cover of B_R with the requested cell geometry."""
    if R < 1:
        message = f"cover radius must be >= 1, got {R}"
        raise ConfigurationError(message)
    if d not in SUPPORTED_DIMENSIONS:
        message = f"cover dimension must be one of {SUPPORTED_DIMENSIONS}, got {d}"
        raise ConfigurationError(message)
    if geometry not in CELL_GEOMETRIES:
        message = f"unknown cell geometry '{geometry}'"
        raise ConfigurationError(message)

    return CellCover(
        R=float(R),
        d=d,
        geometry=geometry,
        centers=lattice_points(R, d),
        cell_volume=cell_volume(geometry, d),
    )


def ball_fourier(
    radius: np.ndarray, d: int, rho: float = BALL_CELL_RADIUS,
) -> np.ndarray:
    """Radial profile of the Fourier transform of the ball of radius rho.

    rho^(d/2) J_{d/2}(2 pi rho s) / s^(d/2), with the limit v_d rho^d at s = 0.
    """
    order = d / 2.0
    safe = np.where(radius > 0, radius, 1.0)
    values = rho**order * jv(order, 2.0 * math.pi * rho * safe) / safe**order
    return np.where(radius > 0, values, unit_ball_volume(d) * rho**d)


def cell_fourier(geometry: str, d: int, xi: object) -> np.ndarray | float:
    """Fourier transform of the origin-centered cell, int e^{2 pi i xi.x} dx.

    Accepts a single frequency of shape (d,) or an array of shape (..., d). Both cell
    shapes are symmetric, so the transform is real and even.
    """
    frequencies = np.asarray(xi, dtype=float)
    if frequencies.shape[-1] != d:
        message = f"frequency has dimension {frequencies.shape[-1]}, expected {d}"
        raise ConfigurationError(message)

    if geometry == "cube":
        values = np.prod(np.sinc(frequencies), axis=-1)
    elif geometry == "ball":
        values = ball_fourier(np.linalg.norm(frequencies, axis=-1), d)
    else:
        message = f"unknown cell geometry '{geometry}'"
        raise ConfigurationError(message)

    return float(values) if np.ndim(values) == 0 else values
