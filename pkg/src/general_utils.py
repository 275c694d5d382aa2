"""Miscellaneous helpers shared by the numerical modules.

Seed derivation, small geometric constants, and argument checks that several modules
need live here so they behave identically everywhere.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gamma

from .errors import ConfigurationError, DimensionError


def derive_seed(master_seed: int, *counters: int) -> int:
    """Derive an independent 63-bit seed from a master seed and integer counters.

    The result depends only on (master_seed, counters), never on the order in which
    seeds are requested, so trials can run on any number of workers.
    """
    sequence = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(counters))
    return int(sequence.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def make_rng(seed: int | np.random.Generator | None) -> np.random.Generator:
    """Return a generator for a seed, passing existing generators through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def unit_ball_volume(d: int) -> float:
    """Volume v_d of the unit ball in R^d."""
    return math.pi ** (d / 2) / float(gamma(d / 2 + 1))


def as_coefficients(values: object, expected: int, what: str = "g") -> np.ndarray:
    """Convert node values to a complex vector, checking its length."""
    array = np.asarray(values, dtype=complex)
    if array.ndim != 1 or array.shape[0] != expected:
        message = f"{what} has shape {array.shape}, expected ({expected},)"
        raise DimensionError(message)
    return array


def as_points(points: object, d: int, what: str = "points") -> np.ndarray:
    """Convert a point or list of points to an (n, d) float array."""
    array = np.atleast_2d(np.asarray(points, dtype=float))
    if array.shape[-1] != d:
        message = f"{what} have dimension {array.shape[-1]}, expected {d}"
        raise DimensionError(message)
    return array


def check_same_dimension(first: int, second: int, what: str) -> None:
    """Raise a configuration error when two ambient dimensions differ."""
    if first != second:
        message = f"{what}: dimension {first} does not match {second}"
        raise ConfigurationError(message)


def relative_change(reference: float, value: float) -> float:
    """Relative change |value - reference| / |reference| (0 when both vanish)."""
    if reference == 0:
        return 0.0 if value == 0 else math.inf
    return abs(value - reference) / abs(reference)
