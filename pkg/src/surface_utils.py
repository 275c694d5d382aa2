"""Quadrature rules that discretize a compact hypersurface inside the unit ball.

A rule is a list of nodes on the surface with positive weights; functions on the
surface are represented by their values at the nodes, and L^2(surface) integrals become
weighted sums.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .config import (
    CAP_HALF_WIDTH,
    MIN_NODES,
    NODES_PER_RADIUS,
    NODES_PER_RADIUS_SQUARED,
    SUPPORTED_DIMENSIONS,
    SURFACE_KINDS,
)
from .errors import ConfigurationError
from .general_utils import as_coefficients

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights representing (surface, surface measure)."""

    kind: str
    d: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        if self.nodes.shape != (self.weights.shape[0], self.d):
            count = self.weights.shape[0]
            message = f"nodes {self.nodes.shape} do not match {count} weights"
            raise ConfigurationError(message)
        if np.any(self.weights <= 0):
            message = "quadrature weights must be positive"
            raise ConfigurationError(message)
        if np.any(np.linalg.norm(self.nodes, axis=1) > 1 + 1e-12):
            message = "surface nodes must lie in the closed unit ball"
            raise ConfigurationError(message)
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def M(self) -> int:  # noqa: N802
        return int(self.weights.shape[0])

    @property
    def rule_id(self) -> str:
        return f"{self.kind}-d{self.d}-M{self.M}"

    @property
    def total_measure(self) -> float:
        return float(np.sum(self.weights))


def default_node_count(d: int, R: float) -> int:
    """Node count whose spacing resolves phases e^{2 pi i w.x} for |x| <= R."""
    if d == 2:  # noqa: PLR2004
        return max(MIN_NODES, math.ceil(NODES_PER_RADIUS * R))
    return max(MIN_NODES, math.ceil(NODES_PER_RADIUS_SQUARED * R * R))


def circle_rule(M: int) -> QuadratureRule:  # noqa: N803
    """Equispaced angles on the unit circle, each weighted 2 pi / M."""
    angles = 2.0 * math.pi * np.arange(M) / M
    nodes = np.column_stack((np.cos(angles), np.sin(angles)))
    return QuadratureRule("circle", 2, nodes, np.full(M, 2.0 * math.pi / M))


def sphere_rule(M: int) -> QuadratureRule:  # noqa: N803
    """Fibonacci lattice on the unit sphere with equal weights 4 pi / M."""
    index = np.arange(M)
    z = 1.0 - (2.0 * index + 1.0) / M
    radius = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    azimuth = GOLDEN_ANGLE * index
    nodes = np.column_stack((radius * np.cos(azimuth), radius * np.sin(azimuth), z))
    return QuadratureRule("sphere", 3, nodes, np.full(M, 4.0 * math.pi / M))


def cap_rule(kind: str, d: int, M: int) -> QuadratureRule:  # noqa: N803
    """Midpoint tensor grid on [-1/2, 1/2]^(d-1), lifted to a graph over the box.

    The paraboloid cap is the graph of |t|^2 / 2, the planar cap the graph of 0; the
    weights are the cell area times the surface element sqrt(1 + |grad|^2).
    """
    side = M if d == 2 else math.ceil(math.sqrt(M))  # noqa: PLR2004
    if side ** (d - 1) != M:
        log_message = f"{kind} in d={d}: using {side ** (d - 1)} nodes instead of {M}"
        logging.warning(log_message)

    step = 2.0 * CAP_HALF_WIDTH / side
    axis = -CAP_HALF_WIDTH + step * (np.arange(side) + 0.5)
    grids = np.meshgrid(*([axis] * (d - 1)), indexing="ij")
    params = np.column_stack([grid.ravel() for grid in grids])
    squared = np.sum(params * params, axis=1)

    if kind == "paraboloid-cap":
        height = squared / 2.0
        element = np.sqrt(1.0 + squared)
    else:
        height = np.zeros_like(squared)
        element = np.ones_like(squared)

    nodes = np.column_stack((params, height))
    weights = step ** (d - 1) * element
    return QuadratureRule(kind, d, nodes, weights)


def build_surface(kind: str, d: int, M: int) -> QuadratureRule:  # noqa: N803
    """Build the quadrature rule for a supported (kind, dimension) pair."""
    if d not in SUPPORTED_DIMENSIONS or kind not in SURFACE_KINDS[d]:
        message = f"surface kind '{kind}' is not available in dimension {d}"
        raise ConfigurationError(message)
    if M < MIN_NODES:
        message = f"surface needs at least {MIN_NODES} nodes, got {M}"
        raise ConfigurationError(message)

    if kind == "circle":
        return circle_rule(M)
    if kind == "sphere":
        return sphere_rule(M)
    return cap_rule(kind, d, M)


def refine_surface(rule: QuadratureRule) -> QuadratureRule:
    """Same surface with twice as many nodes, for the convergence guard."""
    return build_surface(rule.kind, rule.d, 2 * rule.M)


def surface_l2_norm(rule: QuadratureRule, g: object) -> float:
    """L^2(surface) norm of node values g, (sum_j sigma_j |g_j|^2)^(1/2)."""
    values = as_coefficients(g, rule.M)
    return float(np.sqrt(np.sum(rule.weights * np.abs(values) ** 2)))
