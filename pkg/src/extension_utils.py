"""Extension operator, weighted Gram assembly and cell-integral seminorms.

For g given by its values at the quadrature nodes,

    Eg(x) = sum_j sigma_j g_j e^{2 pi i w_j.x}.

Writing h_j = sqrt(sigma_j) g_j, the weighted energy int |Eg|^2 w equals
h^T A conj(h) with

    A_jl = sqrt(sigma_j sigma_l) sum_k m_k e^{2 pi i (w_j - w_l).c_k} F(w_j - w_l),

where F is the Fourier transform of one origin-centered cell. ||h||_2 is the
L^2(surface) norm of g, so the top eigenvalue of A is the weighted supremum, and a top
eigenvector v gives the maximizing density g = conj(v) / sqrt(sigma).
"""

from __future__ import annotations

import logging
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from scipy.spatial.distance import pdist

from .config import GRAM_ROW_BLOCK
from .cover_utils import cell_fourier
from .errors import ConfigurationError, PreconditionError
from .general_utils import as_coefficients, as_points, check_same_dimension
from .task_utils import run_in_parallel

if TYPE_CHECKING:
    from .cover_utils import CellCover
    from .surface_utils import QuadratureRule
    from .weight_utils import Weight

EVALUATION_CHUNK = 4096
GRAM_MAGIC = b"MTGRAM01"


@dataclass(frozen=True)
class GramMatrix:
    """Hermitian PSD matrix of the weighted quadratic form, with provenance."""

    matrix: np.ndarray
    d: int
    rule_id: str
    weight_id: str

    @property
    def M(self) -> int:  # noqa: N802
        return int(self.matrix.shape[0])


@dataclass(frozen=True)
class SeparatedSumRecord:
    """Point-sample energy against the R^(eps d)-scaled ball energy."""

    lhs: float
    rhs_main: float
    ratio: float


def phase_matrix(nodes: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Matrix of phases e^{2 pi i w_j.x_k}, shape (nodes, points)."""
    return np.exp(2j * math.pi * (nodes @ points.T))


def evaluate_extension(
    rule: QuadratureRule, g: object, x: object,
) -> complex | np.ndarray:
    """Eg at one point (returns a complex) or at an (n, d) array of points."""
    values = as_coefficients(g, rule.M)
    single = np.ndim(x) == 1
    points = as_points(x, rule.d, "evaluation points")

    weighted = rule.weights * values
    result = np.empty(points.shape[0], dtype=complex)
    for start in range(0, points.shape[0], EVALUATION_CHUNK):
        chunk = points[start : start + EVALUATION_CHUNK]
        phases = phase_matrix(rule.nodes, chunk)
        result[start : start + EVALUATION_CHUNK] = weighted @ phases

    return complex(result[0]) if single else result


def gram_row_block(
    bounds: tuple[int, int],
    rule: QuadratureRule,
    weighted_phases: np.ndarray,
    phases: np.ndarray,
    geometry: str,
) -> np.ndarray:
    """Rows [start, stop) of the Gram matrix."""
    start, stop = bounds
    lattice_sum = weighted_phases[start:stop] @ phases.conj().T
    differences = rule.nodes[start:stop, None, :] - rule.nodes[None, :, :]
    transform = cell_fourier(geometry, rule.d, differences)
    scale = np.sqrt(rule.weights[start:stop, None] * rule.weights[None, :])
    return scale * lattice_sum * transform


def gram_from_centers(
    rule: QuadratureRule,
    centers: np.ndarray,
    multiplicities: np.ndarray,
    geometry: str,
    workers: int | None = 1,
) -> np.ndarray:
    """Assemble the Gram matrix for cells at arbitrary centers.

    Rows are computed in blocks of fixed size, so the result does not depend on how
    many workers share the blocks. The upper triangle is mirrored to make the matrix
    exactly Hermitian, and the diagonal is set to its closed form
    sigma_j * sum_k m_k F(0).
    """
    M = rule.M  # noqa: N806
    if centers.shape[0] == 0:
        return np.zeros((M, M), dtype=complex)

    phases = phase_matrix(rule.nodes, centers)
    weighted_phases = phases * multiplicities[None, :]
    blocks = [
        (start, min(start + GRAM_ROW_BLOCK, M)) for start in range(0, M, GRAM_ROW_BLOCK)
    ]
    rows = run_in_parallel(
        gram_row_block,
        blocks,
        rule,
        weighted_phases,
        phases,
        geometry,
        workers=workers,
    )
    matrix = np.vstack(rows)

    upper = np.triu(matrix, 1)
    matrix = upper + upper.conj().T
    origin = cell_fourier(geometry, rule.d, np.zeros(rule.d))
    np.fill_diagonal(matrix, rule.weights * float(np.sum(multiplicities)) * origin)
    return matrix


def assemble_gram(
    rule: QuadratureRule,
    weight: Weight,
    workers: int | None = 1,
) -> GramMatrix:
    """Gram matrix whose quadratic form is int |Eg|^2 w."""
    check_same_dimension(rule.d, weight.cover.d, "surface and weight")
    matrix = gram_from_centers(
        rule,
        weight.centers,
        weight.multiplicities.astype(float),
        weight.cover.geometry,
        workers=workers,
    )
    return GramMatrix(matrix, rule.d, rule.rule_id, weight.weight_id)


def quadratic_form(gram: GramMatrix, rule: QuadratureRule, g: object) -> float:
    """h^T A conj(h) with h = sqrt(sigma) g, equal to int |Eg|^2 w."""
    conjugate = np.conj(np.sqrt(rule.weights) * as_coefficients(g, rule.M))
    return float(np.real(np.vdot(conjugate, gram.matrix @ conjugate)))


def density_from_eigenvector(rule: QuadratureRule, vector: np.ndarray) -> np.ndarray:
    """Node values g whose energy h^T A conj(h) equals v* A v."""
    return np.conj(as_coefficients(vector, rule.M)) / np.sqrt(rule.weights)


def cell_integrals(
    rule: QuadratureRule,
    cover: CellCover,
    g: object,
    *,
    cosine: bool = False,
) -> np.ndarray:
    """int over each cell of Eg (or of the cosine operator), for every cover cell.

    Uses int_{cell at c} e^{2 pi i w.x} dx = e^{2 pi i w.c} F(w); the cosine variant
    keeps the real part of the phase, cos(2 pi w.c) F(w), since F is real and even.
    """
    check_same_dimension(rule.d, cover.d, "surface and cover")
    values = as_coefficients(g, rule.M)
    transform = cell_fourier(cover.geometry, rule.d, rule.nodes)
    amplitudes = rule.weights * values * transform
    phases = phase_matrix(rule.nodes, cover.centers)
    if cosine:
        phases = phases.real
    return amplitudes @ phases


def seminorm_tilde(
    rule: QuadratureRule,
    cover: CellCover,
    g: object,
    *,
    cosine: bool = False,
) -> float:
    """max_k |int_{alpha_k} Eg(x) dx| over the cells of the cover."""
    integrals = cell_integrals(rule, cover, g, cosine=cosine)
    return float(np.max(np.abs(integrals))) if integrals.size else 0.0


def ball_grid(radius: float, spacing: float, d: int) -> np.ndarray:
    """Midpoint grid of the given spacing restricted to the ball of a radius."""
    cells = math.ceil(radius / spacing)
    axis = spacing * (np.arange(-cells, cells) + 0.5)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    points = np.column_stack([grid.ravel() for grid in grids])
    return points[np.sum(points * points, axis=1) <= radius * radius]


def separated_sum_check(
    rule: QuadratureRule,
    points: object,
    g: object,
    R: float,
    eps: float,
) -> SeparatedSumRecord:
    """Compare sum_j |Eg(x_j)|^2 with R^(eps d) int_{B_2R} |Eg|^2.

    The points must be R^-eps separated and lie in B_R; the ball integral uses a
    midpoint grid of spacing min(1/4, R^-eps / 2).
    """
    samples = as_points(points, rule.d)
    separation = R ** (-eps)
    if np.any(np.linalg.norm(samples, axis=1) > R + 1e-12):
        message = f"every point must lie in B_R with R={R}"
        raise PreconditionError(message)
    if samples.shape[0] > 1 and np.min(pdist(samples)) < separation - 1e-12:
        message = f"points are not {separation:.6g}-separated"
        raise PreconditionError(message)

    lhs = float(np.sum(np.abs(evaluate_extension(rule, g, samples)) ** 2))
    if lhs == 0:
        return SeparatedSumRecord(0.0, 0.0, 0.0)

    spacing = min(0.25, separation / 2.0)
    grid = ball_grid(2.0 * R, spacing, rule.d)
    values = evaluate_extension(rule, g, grid)
    energy = float(np.sum(np.abs(values) ** 2)) * spacing**rule.d
    rhs_main = R ** (eps * rule.d) * energy
    ratio = lhs / rhs_main if rhs_main > 0 else math.inf
    return SeparatedSumRecord(lhs, rhs_main, ratio)


def greedy_separated_points(
    R: float,
    eps: float,
    count: int,
    d: int,
    rng: np.random.Generator,
    max_attempts: int | None = None,
) -> np.ndarray:
    """Greedily pack up to `count` uniformly drawn R^-eps separated points in B_R."""
    separation = R ** (-eps)
    attempts = max_attempts if max_attempts is not None else 100 * count
    accepted: list[np.ndarray] = []

    for _ in range(attempts):
        if len(accepted) == count:
            break
        direction = rng.standard_normal(d)
        direction /= np.linalg.norm(direction)
        candidate = R * rng.random() ** (1.0 / d) * direction
        if all(np.linalg.norm(candidate - point) >= separation for point in accepted):
            accepted.append(candidate)

    if len(accepted) < count:
        log_message = f"Packed {len(accepted)} of {count} separated points"
        logging.warning(log_message)
    return np.array(accepted).reshape(-1, d)


def dump_gram(gram: GramMatrix, path: str | Path, seed: int | None) -> Path:
    """Write a Gram matrix as magic, header {M, d, seed} and row-major complex128.

    Everything is little-endian; a missing seed is stored as -1.
    """
    target = Path(path)
    stored_seed = -1 if seed is None else seed
    header = struct.pack("<8sqqq", GRAM_MAGIC, gram.M, gram.d, stored_seed)
    with target.open("wb") as file:
        file.write(header)
        file.write(np.ascontiguousarray(gram.matrix, dtype="<c16").tobytes(order="C"))
    return target


def load_gram(path: str | Path) -> tuple[np.ndarray, int, int | None]:
    """Read a matrix written by `dump_gram`; returns (matrix, d, seed)."""
    data = Path(path).read_bytes()
    header_size = struct.calcsize("<8sqqq")
    magic, M, d, seed = struct.unpack("<8sqqq", data[:header_size])  # noqa: N806
    if magic != GRAM_MAGIC:
        message = f"{path}: not a Gram matrix dump"
        raise ConfigurationError(message)
    matrix = np.frombuffer(data[header_size:], dtype="<c16").reshape(M, M)
    return matrix.copy(), d, None if seed < 0 else seed
