"""Random weights built from unit cells and their mass statistics.

A weight is w = sum_k m_k 1_{alpha_k}, stored sparsely as the sorted support indices
of a cover together with positive integer multiplicities. Three random models are
provided: independent selectors (each cell kept with probability delta), and the two
readings of the uniform-draw model (with and without replacement).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .config import MODEL_TAGS, ModelSpec
from .cover_utils import CellCover, build_cover
from .errors import ConfigurationError
from .general_utils import make_rng

UNIT_MULTIPLICITY_TAGS = ("selector", "carbery-without-replacement")


@dataclass(frozen=True)
class Weight:
    """Sparse multiplicity map over the cells of a cover."""

    cover: CellCover
    indices: np.ndarray
    multiplicities: np.ndarray
    model_tag: str = "custom"
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.model_tag not in MODEL_TAGS:
            message = f"unknown weight model tag '{self.model_tag}'"
            raise ConfigurationError(message)
        if self.indices.shape != self.multiplicities.shape:
            message = "indices and multiplicities must have the same length"
            raise ConfigurationError(message)
        if self.indices.size:
            if self.indices.min() < 0 or self.indices.max() >= self.cover.count:
                message = "weight support indices fall outside the cover"
                raise ConfigurationError(message)
            if np.any(np.diff(self.indices) <= 0):
                message = "weight support indices must be strictly increasing"
                raise ConfigurationError(message)
            if self.multiplicities.min() < 1:
                message = "weight multiplicities must be >= 1"
                raise ConfigurationError(message)
        unit_only = self.model_tag in UNIT_MULTIPLICITY_TAGS
        if unit_only and np.any(self.multiplicities != 1):
            message = f"{self.model_tag} weights carry unit multiplicities only"
            raise ConfigurationError(message)
        self.indices.setflags(write=False)
        self.multiplicities.setflags(write=False)

    @property
    def support_size(self) -> int:
        return int(self.indices.size)

    @property
    def centers(self) -> np.ndarray:
        """Centers of the support cells."""
        return self.cover.centers[self.indices]

    @property
    def weight_id(self) -> str:
        return f"{self.model_tag}-seed{self.seed}"

    def dense(self) -> np.ndarray:
        """Multiplicity of every cover cell, zeros included."""
        values = np.zeros(self.cover.count, dtype=np.int64)
        values[self.indices] = self.multiplicities
        return values


def make_weight(
    cover: CellCover,
    indices: object,
    multiplicities: object,
    model_tag: str = "custom",
    seed: int | None = None,
) -> Weight:
    """Build a weight from (possibly unsorted) indices and multiplicities."""
    index_array = np.asarray(indices, dtype=np.int64).ravel()
    mult_array = np.asarray(multiplicities, dtype=np.int64).ravel()
    order = np.argsort(index_array, kind="stable")
    return Weight(cover, index_array[order], mult_array[order], model_tag, seed)


def custom_weight(
    cover: CellCover, indices: object, multiplicities: object = None,
) -> Weight:
    """Weight on chosen cells; multiplicities default to 1."""
    index_array = np.asarray(indices, dtype=np.int64).ravel()
    if multiplicities is None:
        multiplicities = np.ones_like(index_array)
    return make_weight(cover, index_array, multiplicities)


def full_weight(cover: CellCover) -> Weight:
    """Every cell with multiplicity 1, that is w = 1 on the union of the cells."""
    indices = np.arange(cover.count, dtype=np.int64)
    return Weight(cover, indices, np.ones_like(indices), "full")


def selection_probability(R: float, c: float, lam: float) -> float:
    """delta = min(1, c R^(lambda - 1))."""
    return min(1.0, c * R ** (lam - 1.0))


def sample_selector_weight(
    cover: CellCover,
    c: float = 1.0,
    lam: float = 0.0,
    seed: int = 0,
) -> Weight:
    """Keep each cell independently with probability delta = min(1, c R^(lambda-1))."""
    if not 0 <= lam < 1:
        message = f"lambda must lie in [0, 1), got {lam}"
        raise ConfigurationError(message)
    if c < 0:
        message = f"selector constant c must be nonnegative, got {c}"
        raise ConfigurationError(message)

    delta = selection_probability(cover.R, c, lam)
    rng = make_rng(seed)
    selected = np.flatnonzero(rng.random(cover.count) < delta)
    return Weight(cover, selected, np.ones_like(selected), "selector", seed)


def sample_carbery_weight(
    cover: CellCover,
    m: int,
    *,
    replacement: bool = True,
    seed: int = 0,
) -> Weight:
    """Draw m cells uniformly; with replacement the multiplicities accumulate."""
    if m < 1:
        message = f"number of draws must be >= 1, got {m}"
        raise ConfigurationError(message)

    rng = make_rng(seed)
    if replacement:
        draws = rng.integers(0, cover.count, size=m)
        indices, counts = np.unique(draws, return_counts=True)
        return Weight(cover, indices, counts, "carbery-with-replacement", seed)

    if m > cover.count:
        message = f"cannot draw {m} distinct cells from a cover of {cover.count}"
        raise ConfigurationError(message)
    indices = np.sort(rng.choice(cover.count, size=m, replace=False))
    tag = "carbery-without-replacement"
    return Weight(cover, indices, np.ones_like(indices), tag, seed)


def matched_draw_count(cover: CellCover, c: float, lam: float) -> int:
    """Number of uniform draws whose mean mass matches the selector model."""
    return max(1, round(selection_probability(cover.R, c, lam) * cover.count))


def sample_weight(cover: CellCover, model: ModelSpec, seed: int) -> Weight:
    """Sample a weight according to a model spec."""
    if model.model_tag == "selector":
        return sample_selector_weight(cover, model.c, model.lam, seed)
    if model.model_tag == "full":
        return full_weight(cover)
    if model.model_tag == "carbery":
        m = model.m
        if m is None:
            m = matched_draw_count(cover, model.c, model.lam)
        return sample_carbery_weight(cover, m, replacement=model.replacement, seed=seed)

    message = f"unknown weight model '{model.model_tag}'"
    raise ConfigurationError(message)


def weight_mass(weight: Weight) -> float:
    """L^1 norm sum_k m_k |alpha_k| of the weight."""
    return float(np.sum(weight.multiplicities)) * weight.cover.cell_volume


def truncate_weight(weight: Weight, cap: int | None = None) -> Weight:
    """Cap every multiplicity at `cap` (default 2d), the truncation min(w_k, cap)."""
    limit = 2 * weight.cover.d if cap is None else cap
    if limit < 1:
        message = f"truncation cap must be >= 1, got {limit}"
        raise ConfigurationError(message)
    capped = np.minimum(weight.multiplicities, limit)
    return Weight(weight.cover, weight.indices.copy(), capped, "custom", weight.seed)


def scale_weight(weight: Weight, q: int) -> Weight:
    """Multiply every multiplicity by a positive integer q."""
    if q < 1:
        message = f"scale factor must be a positive integer, got {q}"
        raise ConfigurationError(message)
    return Weight(
        weight.cover,
        weight.indices.copy(),
        weight.multiplicities * q,
        "custom",
        weight.seed,
    )


def combine_weights(first: Weight, second: Weight) -> Weight:
    """Cellwise sum of two weights on the same cover."""
    same_cover = first.cover is second.cover
    if not same_cover and first.cover.cover_id != second.cover.cover_id:
        message = "cannot combine weights on different covers"
        raise ConfigurationError(message)
    dense = first.dense() + second.dense()
    indices = np.flatnonzero(dense)
    return Weight(first.cover, indices, dense[indices], "custom")


def dominates(upper: Weight, lower: Weight) -> bool:
    """True when upper has at least the multiplicity of lower on every cell."""
    return bool(np.all(upper.dense() >= lower.dense()))


def weight_to_dict(weight: Weight) -> dict:
    """JSON record of a weight; `weight_from_dict` inverts it exactly."""
    cover = weight.cover
    return {
        "modelTag": weight.model_tag,
        "seed": weight.seed,
        "R": cover.R,
        "d": cover.d,
        "geometry": cover.geometry,
        "indices": weight.indices.tolist(),
        "multiplicities": weight.multiplicities.tolist(),
    }


def weight_from_dict(record: dict, cover: CellCover | None = None) -> Weight:
    """Rebuild a weight (and its cover, unless one is supplied) from its record."""
    try:
        if cover is None:
            cover = build_cover(record["R"], record["d"], record["geometry"])
        weight = Weight(
            cover,
            np.asarray(record["indices"], dtype=np.int64),
            np.asarray(record["multiplicities"], dtype=np.int64),
            record["modelTag"],
            record["seed"],
        )
    except KeyError as key_err:
        message = f"weight record is missing field {key_err}"
        raise ConfigurationError(message) from key_err

    log_message = f"Loaded {weight.weight_id} with {weight.support_size} cells"
    logging.debug(log_message)
    return weight


def expected_selector_mass(cover: CellCover, c: float, lam: float) -> float:
    """Analytic mean mass delta * count * cell volume of the selector model."""
    return selection_probability(cover.R, c, lam) * cover.count * cover.cell_volume


def inclusion_probability(count: int, m: int) -> float:
    """Probability that a given cell is hit at least once in m uniform draws."""
    return 1.0 - math.exp(m * math.log1p(-1.0 / count)) if count > 1 else 1.0
