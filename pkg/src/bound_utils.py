"""Closed-form concentration bounds and Monte Carlo checks of their tails.

Three bounds are covered: a Bennett-type bound for weighted centered selector sums, the
selector-count bound exp(-(u/8) log(u / (2 delta |I|))), and the Chernoff bound
(C/t)^t for the number of selected cells along one tube. A tail study simulates the
matching sum, records how often each threshold is reached and sets the frequency
next to the bound.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .config import (
    BOUND_NAMES,
    DOMINANCE_CEILING,
    DOMINANCE_SIGMAS,
    TAIL_BATCH,
    TAIL_COLUMNS,
    TailSpec,
)
from .errors import ConfigurationError, DomainError
from .general_utils import derive_seed, make_rng
from .task_utils import run_in_parallel

if TYPE_CHECKING:
    from rich.progress import Progress

DEFAULT_GRID_POINTS = 16


def check_delta(delta: float) -> None:
    if not 0 <= delta <= 1:
        message = f"selection probability must lie in [0, 1], got {delta}"
        raise DomainError(message)


def bennett_exponent(a: object, delta: float, t: float) -> float:
    """-(t/|a|_inf) log(t |a|_inf / (delta |a|_2^2)), the log of `bennett_bound`."""
    coefficients = np.asarray(a, dtype=float).ravel()
    sup_norm = float(np.max(np.abs(coefficients))) if coefficients.size else 0.0
    if sup_norm == 0:
        message = "Bennett bound needs a nonzero coefficient vector"
        raise ConfigurationError(message)
    check_delta(delta)
    if t <= 0:
        message = f"threshold must be positive, got {t}"
        raise DomainError(message)
    if delta == 0:
        return -math.inf

    variance_proxy = delta * float(coefficients @ coefficients)
    return -(t / sup_norm) * math.log(t * sup_norm / variance_proxy)


def bennett_bound(a: object, delta: float, t: float) -> float:
    """P(sum a_k Z_k >= t) <= exp(-(t/|a|_inf) log(t |a|_inf / (delta |a|_2^2))).

    Values above 1 are returned unclamped; delta = 0 gives the limit 0.
    """
    return math.exp(bennett_exponent(a, delta, t))


def selector_tail_bound(card_i: int, delta: float, u: float) -> float:
    """Selector tail: P(sum_I delta_k >= u) <= exp(-(u/8) log(u / (2 delta |I|))).

    Valid for u >= 2 delta |I|.
    """
    if card_i < 1:
        message = f"index set must be nonempty, got card(I)={card_i}"
        raise ConfigurationError(message)
    check_delta(delta)
    floor = 2.0 * delta * card_i
    if u < floor or u <= 0:
        message = (
            f"u={u} lies outside the validity domain u >= 2 delta card(I) = {floor}"
        )
        raise DomainError(message)
    if delta == 0:
        return 0.0
    return math.exp(-(u / 8.0) * math.log(u / floor))


def chernoff_tube_bound(t: float, C: float) -> float:  # noqa: N803
    """(C/t)^t, the binomial large-deviation bound for one tube's occupancy."""
    if t <= 0:
        message = f"threshold must be positive, got {t}"
        raise DomainError(message)
    if C == 0:
        return 0.0
    return math.exp(t * math.log(C / t))


def tube_union_bound(R: float, d: int, t: float, C: float) -> float:  # noqa: N803
    """R^(2(d-1)) (C/t)^t, the union over a family of ~R^(2(d-1)) tubes."""
    return R ** (2 * (d - 1)) * chernoff_tube_bound(t, C)


def cells_per_tube(spec: TailSpec) -> int:
    return spec.cells_per_tube if spec.cells_per_tube is not None else math.ceil(spec.R)


def chernoff_constant(spec: TailSpec) -> float:
    """Pinned C, defaulting to e * n * delta for n cells along a tube."""
    return spec.C if spec.C is not None else math.e * cells_per_tube(spec) * spec.delta


def default_thresholds(spec: TailSpec) -> tuple[float, ...]:
    """Threshold grid starting where each bound stops being vacuous."""
    if spec.bound == "bennett":
        start = max(spec.delta * spec.size, 1.0)
        stop = (1.0 - spec.delta) * spec.size
        return tuple(np.linspace(start, max(stop, start + 1.0), DEFAULT_GRID_POINTS))
    if spec.bound == "selector":
        start = max(2.0 * spec.delta * spec.card_i, 1.0)
        stop = max(spec.card_i, start + 1.0)
        return tuple(np.linspace(start, stop, DEFAULT_GRID_POINTS))

    count = cells_per_tube(spec)
    steps = np.arange(1, min(count, 2 * DEFAULT_GRID_POINTS) + 1, dtype=float)
    return tuple(np.unique(np.append(steps, math.log(spec.R))))


def analytic_bound(spec: TailSpec, threshold: float) -> float:
    if spec.bound == "bennett":
        return bennett_bound(np.ones(spec.size), spec.delta, threshold)
    if spec.bound == "selector":
        return selector_tail_bound(spec.card_i, spec.delta, threshold)
    return chernoff_tube_bound(threshold, chernoff_constant(spec))


@dataclass(frozen=True)
class TailStudy:
    """Empirical exceedance frequencies next to an analytic tail bound."""

    bound: str
    params: dict
    thresholds: tuple[float, ...]
    empirical: tuple[float, ...]
    stderr: tuple[float, ...]
    bounds: tuple[float, ...]
    samples: int = field(default=0)

    def rows(self) -> list[dict]:
        columns = zip(
            self.thresholds, self.empirical, self.stderr, self.bounds, strict=True,
        )
        return [dict(zip(TAIL_COLUMNS, values, strict=True)) for values in columns]

    def dominance_holds(self) -> bool:
        """empirical <= bound + 3 standard errors wherever bound <= 0.5."""
        return all(
            frequency <= bound + DOMINANCE_SIGMAS * error
            for frequency, error, bound in zip(
                self.empirical, self.stderr, self.bounds, strict=True,
            )
            if bound <= DOMINANCE_CEILING
        )


def simulate_batch(
    batch: tuple[int, int],
    spec: TailSpec,
    thresholds: np.ndarray,
    seed: int,
) -> np.ndarray:
    """Exceedance counts per threshold for one batch of simulated sums."""
    index, size = batch
    rng = make_rng(derive_seed(seed, index))
    if spec.bound == "bennett":
        selected = rng.random((size, spec.size)) < spec.delta
        sums = np.sum(selected, axis=1) - spec.delta * spec.size
    elif spec.bound == "selector":
        sums = rng.binomial(spec.card_i, spec.delta, size=size).astype(float)
    else:
        sums = rng.binomial(cells_per_tube(spec), spec.delta, size=size).astype(float)
    return np.sum(sums[:, None] >= thresholds[None, :], axis=0)


def tail_study(
    spec: TailSpec,
    seed: int,
    workers: int | None = None,
    job_progress: Progress | None = None,
) -> TailStudy:
    """Simulate the sum behind the named bound and tabulate tail frequencies."""
    if spec.bound not in BOUND_NAMES:
        message = f"unknown bound '{spec.bound}', expected one of {BOUND_NAMES}"
        raise ConfigurationError(message)
    check_delta(spec.delta)
    if spec.samples < 1:
        message = f"tail study needs at least one sample, got {spec.samples}"
        raise ConfigurationError(message)

    thresholds = np.asarray(
        spec.thresholds if spec.thresholds is not None else default_thresholds(spec),
        dtype=float,
    )
    if np.any(thresholds <= 0) or np.any(np.diff(thresholds) <= 0):
        message = "tail thresholds must be positive and strictly increasing"
        raise ConfigurationError(message)

    bounds = [analytic_bound(spec, float(threshold)) for threshold in thresholds]
    batches = [
        (index, min(TAIL_BATCH, spec.samples - start))
        for index, start in enumerate(range(0, spec.samples, TAIL_BATCH))
    ]
    counts = run_in_parallel(
        simulate_batch,
        batches,
        spec,
        thresholds,
        seed,
        workers=workers,
        job_progress=job_progress,
        description=f"Tail {spec.bound}",
    )
    frequencies = np.sum(counts, axis=0) / spec.samples
    errors = np.sqrt(frequencies * (1.0 - frequencies) / spec.samples)

    vacuous = sum(bound > 1 for bound in bounds)
    if vacuous:
        log_message = (
            f"{vacuous} of {len(bounds)} {spec.bound} bounds exceed 1 (vacuous)"
        )
        logging.warning(log_message)

    params = {
        "bound": spec.bound,
        "delta": spec.delta,
        "samples": spec.samples,
        "seed": seed,
    }
    if spec.bound == "bennett":
        params["size"] = spec.size
    elif spec.bound == "selector":
        params["cardI"] = spec.card_i
    else:
        params.update(
            {
                "R": spec.R,
                "cellsPerTube": cells_per_tube(spec),
                "C": chernoff_constant(spec),
            },
        )

    study = TailStudy(
        bound=spec.bound,
        params=params,
        thresholds=tuple(float(value) for value in thresholds),
        empirical=tuple(float(value) for value in frequencies),
        stderr=tuple(float(value) for value in errors),
        bounds=tuple(float(value) for value in bounds),
        samples=spec.samples,
    )
    if not study.dominance_holds():
        log_message = (
            f"Empirical {spec.bound} tail exceeds its bound beyond 3 standard errors"
        )
        logging.warning(log_message)
    return study
