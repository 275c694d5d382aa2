"""The weighted extension functional as a top eigenvalue, and studies built on it.

S(w) = sup over ||g||_{L^2(surface)} <= 1 of int |Eg|^2 w is the largest eigenvalue of
the Gram matrix assembled in `extension_utils`. This module computes it by power
iteration (with a dense oracle), averages it over random weights, and fits growth
exponents across radii.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np
from scipy.linalg import eigh

from .config import (
    CI_Z,
    CONVERGENCE_FLAG,
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    MAX_EXCLUDED_FRACTION,
    MIN_FIT_POINTS,
    TUBE_SCORING_METHOD,
    CoverSpec,
    ModelSpec,
    SurfaceSpec,
    TubeSearchSpec,
)
from .cover_utils import CellCover, build_cover
from .errors import ConfigurationError, NonConvergenceError
from .extension_utils import GramMatrix, assemble_gram
from .general_utils import derive_seed, make_rng, relative_change
from .surface_utils import (
    QuadratureRule,
    build_surface,
    default_node_count,
    refine_surface,
)
from .task_utils import run_in_parallel
from .tube_utils import tube_sup
from .weight_utils import Weight, sample_weight, truncate_weight, weight_mass

if TYPE_CHECKING:
    from rich.progress import Progress


@dataclass(frozen=True)
class MTEstimate:
    """Top eigenpair of a Gram matrix with its residual certificate."""

    value: float
    maximizer: np.ndarray
    iterations: int
    residual: float
    M: int
    convergence_change: float | None = None
    flagged: bool = False


@dataclass(frozen=True)
class TrialResult:
    index: int
    seed: int
    value: float
    mass: float
    tube_sup: float | None
    converged: bool
    truncated_value: float | None = None
    tail_mass: float | None = None


@dataclass(frozen=True)
class MonteCarloSummary:
    """Statistics of S(w) over independently sampled weights."""

    trials: int
    values: tuple[float, ...]
    seeds: tuple[int, ...]
    mean: float
    std: float
    ci95: tuple[float, float]
    excluded: tuple[int, ...]
    params: dict
    results: tuple[TrialResult, ...] = ()
    truncated_mean: float | None = None
    mean_tail_mass: float | None = None


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares slope of log(value) against log(R)."""

    exponent: float
    intercept: float
    residuals: tuple[float, ...]


@dataclass(frozen=True)
class ScalingStudy:
    rows: tuple[dict, ...]
    fit: ExponentFit | None
    mass_fit: ExponentFit | None
    tube_fit: ExponentFit | None


def as_matrix(matrix: GramMatrix | np.ndarray) -> np.ndarray:
    return matrix.matrix if isinstance(matrix, GramMatrix) else np.asarray(matrix)


def lambda_max(
    matrix: GramMatrix | np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    rng: np.random.Generator | int | None = None,
) -> MTEstimate:
    """Largest eigenvalue of a Hermitian PSD matrix by power iteration.

    Converged once the relative Rayleigh-quotient change stays below tol for two
    consecutive steps and the residual |Av - lv| is at most tol * l.
    """
    if tol <= 0 or max_iter < 1:
        message = (
            f"power iteration needs tol > 0 and max_iter >= 1, got {tol}, {max_iter}"
        )
        raise ConfigurationError(message)

    A = as_matrix(matrix)  # noqa: N806
    size = A.shape[0]
    generator = make_rng(rng)
    vector = generator.standard_normal(size) + 1j * generator.standard_normal(size)
    vector /= np.linalg.norm(vector)

    image = A @ vector
    if not np.any(image):
        return MTEstimate(0.0, vector, 0, 0.0, size)

    value = float(np.real(np.vdot(vector, image)))
    calm_steps = 0
    for iteration in range(1, max_iter + 1):
        norm = np.linalg.norm(image)
        if norm == 0:
            return MTEstimate(0.0, vector, iteration, 0.0, size)

        vector = image / norm
        image = A @ vector
        new_value = float(np.real(np.vdot(vector, image)))
        small_change = abs(new_value - value) <= tol * abs(new_value)
        calm_steps = calm_steps + 1 if small_change else 0
        value = new_value

        if calm_steps >= 2:  # noqa: PLR2004
            residual = float(np.linalg.norm(image - value * vector))
            if residual <= tol * abs(value):
                return MTEstimate(max(value, 0.0), vector, iteration, residual, size)

    message = f"power iteration did not converge in {max_iter} iterations"
    raise NonConvergenceError(message, vector, value, max_iter)


def dense_lambda_max(matrix: GramMatrix | np.ndarray) -> MTEstimate:
    """Top eigenpair from a dense Hermitian eigendecomposition."""
    A = as_matrix(matrix)  # noqa: N806
    size = A.shape[0]
    values, vectors = eigh(A, subset_by_index=[size - 1, size - 1])
    value = float(values[0])
    vector = vectors[:, 0].astype(complex)
    residual = float(np.linalg.norm(A @ vector - value * vector))
    return MTEstimate(max(value, 0.0), vector, 0, residual, size)


def solve_gram(
    gram: GramMatrix | np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int | None = None,
    method: str = "power",
) -> MTEstimate:
    """Top eigenpair by the requested method (power or dense)."""
    if method == "power":
        return lambda_max(gram, tol, max_iter, seed)
    if method == "dense":
        return dense_lambda_max(gram)

    message = f"unknown eigen method '{method}'"
    raise ConfigurationError(message)


def mt_functional(  # noqa: PLR0913
    rule: QuadratureRule,
    weight: Weight,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int | None = None,
    *,
    method: str = "power",
    check_convergence: bool = False,
    workers: int | None = 1,
) -> MTEstimate:
    """Discretized S(w) for one weight, optionally with the M -> 2M change."""
    gram = assemble_gram(rule, weight, workers)
    estimate = solve_gram(gram, tol, max_iter, seed, method)
    if not check_convergence:
        return estimate

    refined_rule = refine_surface(rule)
    refined = solve_gram(
        assemble_gram(refined_rule, weight, workers), tol, max_iter, seed, method,
    )
    change = relative_change(refined.value, estimate.value) if refined.value else 0.0
    flagged = change > CONVERGENCE_FLAG
    if flagged:
        log_message = (
            f"S(w) for {weight.weight_id} changes by {change:.3%} when M goes "
            f"{rule.M} -> {refined_rule.M}"
        )
        logging.warning(log_message)
    return replace(estimate, convergence_change=change, flagged=flagged)


def surface_for(spec: SurfaceSpec, R: float) -> QuadratureRule:
    """Build the rule named by a surface spec, defaulting M from the radius."""
    M = spec.M if spec.M is not None else default_node_count(spec.d, R)  # noqa: N806
    return build_surface(spec.kind, spec.d, M)


@dataclass(frozen=True)
class TrialContext:
    rule: QuadratureRule
    cover: CellCover
    model: ModelSpec
    master_seed: int
    counters: tuple[int, ...]
    tol: float
    max_iter: int
    tube_search: TubeSearchSpec | None = None
    method: str = "power"
    truncate: bool = False


def measure(context: TrialContext, weight: Weight, seed: int) -> float:
    return mt_functional(
        context.rule,
        weight,
        context.tol,
        context.max_iter,
        seed,
        method=context.method,
    ).value


def run_trial(index: int, context: TrialContext) -> TrialResult:
    """Sample one weight and measure it; non-convergence marks the trial.

    Carbery weights are also measured after truncation at 2d, together with the
    mass cut off by the truncation.
    """
    seed = derive_seed(context.master_seed, *context.counters, index)
    weight = sample_weight(context.cover, context.model, seed)
    mass = weight_mass(weight)
    occupancy = None
    if context.tube_search is not None:
        occupancy = tube_sup(weight, context.tube_search).value

    truncated = truncate_weight(weight) if context.truncate else None
    try:
        value = measure(context, weight, derive_seed(seed, 1))
        truncated_value = None
        if truncated is not None:
            truncated_value = measure(context, truncated, derive_seed(seed, 2))
    except NonConvergenceError as conv_err:
        log_message = f"Trial {index} (seed {seed}) excluded: {conv_err}"
        logging.warning(log_message)
        return TrialResult(index, seed, math.nan, mass, occupancy, converged=False)

    tail_mass = None if truncated is None else mass - weight_mass(truncated)
    return TrialResult(
        index,
        seed,
        value,
        mass,
        occupancy,
        converged=True,
        truncated_value=truncated_value,
        tail_mass=tail_mass,
    )


def summarize(results: list[TrialResult], params: dict) -> MonteCarloSummary:
    """Reduce trial results, in trial-index order, to summary statistics."""
    ordered = sorted(results, key=lambda result: result.index)
    kept = [result for result in ordered if result.converged]
    excluded = tuple(result.index for result in ordered if not result.converged)
    values = np.array([result.value for result in kept])

    if values.size == 0:
        mean = std = math.nan
    else:
        mean = float(np.mean(values))
        std = float(np.std(values, ddof=1)) if values.size > 1 else 0.0

    half_width = CI_Z * std / math.sqrt(values.size) if values.size else math.nan
    truncated = [result for result in kept if result.truncated_value is not None]
    truncated_mean = mean_tail_mass = None
    if truncated:
        truncated_mean = float(np.mean([trial.truncated_value for trial in truncated]))
        mean_tail_mass = float(np.mean([trial.tail_mass for trial in truncated]))
    return MonteCarloSummary(
        trials=len(ordered),
        values=tuple(float(value) for value in values),
        seeds=tuple(result.seed for result in kept),
        mean=mean,
        std=std,
        ci95=(mean - half_width, mean + half_width),
        excluded=excluded,
        params=params,
        results=tuple(ordered),
        truncated_mean=truncated_mean,
        mean_tail_mass=mean_tail_mass,
    )


def run_trials(
    context: TrialContext,
    N: int,  # noqa: N803
    params: dict,
    workers: int | None = None,
    job_progress: Progress | None = None,
) -> MonteCarloSummary:
    if N < 1:
        message = f"Monte Carlo needs N >= 1 trials, got {N}"
        raise ConfigurationError(message)
    results = run_in_parallel(
        run_trial,
        range(N),
        context,
        workers=workers,
        job_progress=job_progress,
        description=f"Trials R={context.cover.R:g}",
    )
    summary = summarize(results, params)
    if summary.excluded:
        log_message = f"{len(summary.excluded)} of {N} trials excluded (non-convergent)"
        logging.warning(log_message)
    if len(summary.excluded) > MAX_EXCLUDED_FRACTION * N:
        message = f"{len(summary.excluded)} of {N} trials did not converge"
        raise NonConvergenceError(message, np.empty(0), summary.mean, context.max_iter)
    return summary


def model_label(model: ModelSpec) -> str:
    """Tag that the sampled weights carry for a model spec."""
    if model.model_tag == "carbery":
        suffix = "with" if model.replacement else "without"
        return f"carbery-{suffix}-replacement"
    return model.model_tag


def expected_mt(  # noqa: PLR0913
    surface: SurfaceSpec,
    cover_spec: CoverSpec,
    model: ModelSpec,
    N: int,  # noqa: N803
    master_seed: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    *,
    workers: int | None = None,
    job_progress: Progress | None = None,
) -> MonteCarloSummary:
    """Monte Carlo estimate of E S(w) with counter-split per-trial seeds."""
    if surface.d != cover_spec.d:
        message = f"surface d={surface.d} and cover d={cover_spec.d} differ"
        raise ConfigurationError(message)

    cover = build_cover(cover_spec.R, cover_spec.d, cover_spec.geometry)
    rule = surface_for(surface, cover.R)
    context = TrialContext(
        rule,
        cover,
        model,
        master_seed,
        (),
        tol,
        max_iter,
        truncate=model.model_tag == "carbery",
    )
    params = {
        "R": cover.R,
        "d": cover.d,
        "geometry": cover.geometry,
        "surface": rule.rule_id,
        "model": model_label(model),
        "c": model.c,
        "lambda": model.lam,
        "masterSeed": master_seed,
    }
    return run_trials(context, N, params, workers, job_progress)


def convergence_spot_check(  # noqa: PLR0913
    surface: SurfaceSpec,
    cover: CellCover,
    model: ModelSpec,
    master_seed: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    workers: int | None = 1,
) -> MTEstimate:
    """M -> 2M check on the first trial weight of a radius."""
    seed = derive_seed(master_seed, 0, 0)
    weight = sample_weight(cover, model, seed)
    return mt_functional(
        surface_for(surface, cover.R),
        weight,
        tol,
        max_iter,
        derive_seed(seed, 1),
        check_convergence=True,
        workers=workers,
    )


def fit_exponent(radii: list[float], values: list[float]) -> ExponentFit | None:
    """Fit value ~ R^alpha by unweighted least squares on logs."""
    if len(radii) < MIN_FIT_POINTS:
        log_message = f"Exponent fit refused: {len(radii)} radii (< {MIN_FIT_POINTS})"
        logging.warning(log_message)
        return None
    if any(not value > 0 for value in values):
        logging.warning("Exponent fit refused: nonpositive or missing values")
        return None

    log_r = np.log(np.asarray(radii, dtype=float))
    log_v = np.log(np.asarray(values, dtype=float))
    slope, intercept = np.polyfit(log_r, log_v, 1)
    residuals = log_v - (slope * log_r + intercept)
    return ExponentFit(
        float(slope), float(intercept), tuple(float(r) for r in residuals),
    )


def scaling_study(  # noqa: PLR0913
    Rs: tuple[float, ...],  # noqa: N803
    surface: SurfaceSpec,
    model: ModelSpec,
    N: int,  # noqa: N803
    master_seed: int,
    *,
    geometry: str = "cube",
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    tube_search: TubeSearchSpec | None = None,
    workers: int | None = None,
    job_progress: Progress | None = None,
) -> ScalingStudy:
    """Mean S(w), mass and tube supremum per radius, with fitted growth exponents.

    Tube suprema are scored by volume fraction whatever the method of the search
    spec; the grid search itself still counts cell centers.
    """
    increasing = all(a < b for a, b in zip(Rs, Rs[1:], strict=False))
    if any(R < 4 for R in Rs) or not increasing:  # noqa: PLR2004
        message = f"scaling radii must be increasing and >= 4, got {Rs}"
        raise ConfigurationError(message)

    search = replace(
        tube_search if tube_search is not None else TubeSearchSpec(),
        method=TUBE_SCORING_METHOD,
    )
    rows = []
    for position, R in enumerate(Rs):
        cover = build_cover(R, surface.d, geometry)
        rule = surface_for(surface, R)
        context = TrialContext(
            rule, cover, model, master_seed, (position,), tol, max_iter, search,
        )
        summary = run_trials(context, N, {"R": R}, workers, job_progress)

        masses = [result.mass for result in summary.results]
        occupancies = [result.tube_sup for result in summary.results]
        mean_mass = float(np.mean(masses))
        rows.append(
            {
                "R": float(R),
                "model": model_label(model),
                "lambda": model.lam,
                "N": N,
                "meanS": summary.mean,
                "stdS": summary.std,
                "ci95lo": summary.ci95[0],
                "ci95hi": summary.ci95[1],
                "meanMass": mean_mass,
                "massRatio": mean_mass / R ** (surface.d - 1 + model.lam),
                "medianTubeSup": float(np.median(occupancies)),
                "excluded": len(summary.excluded),
                "masterSeed": master_seed,
            },
        )
        log_message = f"R={R:g}: mean S={summary.mean:.6g}, mean mass={mean_mass:.6g}"
        logging.info(log_message)

    radii = [row["R"] for row in rows]
    return ScalingStudy(
        rows=tuple(rows),
        fit=fit_exponent(radii, [row["meanS"] for row in rows]),
        mass_fit=fit_exponent(radii, [row["meanMass"] for row in rows]),
        tube_fit=fit_exponent(radii, [row["medianTubeSup"] for row in rows]),
    )
