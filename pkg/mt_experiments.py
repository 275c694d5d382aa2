"""Subcommand pipelines of the laboratory.

Each pipeline reads the experiment configuration, runs the computation on the worker
pool and writes its artifacts into the run folder, returning the paths it wrote. The
`report` subcommand instead summarizes an existing output folder.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict
from typing import TYPE_CHECKING

import numpy as np

from src.bound_utils import tail_study
from src.chaining_utils import (
    coverage_audit,
    maurey_net,
    random_hull_points,
    random_polytope,
)
from src.chaining_utils import covering_check as run_covering_check
from src.config import COVERING_COLUMNS, SCALING_COLUMNS, TAIL_COLUMNS
from src.cover_utils import build_cover
from src.extension_utils import (
    assemble_gram,
    density_from_eigenvector,
    dump_gram,
    seminorm_tilde,
)
from src.file_utils import write_json, write_table
from src.functional_utils import (
    convergence_spot_check,
    expected_mt,
    mt_functional,
    scaling_study,
    surface_for,
)
from src.general_utils import derive_seed
from src.tube_utils import tube_occupancy, tube_sup
from src.weight_utils import (
    sample_weight,
    selection_probability,
    weight_mass,
    weight_to_dict,
)

if TYPE_CHECKING:
    from pathlib import Path

    from rich.progress import Progress

    from src.config import ExperimentConfig
    from src.cover_utils import CellCover
    from src.weight_utils import Weight


def first_weight(config: ExperimentConfig) -> tuple[CellCover, Weight]:
    """The weight of trial 0, shared by the single-weight subcommands."""
    cover = build_cover(config.cover.R, config.cover.d, config.cover.geometry)
    seed = derive_seed(config.run.master_seed, 0)
    return cover, sample_weight(cover, config.model, seed)


def generate_weight(
    config: ExperimentConfig, run_path: Path, _job_progress: Progress | None,
) -> list[Path]:
    """Sample one weight and store its JSON record."""
    cover, weight = first_weight(config)
    record = weight_to_dict(weight)
    record.update(
        {
            "mass": weight_mass(weight),
            "supportSize": weight.support_size,
            "coverCount": cover.count,
            "delta": selection_probability(cover.R, config.model.c, config.model.lam),
        },
    )
    return [write_json(run_path / "weight.json", record)]


def mt_functional_pipeline(
    config: ExperimentConfig, run_path: Path, _job_progress: Progress | None,
) -> list[Path]:
    """S(w) for the trial-0 weight, with the maximizer and its seminorms."""
    cover, weight = first_weight(config)
    rule = surface_for(config.surface, cover.R)
    run = config.run
    extension = config.extension
    artifacts = []

    estimate = mt_functional(
        rule,
        weight,
        run.tol,
        run.max_iter,
        derive_seed(weight.seed or 0, 1),
        check_convergence=extension.check_convergence,
        workers=run.workers,
    )
    density = density_from_eigenvector(rule, estimate.maximizer)
    coefficients = np.sqrt(rule.weights) * density
    summary = {
        "value": estimate.value,
        "iterations": estimate.iterations,
        "residual": estimate.residual,
        "M": estimate.M,
        "surface": rule.rule_id,
        "weightId": weight.weight_id,
        "mass": weight_mass(weight),
        "convergenceChange": estimate.convergence_change,
        "flagged": estimate.flagged,
        "maximizerReal": coefficients.real.tolist(),
        "maximizerImag": coefficients.imag.tolist(),
        "seminormTilde": seminorm_tilde(rule, cover, density),
    }
    if extension.cosine:
        summary["seminormCosine"] = seminorm_tilde(rule, cover, density, cosine=True)

    if extension.dump_gram:
        gram = assemble_gram(rule, weight, run.workers)
        artifacts.append(dump_gram(gram, run_path / "gram.bin", weight.seed))

    artifacts.append(write_json(run_path / "mt_functional.json", summary))
    return artifacts


def expected_mt_pipeline(
    config: ExperimentConfig, run_path: Path, job_progress: Progress | None,
) -> list[Path]:
    """Monte Carlo mean of S(w) over N sampled weights."""
    run = config.run
    summary = expected_mt(
        config.surface,
        config.cover,
        config.model,
        run.N,
        run.master_seed,
        run.tol,
        run.max_iter,
        workers=run.workers,
        job_progress=job_progress,
    )
    trials = [
        {
            "index": result.index,
            "seed": result.seed,
            "value": result.value,
            "mass": result.mass,
            "converged": result.converged,
            "truncatedValue": result.truncated_value,
            "tailMass": result.tail_mass,
        }
        for result in summary.results
    ]
    document = {
        "trials": summary.trials,
        "mean": summary.mean,
        "std": summary.std,
        "ci95": list(summary.ci95),
        "values": list(summary.values),
        "seeds": list(summary.seeds),
        "excluded": list(summary.excluded),
        "params": summary.params,
    }
    columns = ("index", "seed", "value", "mass", "converged")
    if summary.truncated_mean is not None:
        document["truncatedMean"] = summary.truncated_mean
        document["meanTailMass"] = summary.mean_tail_mass
        columns = (*columns, "truncatedValue", "tailMass")
    return [
        write_table(run_path, "trials", columns, trials, config.output.format),
        write_json(run_path / "expected_mt.json", document),
    ]


def scaling_study_pipeline(
    config: ExperimentConfig, run_path: Path, job_progress: Progress | None,
) -> list[Path]:
    """Mean S(w), mass and tube sup across radii with fitted exponents."""
    run = config.run
    study = scaling_study(
        config.scaling.Rs,
        config.surface,
        config.model,
        run.N,
        run.master_seed,
        geometry=config.cover.geometry,
        tol=run.tol,
        max_iter=run.max_iter,
        tube_search=config.tubes,
        workers=run.workers,
        job_progress=job_progress,
    )
    document = {
        "rows": list(study.rows),
        "fit": None if study.fit is None else asdict(study.fit),
        "massFit": None if study.mass_fit is None else asdict(study.mass_fit),
        "tubeFit": None if study.tube_fit is None else asdict(study.tube_fit),
    }

    if config.extension.check_convergence:
        smallest = build_cover(
            config.scaling.Rs[0], config.surface.d, config.cover.geometry,
        )
        spot = convergence_spot_check(
            config.surface,
            smallest,
            config.model,
            run.master_seed,
            run.tol,
            run.max_iter,
            run.workers,
        )
        document["convergenceCheck"] = {
            "R": smallest.R,
            "change": spot.convergence_change,
            "flagged": spot.flagged,
        }

    # Always CSV; the report reads scaling.csv back.
    return [
        write_table(run_path, "scaling", SCALING_COLUMNS, list(study.rows)),
        write_json(run_path / "scaling.json", document),
    ]


def tube_sup_pipeline(
    config: ExperimentConfig, run_path: Path, _job_progress: Progress | None,
) -> list[Path]:
    """Tube supremum of the trial-0 weight."""
    _, weight = first_weight(config)
    result = tube_sup(weight, config.tubes, config.run.workers)
    document = result.as_dict()
    document.update(
        {
            "weightId": weight.weight_id,
            "method": config.tubes.method,
            "occupancy": tube_occupancy(weight, result.tube, config.tubes.method),
            "maxCell": (
                float(np.max(weight.multiplicities)) * weight.cover.cell_volume
                if weight.support_size
                else 0.0
            ),
        },
    )
    return [write_json(run_path / "tube_sup.json", document)]


def tail_study_pipeline(
    config: ExperimentConfig, run_path: Path, job_progress: Progress | None,
) -> list[Path]:
    """Empirical tail of the named bound's sum next to the bound."""
    seed = derive_seed(config.run.master_seed, 0)
    study = tail_study(config.tail, seed, config.run.workers, job_progress)
    document = {
        "bound": study.bound,
        "params": study.params,
        "dominanceHolds": study.dominance_holds(),
        "rows": study.rows(),
    }
    # The report re-checks dominance from the CSV.
    return [
        write_table(run_path, "tail", TAIL_COLUMNS, study.rows()),
        write_json(run_path / "tail.json", document),
    ]


def maurey_net_pipeline(
    config: ExperimentConfig, run_path: Path, _job_progress: Progress | None,
) -> list[Path]:
    """Maurey net of random unit vectors and an audit on random hull points."""
    spec = config.maurey
    master = config.run.master_seed
    polytope = random_polytope(spec.n, spec.N, derive_seed(master, 0))
    net = maurey_net(
        polytope, spec.epsilon, spec.mode, derive_seed(master, 1), spec.samples,
    )
    points, _ = random_hull_points(polytope, spec.samples, derive_seed(master, 2))
    audit = coverage_audit(net, points)

    document = {
        "n": polytope.n,
        "N": polytope.dimension,
        "K": polytope.K,
        "epsilon": net.epsilon,
        "depth": net.depth,
        "mode": net.mode,
        "size": net.size,
        "logSize": None if net.size is None else math.log(net.size),
        "logSizeBound": net.log_size_bound,
        "total": audit.total,
        "successes": audit.successes,
        "maxError": audit.max_error,
    }
    log_message = (
        f"Maurey net ({net.mode}, k={net.depth}): "
        f"{audit.successes}/{audit.total} covered"
    )
    logging.info(log_message)
    return [write_json(run_path / "maurey.json", document)]


def covering_check_pipeline(
    config: ExperimentConfig, run_path: Path, _job_progress: Progress | None,
) -> list[Path]:
    """Packing lower-bound witnesses under the cell-integral seminorm."""
    cover = build_cover(config.cover.R, config.cover.d, config.cover.geometry)
    rule = surface_for(config.surface, cover.R)
    result = run_covering_check(
        rule,
        cover,
        config.covering.epsilons,
        config.covering.sample_count,
        derive_seed(config.run.master_seed, 0),
        cosine=config.extension.cosine,
    )
    document = {
        "witness": "greedy packing (lower bound on the covering number)",
        "cells": cover.count,
        "surface": rule.rule_id,
        "rows": list(result.rows),
    }
    return [
        write_table(run_path, "covering", COVERING_COLUMNS, list(result.rows)),
        write_json(run_path / "covering.json", document),
    ]


PIPELINES = {
    "generate-weight": generate_weight,
    "mt-functional": mt_functional_pipeline,
    "expected-mt": expected_mt_pipeline,
    "scaling-study": scaling_study_pipeline,
    "tube-sup": tube_sup_pipeline,
    "tail-study": tail_study_pipeline,
    "maurey-net": maurey_net_pipeline,
    "covering-check": covering_check_pipeline,
}
