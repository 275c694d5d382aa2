"""Aggregate run folders into a human-readable summary and plot-ready data files.

Every manifest found below the report folder becomes one entry. Runs are keyed by
(config hash, master seed) and never merged; scaling studies are re-fitted from their
CSV and checked against the growth predictions, the other subcommands report the check
their own artifact already carries.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import (
    FULL_WEIGHT_SPREAD,
    DOMINANCE_CEILING,
    DOMINANCE_SIGMAS,
    ENVELOPE_CONSTANT,
    EXPONENT_TOLERANCE,
    LAMBDA_SLACK,
    MANIFEST_FILE,
    MASS_RATIO_RANGE,
    MASS_SIGMAS,
    PLOTS_FOLDER,
    REPORT_FILE,
    S_EXPONENT_CEILING,
    TUBE_GROWTH_FACTOR,
    TUBE_LOG_FACTOR,
)
from .cover_utils import build_cover
from .errors import ConfigurationError
from .file_utils import read_csv, read_json
from .format_utils import format_float, run_label
from .functional_utils import fit_exponent
from .general_utils import unit_ball_volume
from .weight_utils import expected_selector_mass, selection_probability


@dataclass(frozen=True)
class Report:
    entries: tuple[dict, ...]
    report_path: Path
    plot_paths: tuple[Path, ...]


def make_check(name: str, value: float | None, *, passed: bool | None) -> dict:
    status = "n/a" if passed is None else ("pass" if passed else "fail")
    shown = "-" if value is None else f"{value:.6g}"
    return {"name": name, "value": shown, "status": status}


def column(rows: list[dict[str, str]], name: str) -> list[float]:
    return [float(row[name]) for row in rows]


def mass_checks(rows: list[dict[str, str]], config: dict) -> list[dict]:
    """Mean mass against c v_d R^(d-1+lambda) and the binomial mean of selectors."""
    model, cover, run = config["model"], config["cover"], config["run"]
    d, lam, c = cover["d"], model["lambda"], model["c"]
    checks = []
    if model["modelTag"] == "selector" and c > 0:
        low, high = MASS_RATIO_RANGE
        scale = c * unit_ball_volume(d)
        ratios = [
            float(row["meanMass"]) / (scale * float(row["R"]) ** (d - 1 + lam))
            for row in rows
        ]
        checks.append(
            make_check(
                "mass ~ R^(d-1+lambda) ratio",
                max(ratios, key=lambda ratio: abs(math.log(ratio))),
                passed=all(low <= ratio <= high for ratio in ratios),
            ),
        )

        worst = 0.0
        for row in rows:
            grid = build_cover(float(row["R"]), d, cover["geometry"])
            delta = selection_probability(grid.R, c, lam)
            mean = expected_selector_mass(grid, c, lam)
            spread = math.sqrt(grid.count * delta * (1 - delta) / run["N"])
            error = spread * grid.cell_volume
            distance = abs(float(row["meanMass"]) - mean) / error if error > 0 else 0.0
            worst = max(worst, distance)
        checks.append(
            make_check(
                "mass vs binomial mean (sigmas)", worst, passed=worst <= MASS_SIGMAS,
            ),
        )

    fit = fit_exponent(column(rows, "R"), column(rows, "meanMass"))
    target = d - 1 + lam
    exponent = None if fit is None else fit.exponent
    checks.append(
        make_check(
            "mass exponent",
            exponent,
            passed=None
            if exponent is None
            else abs(exponent - target) <= EXPONENT_TOLERANCE,
        ),
    )
    return checks


def tube_checks(rows: list[dict[str, str]]) -> list[dict]:
    """Median tube sup below 4 ln R, growing at most by a factor 2 per step."""
    radii, medians = column(rows, "R"), column(rows, "medianTubeSup")
    if any(math.isnan(median) for median in medians):
        return [make_check("tube sup <= 4 ln R", None, passed=None)]

    worst = max(
        median / math.log(R) for R, median in zip(radii, medians, strict=True)
    )
    growth = [
        later / earlier
        for earlier, later in zip(medians, medians[1:], strict=False)
        if earlier > 0
    ]
    return [
        make_check("tube sup / ln R", worst, passed=worst <= TUBE_LOG_FACTOR),
        make_check(
            "tube sup growth per step",
            max(growth, default=1.0),
            passed=all(1.0 <= ratio <= TUBE_GROWTH_FACTOR for ratio in growth),
        ),
    ]


def functional_checks(rows: list[dict[str, str]], config: dict) -> list[dict]:
    """Fitted exponent of mean S(w); the full weight is checked against S ~ R."""
    radii, means = column(rows, "R"), column(rows, "meanS")
    fit = fit_exponent(radii, means)
    exponent = None if fit is None else fit.exponent
    model = config["model"]

    if model["modelTag"] == "full":
        spread_values = [mean / R for R, mean in zip(radii, means, strict=True)]
        lowest = min(spread_values)
        spread = max(spread_values) / lowest if lowest > 0 else math.inf
        return [
            make_check(
                "full-weight exponent",
                exponent,
                passed=None
                if exponent is None
                else abs(exponent - 1.0) <= EXPONENT_TOLERANCE,
            ),
            make_check(
                "S(R)/R spread", spread, passed=spread <= FULL_WEIGHT_SPREAD,
            ),
        ]

    lam = model["lambda"]
    ceiling = S_EXPONENT_CEILING + lam + (LAMBDA_SLACK if lam > 0 else 0.0)
    return [
        make_check(
            f"S exponent <= {ceiling:g}",
            exponent,
            passed=None if fit is None else exponent <= ceiling,
        ),
    ]


def write_plot(path: Path, xs: list[float], ys: list[float]) -> Path | None:
    """Two-column data file of log values; skipped if a value is not positive."""
    if not xs or any(not value > 0 for value in (*xs, *ys)):
        return None
    with path.open("w", encoding="utf-8", newline="\n") as file:
        for x, y in zip(np.log(xs), np.log(ys), strict=True):
            file.write(f"{format_float(float(x))} {format_float(float(y))}\n")
    return path


def scaling_entry(
    run_path: Path, manifest: dict, plots_path: Path,
) -> tuple[list, list]:
    rows = read_csv(run_path / "scaling.csv")
    if not rows:
        return [make_check("scaling rows", 0, passed=False)], []

    config = manifest["config"]
    checks = [
        *functional_checks(rows, config),
        *mass_checks(rows, config),
        *tube_checks(rows),
    ]

    name = run_path.name
    radii = column(rows, "R")
    series = {"logS": "meanS", "logMass": "meanMass", "logTubeSup": "medianTubeSup"}
    plots = [
        write_plot(plots_path / f"{name}-logR-{label}.dat", radii, column(rows, key))
        for label, key in series.items()
    ]
    return checks, [plot for plot in plots if plot is not None]


def tail_entry(run_path: Path) -> list[dict]:
    rows = read_csv(run_path / "tail.csv")
    relevant = [row for row in rows if float(row["bound"]) <= DOMINANCE_CEILING]
    holds = all(
        float(row["empirical"])
        <= float(row["bound"]) + DOMINANCE_SIGMAS * float(row["stderr"])
        for row in relevant
    )
    return [make_check("tail dominance (rows checked)", len(relevant), passed=holds)]


def summary_entry(run_path: Path, subcommand: str) -> list[dict]:
    """Checks carried by the JSON summaries of the remaining subcommands."""
    if subcommand == "maurey-net":
        summary = read_json(run_path / "maurey.json")
        return [
            make_check(
                "hull points covered",
                summary["successes"],
                passed=summary["successes"] == summary["total"],
            ),
        ]
    if subcommand == "covering-check":
        summary = read_json(run_path / "covering.json")
        worst = max(row["logPacking"] / row["envelope"] for row in summary["rows"])
        return [
            make_check(
                "log packing / envelope", worst, passed=worst <= ENVELOPE_CONSTANT,
            ),
        ]
    if subcommand == "expected-mt":
        summary = read_json(run_path / "expected_mt.json")
        return [make_check("mean S(w)", summary["mean"], passed=None)]
    if subcommand == "mt-functional":
        summary = read_json(run_path / "mt_functional.json")
        change = summary.get("convergenceChange")
        return [
            make_check("S(w)", summary["value"], passed=None),
            make_check(
                "M-doubling change",
                change,
                passed=None if change is None else not summary["flagged"],
            ),
        ]
    if subcommand == "tube-sup":
        summary = read_json(run_path / "tube_sup.json")
        return [make_check("tube sup", summary["value"], passed=None)]
    return []


def emit_report(folder: str | Path) -> Report:
    """Summarize every run below a folder into report.txt and plot data files."""
    root = Path(folder)
    manifests = sorted(root.rglob(MANIFEST_FILE)) if root.is_dir() else []
    if not manifests:
        message = f"{root}: no run manifest found"
        raise ConfigurationError(message)

    plots_path = root / PLOTS_FOLDER
    plots_path.mkdir(exist_ok=True)
    entries, plot_paths = [], []
    for manifest_path in manifests:
        manifest = read_json(manifest_path)
        run_path = manifest_path.parent
        subcommand = manifest["subcommand"]
        if subcommand == "scaling-study":
            checks, plots = scaling_entry(run_path, manifest, plots_path)
            plot_paths.extend(plots)
        elif subcommand == "tail-study":
            checks = tail_entry(run_path)
        else:
            checks = summary_entry(run_path, subcommand)

        label = run_label(subcommand, manifest["configHash"], manifest["masterSeed"])
        entries.append(
            {
                "run": label,
                "subcommand": subcommand,
                "configHash": manifest["configHash"],
                "masterSeed": manifest["masterSeed"],
                "checks": checks,
            },
        )

    lines = []
    for entry in entries:
        lines.append(
            f"{entry['run']}  hash={entry['configHash']}  seed={entry['masterSeed']}",
        )
        lines.extend(
            f"  [{check['status']}] {check['name']}: {check['value']}"
            for check in entry["checks"]
        )
    report_path = root / REPORT_FILE
    report_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    log_message = f"Report on {len(entries)} runs written to {report_path}"
    logging.info(log_message)
    return Report(tuple(entries), report_path, tuple(plot_paths))
