"""Utility functions for writing and reading run artifacts.

Tables go to CSV (or JSON) with pinned float formatting, documents go to JSON with
sorted keys, and every run folder gets a manifest tying its artifacts to the config
hash and master seed.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

from .config import MANIFEST_FILE, TOOL_VERSION
from .errors import ConfigurationError
from .format_utils import format_float, run_label


def write_json(path: str | Path, document: object) -> Path:
    """Write a JSON document with sorted keys and a trailing newline."""
    target = Path(path)
    with target.open("w", encoding="utf-8", newline="\n") as file:
        json.dump(document, file, sort_keys=True, indent=2)
        file.write("\n")
    return target


def read_json(path: str | Path) -> dict:
    try:
        with Path(path).open(encoding="utf-8") as file:
            return json.load(file)
    except (OSError, json.JSONDecodeError) as read_err:
        message = f"{path}: cannot read JSON artifact: {read_err}"
        raise ConfigurationError(message) from read_err


def write_csv(path: str | Path, columns: tuple[str, ...], rows: list[dict]) -> Path:
    """Write rows as CSV in column order, formatting every cell with `format_float`."""
    target = Path(path)
    with target.open("w", encoding="utf-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_float(row[column]) for column in columns])
    return target


def read_csv(path: str | Path) -> list[dict[str, str]]:
    """Read a CSV artifact as a list of string-valued rows."""
    with Path(path).open(encoding="utf-8", newline="") as file:
        return list(csv.DictReader(file))


def write_table(
    folder: Path,
    stem: str,
    columns: tuple[str, ...],
    rows: list[dict],
    fmt: str = "csv",
) -> Path:
    """Write a table as `<stem>.csv` or as a JSON list of rows."""
    if fmt == "json":
        return write_json(
            folder / f"{stem}.json",
            [{column: row[column] for column in columns} for row in rows],
        )
    return write_csv(folder / f"{stem}.csv", columns, rows)


def create_run_directory(
    output_folder: str | Path,
    subcommand: str,
    digest: str,
    master_seed: int,
) -> Path:
    """Create (or reuse) the folder of one run under the output folder."""
    run_path = Path(output_folder) / run_label(subcommand, digest, master_seed)
    run_path.mkdir(parents=True, exist_ok=True)
    return run_path


def write_manifest(  # noqa: PLR0913
    run_path: Path,
    subcommand: str,
    digest: str,
    master_seed: int,
    wall_time: float,
    artifacts: list[Path],
    config_document: dict,
) -> Path:
    """Record what produced the run's artifacts."""
    manifest = {
        "subcommand": subcommand,
        "configHash": digest,
        "masterSeed": master_seed,
        "toolVersion": TOOL_VERSION,
        "wallTime": wall_time,
        "artifacts": sorted(Path(artifact).name for artifact in artifacts),
        "config": config_document,
    }
    target = write_json(run_path / MANIFEST_FILE, manifest)
    log_message = f"Manifest written: {target}"
    logging.info(log_message)
    return target
