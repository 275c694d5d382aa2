"""Formatting helpers for artifacts: pinned float rendering and config hashing."""

from __future__ import annotations

import hashlib
import json
import math

from .config import FLOAT_DIGITS, ExperimentConfig, config_to_dict

# Sections and fields that never change an artifact, so they stay out of the hash.
UNHASHED_SECTIONS = ("output",)
UNHASHED_RUN_FIELDS = ("workers",)


def format_float(value: object) -> str:
    """Render a CSV cell; floats always use 17 significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.{FLOAT_DIGITS}g}"
    return str(value)


def hashed_config(config: ExperimentConfig) -> dict:
    """Config document restricted to the fields that determine the artifacts."""
    document = config_to_dict(config)
    for section in UNHASHED_SECTIONS:
        document.pop(section, None)
    for name in UNHASHED_RUN_FIELDS:
        document["run"].pop(name, None)
    return document


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON of the hashed config fields."""
    canonical = json.dumps(hashed_config(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def run_label(subcommand: str, digest: str, master_seed: int) -> str:
    """Run folder name `<subcommand>-<hash[:12]>-seed<masterSeed>`."""
    return f"{subcommand}-{digest[:12]}-seed{master_seed}"
