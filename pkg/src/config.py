"""Configuration module for managing constants and experiment settings.

Constants are grouped by concern, followed by the experiment configuration schema
(frozen dataclasses loaded from JSON with strict field checking) and the command-line
argument parser. Keeping everything in one place lets every pipeline read the same
defaults.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import re
from argparse import ArgumentParser, Namespace
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigurationError

# ============================
# Paths and Files
# ============================
OUTPUT_FOLDER = "Results"         # Default root folder for run directories.
OUTPUT_ENV_VAR = "MT_LAB_OUTPUT"  # Environment override for the output folder.
SESSION_LOG = "session.log"       # Log file written inside the output folder.
MANIFEST_FILE = "manifest.json"   # Per-run manifest (config hash, seed, wall time).
REPORT_FILE = "report.txt"        # Human-readable summary written by `report`.
TOOL_VERSION = "1.0.0"

# ============================
# Surfaces and Covers
# ============================
SUPPORTED_DIMENSIONS = (2, 3)
SURFACE_KINDS = {
    2: ("circle", "paraboloid-cap", "planar-cap"),
    3: ("sphere", "paraboloid-cap", "planar-cap"),
}
MIN_NODES = 4                  # Smallest admissible quadrature rule.
NODES_PER_RADIUS = 16          # d=2 default: M = ceil(16 R).
NODES_PER_RADIUS_SQUARED = 8   # d=3 default: M = ceil(8 R^2).
CAP_HALF_WIDTH = 0.5           # Parameter box [-1/2, 1/2]^(d-1) for the caps.

CELL_GEOMETRIES = ("cube", "ball")
BALL_CELL_RADIUS = 0.5         # Inscribed balls keep lattice cells finitely overlapping
LATTICE_TOLERANCE = 1e-12

# ============================
# Weight Models
# ============================
WEIGHT_MODELS = ("selector", "carbery", "full")
MODEL_TAGS = (
    "selector",
    "carbery-with-replacement",
    "carbery-without-replacement",
    "full",
    "custom",
)

# ============================
# Eigenvalue and Monte Carlo Settings
# ============================
DEFAULT_TOL = 1e-10          # Relative Rayleigh-quotient change for power iteration.
DEFAULT_MAX_ITER = 10_000
PSD_FLOOR = 1e-9             # min eig >= -PSD_FLOOR * max eig.
CONVERGENCE_FLAG = 0.01      # Relative change under M -> 2M that flags a value.
CI_Z = 1.959963984540054     # Two-sided 95% normal quantile.
MIN_FIT_POINTS = 3           # Fewer R values than this and the exponent fit is refused.
GRAM_ROW_BLOCK = 64          # Fixed row block so assembly is independent of workers.
MAX_EXCLUDED_FRACTION = 0.5  # More non-convergent trials than this fails the run.

# ============================
# Tube Search Settings
# ============================
TUBE_RADIUS = 1.0
OCCUPANCY_METHODS = ("center-indicator", "volume-fraction")
TUBE_SCORING_METHOD = "volume-fraction"
DEFAULT_OFFSET_SPACING = 0.5
DEFAULT_REFINEMENT_ROUNDS = 2
VOLUME_FRACTION_LOG2_POINTS = 8  # 2^8 = 256 Sobol points per cell.
REFINEMENT_HALF_WIDTH = 2        # Local window of +-2 old grid steps per refinement.

# ============================
# Concentration Bounds
# ============================
BOUND_NAMES = ("bennett", "selector", "chernoff-tube")
TAIL_SAMPLES = 100_000
TAIL_BATCH = 10_000
DOMINANCE_SIGMAS = 3.0
DOMINANCE_CEILING = 0.5      # Dominance is only asserted where the bound is <= 0.5.

# ============================
# Chaining Settings
# ============================
NET_MODES = ("auto", "enumerated", "sampled", "implicit")
ENUMERATION_BUDGET = 10**6
ENVELOPE_CONSTANT = 10.0

# ============================
# Report Checks
# ============================
PLOTS_FOLDER = "plots"
MASS_RATIO_RANGE = (0.5, 2.0)  # mean mass / (c v_d R^(d-1+lambda)).
MASS_SIGMAS = 4.0              # Allowed distance from the analytic mean mass.
TUBE_LOG_FACTOR = 4.0          # median tube sup <= 4 ln R.
TUBE_GROWTH_FACTOR = 2.0       # Largest median growth per step in R.
S_EXPONENT_CEILING = 0.4
LAMBDA_SLACK = 0.2
EXPONENT_TOLERANCE = 0.2       # Mass and full-weight exponents within +-0.2.
FULL_WEIGHT_SPREAD = 1.5       # max/min of S(R)/R for the full weight.

# ============================
# Output Settings
# ============================
FLOAT_DIGITS = 17
OUTPUT_FORMATS = ("csv", "json")
SCALING_COLUMNS = (
    "R", "model", "lambda", "N", "meanS", "stdS", "ci95lo", "ci95hi", "meanMass",
    "massRatio", "medianTubeSup", "excluded", "masterSeed",
)
TAIL_COLUMNS = ("threshold", "empirical", "stderr", "bound")
COVERING_COLUMNS = ("epsilon", "packingSize", "logPacking", "envelope")

# ============================
# Command Line
# ============================
SUBCOMMANDS = (
    "generate-weight",
    "mt-functional",
    "expected-mt",
    "scaling-study",
    "tube-sup",
    "tail-study",
    "maurey-net",
    "covering-check",
    "report",
)
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NON_CONVERGENCE = 3
MAX_WORKERS = os.cpu_count() or 1  # Default size of the worker pool.
TASK_COLOR = "cyan"                # Color used for task-related output in the terminal.


# ============================
# Experiment Configuration
# ============================
@dataclass(frozen=True)
class SurfaceSpec:
    """Which hypersurface to discretize; M=None picks the default node count."""

    kind: str = "circle"
    d: int = 2
    M: int | None = None


@dataclass(frozen=True)
class CoverSpec:
    """Unit-cell cover of the ball B_R."""

    R: float = 16.0
    d: int = 2
    geometry: str = "cube"


@dataclass(frozen=True)
class ModelSpec:
    """Random weight model.

    `model_tag` is selector, carbery or full. For carbery, `m=None` draws the number of
    cells whose expectation matches the selector model at the same c and lambda.
    """

    model_tag: str = "selector"
    c: float = 1.0
    lam: float = 0.0
    m: int | None = None
    replacement: bool = True


@dataclass(frozen=True)
class RunSpec:
    N: int = 32
    master_seed: int = 42
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    workers: int | None = None


@dataclass(frozen=True)
class OutputSpec:
    directory: str = OUTPUT_FOLDER
    format: str = "csv"


@dataclass(frozen=True)
class ScalingSpec:
    Rs: tuple[float, ...] = (16.0, 32.0, 64.0)


@dataclass(frozen=True)
class TubeSearchSpec:
    """Grid used by the tube supremum search; angular resolution defaults to 1/(2R)."""

    angular_resolution: float | None = None
    offset_spacing: float = DEFAULT_OFFSET_SPACING
    refinement_rounds: int = DEFAULT_REFINEMENT_ROUNDS
    method: str = "center-indicator"


@dataclass(frozen=True)
class TailSpec:
    """Which concentration bound to study and the parameters of the simulated sum."""

    bound: str = "bennett"
    size: int = 50
    delta: float = 0.1
    thresholds: tuple[float, ...] | None = None
    samples: int = TAIL_SAMPLES
    card_i: int = 200
    R: float = 64.0
    C: float | None = None
    cells_per_tube: int | None = None


@dataclass(frozen=True)
class MaureySpec:
    n: int = 8
    N: int = 16
    epsilon: float = 0.5
    mode: str = "auto"
    samples: int = 200


@dataclass(frozen=True)
class CoveringSpec:
    epsilons: tuple[float, ...] = (0.5,)
    sample_count: int = 200


@dataclass(frozen=True)
class ExtensionSpec:
    cosine: bool = False
    dump_gram: bool = False
    check_convergence: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    surface: SurfaceSpec = field(default_factory=SurfaceSpec)
    cover: CoverSpec = field(default_factory=CoverSpec)
    model: ModelSpec = field(default_factory=ModelSpec)
    run: RunSpec = field(default_factory=RunSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    scaling: ScalingSpec = field(default_factory=ScalingSpec)
    tubes: TubeSearchSpec = field(default_factory=TubeSearchSpec)
    tail: TailSpec = field(default_factory=TailSpec)
    maurey: MaureySpec = field(default_factory=MaureySpec)
    covering: CoveringSpec = field(default_factory=CoveringSpec)
    extension: ExtensionSpec = field(default_factory=ExtensionSpec)


# JSON keys that are not plain camelCase renderings of the attribute names.
SPECIAL_KEYS = {"lambda": "lam", "cardI": "card_i"}


def to_snake(name: str) -> str:
    """Convert a camelCase JSON key into the matching attribute name."""
    if name in SPECIAL_KEYS:
        return SPECIAL_KEYS[name]
    return re.sub(
        r"(?<=[a-z0-9])([A-Z])", lambda match: "_" + match.group(1).lower(), name,
    )


def to_camel(name: str) -> str:
    """Convert an attribute name into its JSON key."""
    for key, attribute in SPECIAL_KEYS.items():
        if attribute == name:
            return key
    head, *rest = name.split("_")
    return head + "".join(part[:1].upper() + part[1:] for part in rest)


# JSON types accepted for each scalar field annotation; ints widen to floats.
SCALAR_TYPES = {"bool": (bool,), "int": (int,), "float": (int, float), "str": (str,)}


def coerce_scalar(value: object, kind: str, path: str) -> object:
    if isinstance(value, bool) != (kind == "bool") or not isinstance(
        value, SCALAR_TYPES[kind],
    ):
        message = f"{path}: expected {kind}, got {value!r}"
        raise ConfigurationError(message)
    return float(value) if kind == "float" else value


def coerce_value(value: object, annotation: str, path: str) -> object:
    """Check a JSON value against a field annotation such as `int | None`."""
    kind, _, optional = annotation.partition(" | ")
    if value is None:
        if optional == "None":
            return None
        message = f"{path}: expected {kind}, got null"
        raise ConfigurationError(message)

    if kind.startswith("tuple["):
        if not isinstance(value, list):
            message = f"{path}: expected a list, got {value!r}"
            raise ConfigurationError(message)
        item_kind = kind.removeprefix("tuple[").split(",")[0]
        return tuple(
            coerce_scalar(item, item_kind, f"{path}[{index}]")
            for index, item in enumerate(value)
        )
    return coerce_scalar(value, kind, path)


def build_section(cls: type, raw: object, path: str) -> object:
    """Instantiate one configuration section, rejecting unknown fields."""
    if not isinstance(raw, dict):
        message = f"{path}: expected an object"
        raise ConfigurationError(message)

    known = {spec_field.name: spec_field for spec_field in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in raw.items():
        attribute = to_snake(key)
        if attribute not in known:
            message = f"{path}.{key}: unknown field"
            raise ConfigurationError(message)
        kwargs[attribute] = coerce_value(
            value, known[attribute].type, f"{path}.{key}",
        )

    return cls(**kwargs)


SECTION_TYPES = {
    spec_field.name: spec_field.default_factory
    for spec_field in dataclasses.fields(ExperimentConfig)
}


def config_from_dict(raw: object) -> ExperimentConfig:
    """Build and validate an ExperimentConfig from a decoded JSON document."""
    if not isinstance(raw, dict):
        message = "config: top level must be an object"
        raise ConfigurationError(message)

    sections = {}
    for key, value in raw.items():
        if key not in SECTION_TYPES:
            message = f"config.{key}: unknown section"
            raise ConfigurationError(message)
        sections[key] = build_section(SECTION_TYPES[key], value, f"config.{key}")

    config = ExperimentConfig(**sections)
    validate_config(config)
    return config


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Read an experiment configuration file; None yields the defaults."""
    if path is None:
        config = ExperimentConfig()
        validate_config(config)
        return config

    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as os_err:
        message = f"{path}: cannot read config: {os_err}"
        raise ConfigurationError(message) from os_err

    try:
        raw = json.loads(text)
    except json.JSONDecodeError as json_err:
        message = f"{path}:{json_err.lineno}:{json_err.colno}: {json_err.msg}"
        raise ConfigurationError(message) from json_err

    return config_from_dict(raw)


def config_to_dict(config: ExperimentConfig) -> dict:
    """Render a config with JSON keys, the inverse of `config_from_dict`."""
    document = {}
    for section_field in dataclasses.fields(config):
        section = getattr(config, section_field.name)
        entries = {}
        for spec_field in dataclasses.fields(section):
            value = getattr(section, spec_field.name)
            entries[to_camel(spec_field.name)] = (
                list(value) if isinstance(value, tuple) else value
            )
        document[section_field.name] = entries
    return document


def require(condition: bool, message: str) -> None:  # noqa: FBT001
    """Raise a configuration error unless the condition holds."""
    if not condition:
        raise ConfigurationError(message)


def validate_config(config: ExperimentConfig) -> None:
    """Check ranges and cross-field consistency."""
    surface, cover, model, run = config.surface, config.cover, config.model, config.run

    require(
        surface.d in SUPPORTED_DIMENSIONS,
        f"surface.d: must be one of {SUPPORTED_DIMENSIONS}",
    )
    require(surface.d == cover.d, "surface.d and cover.d must agree")
    require(
        surface.kind in SURFACE_KINDS[surface.d],
        f"surface.kind: '{surface.kind}' is not available for d={surface.d}",
    )
    require(
        surface.M is None or surface.M >= MIN_NODES,
        f"surface.M: must be >= {MIN_NODES}",
    )
    require(cover.R >= 1, "cover.R: must be >= 1")
    require(
        cover.geometry in CELL_GEOMETRIES, f"cover.geometry: one of {CELL_GEOMETRIES}",
    )

    require(model.model_tag in WEIGHT_MODELS, f"model.modelTag: one of {WEIGHT_MODELS}")
    require(model.c >= 0, "model.c: must be nonnegative")
    require(0 <= model.lam < 1, "model.lambda: must lie in [0, 1)")
    require(model.m is None or model.m >= 1, "model.m: must be >= 1")

    require(run.N >= 1, "run.N: must be >= 1")
    require(run.master_seed >= 0, "run.masterSeed: must be nonnegative")
    require(run.tol > 0, "run.tol: must be positive")
    require(run.max_iter >= 1, "run.maxIter: must be >= 1")
    require(run.workers is None or run.workers >= 1, "run.workers: must be >= 1")
    require(
        config.output.format in OUTPUT_FORMATS,
        f"output.format: one of {OUTPUT_FORMATS}",
    )

    Rs = config.scaling.Rs
    require(all(R >= 4 for R in Rs), "scaling.Rs: every R must be >= 4")
    require(
        all(a < b for a, b in zip(Rs, Rs[1:], strict=False)),
        "scaling.Rs: must be strictly increasing",
    )

    tubes = config.tubes
    require(
        tubes.method in OCCUPANCY_METHODS, f"tubes.method: one of {OCCUPANCY_METHODS}",
    )
    require(tubes.offset_spacing > 0, "tubes.offsetSpacing: must be positive")
    require(tubes.refinement_rounds >= 0, "tubes.refinementRounds: must be >= 0")
    require(
        tubes.angular_resolution is None or tubes.angular_resolution > 0,
        "tubes.angularResolution: must be positive",
    )

    tail = config.tail
    require(tail.bound in BOUND_NAMES, f"tail.bound: one of {BOUND_NAMES}")
    require(0 <= tail.delta <= 1, "tail.delta: must lie in [0, 1]")
    require(tail.samples >= 1, "tail.samples: must be >= 1")

    maurey = config.maurey
    require(maurey.mode in NET_MODES, f"maurey.mode: one of {NET_MODES}")
    require(maurey.epsilon > 0, "maurey.epsilon: must be positive")
    require(maurey.n >= 1 and maurey.N >= 1, "maurey.n and maurey.N: must be >= 1")

    covering = config.covering
    require(
        all(0 < eps <= 1 for eps in covering.epsilons),
        "covering.epsilons: values must lie in (0, 1]",
    )
    require(
        covering.sample_count >= 10,  # noqa: PLR2004
        "covering.sampleCount: must be >= 10",
    )
    require(math.isfinite(cover.R), "cover.R: must be finite")


# ============================
# Argument Parsing
# ============================
def add_common_arguments(parser: ArgumentParser) -> None:
    """Add arguments shared across subcommands."""
    parser.add_argument(
        "-c",
        "--config",
        type=str,
        default=None,
        help="Path to a JSON experiment configuration.",
    )
    parser.add_argument(
        "-o",
        "--output",
        type=str,
        default=None,
        help=f"Output folder (overrides ${OUTPUT_ENV_VAR} and the config).",
    )
    parser.add_argument(
        "-w",
        "--workers",
        type=int,
        default=None,
        help="Size of the worker pool (default: available parallelism).",
    )
    parser.add_argument(
        "-q",
        "--quiet",
        action="store_true",
        help="Disable live progress output.",
    )


def add_override_arguments(parser: ArgumentParser) -> None:
    """Add flags that override individual configuration values."""
    parser.add_argument("--seed", type=int, default=None, help="Master seed.")
    parser.add_argument(
        "--trials", type=int, default=None, help="Monte Carlo trials N.",
    )
    parser.add_argument(
        "--dump-gram",
        action="store_true",
        help="Write assembled Gram matrices in the binary debug layout.",
    )
    parser.add_argument(
        "--cosine",
        action="store_true",
        help="Also evaluate the cosine-only seminorm variant.",
    )


def setup_parser() -> ArgumentParser:
    """Set up the parser for every subcommand."""
    parser = ArgumentParser(
        description="Numerical laboratory for weighted Fourier extension estimates.",
    )
    parser.add_argument(
        "subcommand", type=str, help=f"One of: {', '.join(SUBCOMMANDS)}",
    )
    parser.add_argument(
        "target",
        type=str,
        nargs="?",
        default=None,
        help="Bound name for tail-study, run folder for report.",
    )
    add_common_arguments(parser)
    add_override_arguments(parser)
    return parser


def parse_arguments(argv: list[str] | None = None) -> Namespace:
    """Parse the command line."""
    parser = setup_parser()
    return parser.parse_args(argv)


def apply_overrides(config: ExperimentConfig, args: Namespace) -> ExperimentConfig:
    """Fold command-line flags and the environment into a loaded config."""
    run = config.run
    if args.seed is not None:
        run = dataclasses.replace(run, master_seed=args.seed)
    if args.trials is not None:
        run = dataclasses.replace(run, N=args.trials)
    if args.workers is not None:
        run = dataclasses.replace(run, workers=args.workers)

    output = config.output
    directory = args.output or os.environ.get(OUTPUT_ENV_VAR)
    if directory:
        output = dataclasses.replace(output, directory=directory)

    extension = config.extension
    if args.dump_gram or args.cosine:
        extension = dataclasses.replace(
            extension,
            dump_gram=extension.dump_gram or args.dump_gram,
            cosine=extension.cosine or args.cosine,
        )

    tail = config.tail
    if args.subcommand == "tail-study" and args.target:
        tail = dataclasses.replace(tail, bound=args.target)

    updated = dataclasses.replace(
        config, run=run, output=output, extension=extension, tail=tail,
    )
    validate_config(updated)
    return updated
