"""Main module of the project.

Runs one subcommand of the laboratory: loads the configuration, applies command-line
and environment overrides, executes the pipeline under a live progress panel and
writes the run manifest. Errors are mapped to exit codes (2 for configuration
problems, 3 for numerical non-convergence).
"""

from __future__ import annotations

import logging
import sys
import time
from contextlib import nullcontext
from pathlib import Path

from rich.console import Console
from rich.live import Live
from rich.logging import RichHandler

from mt_experiments import PIPELINES
from src.config import (
    EXIT_CONFIG_ERROR,
    EXIT_NON_CONVERGENCE,
    EXIT_OK,
    SESSION_LOG,
    SUBCOMMANDS,
    apply_overrides,
    config_to_dict,
    load_config,
    parse_arguments,
)
from src.errors import ConfigurationError, MTLabError, NonConvergenceError
from src.file_utils import create_run_directory, write_manifest
from src.format_utils import config_hash
from src.progress_utils import (
    create_progress_bar,
    create_progress_table,
    create_report_table,
)
from src.report_utils import emit_report

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(*, quiet: bool = False) -> None:
    """Log to the terminal through rich; the session file is added later."""
    console_handler = RichHandler(show_path=False)
    console_handler.setLevel(logging.WARNING if quiet else logging.INFO)
    logging.basicConfig(
        level=logging.INFO,
        format="%(message)s",
        handlers=[console_handler],
        force=True,
    )


def add_session_log(folder: Path) -> None:
    """Also log to the session log inside the output folder."""
    folder.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(folder / SESSION_LOG, mode="a", encoding="utf-8")
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler.setLevel(logging.INFO)
    logging.getLogger().addHandler(handler)


def run_pipeline(subcommand: str, config_path: str | None, args: object) -> list[Path]:
    """Run one pipeline and write its manifest."""
    config = apply_overrides(load_config(config_path), args)
    output_folder = Path(config.output.directory)
    add_session_log(output_folder)

    if subcommand == "report":
        report = emit_report(args.target or output_folder)
        if not args.quiet:
            Console().print(create_report_table(list(report.entries)))
        return [report.report_path, *report.plot_paths]

    digest = config_hash(config)
    run_path = create_run_directory(
        output_folder, subcommand, digest, config.run.master_seed,
    )
    log_message = f"Running {subcommand} into {run_path}"
    logging.info(log_message)

    job_progress = None if args.quiet else create_progress_bar()
    live = (
        nullcontext()
        if job_progress is None
        else Live(
            create_progress_table(subcommand, job_progress), refresh_per_second=10,
        )
    )

    start = time.perf_counter()
    with live:
        artifacts = PIPELINES[subcommand](config, run_path, job_progress)
    wall_time = time.perf_counter() - start

    write_manifest(
        run_path,
        subcommand,
        digest,
        config.run.master_seed,
        wall_time,
        artifacts,
        config_to_dict(config),
    )
    return artifacts


def run_experiment(argv: list[str] | None = None) -> int:
    """Execute a subcommand and return its exit status."""
    args = parse_arguments(argv)
    setup_logging(quiet=args.quiet)

    try:
        if args.subcommand not in SUBCOMMANDS:
            message = (
                f"unknown subcommand '{args.subcommand}', "
                f"expected one of {SUBCOMMANDS}"
            )
            raise ConfigurationError(message)
        artifacts = run_pipeline(args.subcommand, args.config, args)

    except NonConvergenceError as conv_err:
        log_message = f"Numerical non-convergence: {conv_err}"
        logging.error(log_message)  # noqa: TRY400
        return EXIT_NON_CONVERGENCE

    except MTLabError as lab_err:
        log_message = f"Configuration error: {lab_err}"
        logging.error(log_message)  # noqa: TRY400
        return EXIT_CONFIG_ERROR

    log_message = f"{args.subcommand} finished, {len(artifacts)} artifacts written"
    logging.info(log_message)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(run_experiment())
