"""Utility functions for live terminal output using the Rich library.

It includes a progress bar for trial and grid fan-out, the panel that frames it while
a pipeline runs, and the summary table printed by the report.
"""

from __future__ import annotations

from rich.panel import Panel
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    SpinnerColumn,
    TimeElapsedColumn,
    TimeRemainingColumn,
)
from rich.table import Table

CHECK_STYLES = {"pass": "green", "fail": "red", "n/a": "yellow"}


def create_progress_bar() -> Progress:
    """Create a progress bar counting finished trials or batches."""
    return Progress(
        SpinnerColumn(),
        "{task.description}",
        BarColumn(bar_width=None),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
        "eta",
        TimeRemainingColumn(),
        expand=True,
    )


def create_progress_table(title: str, job_progress: Progress) -> Table:
    """Frame the progress of one pipeline in a titled panel."""
    grid = Table.grid(expand=True)
    grid.add_row(
        Panel(
            job_progress,
            title=f"[b]mt-lab {title}",
            border_style="blue",
            padding=(0, 1),
        ),
    )
    return grid


def create_report_table(entries: list[dict]) -> Table:
    """Tabulate report checks, one row per (run, check)."""
    table = Table(title="Run summary", show_lines=False)
    table.add_column("Run", style="cyan", no_wrap=True)
    table.add_column("Check")
    table.add_column("Value", justify="right")
    table.add_column("Status", justify="center")

    for entry in entries:
        for check in entry["checks"]:
            style = CHECK_STYLES.get(check["status"], "white")
            table.add_row(
                entry["run"],
                check["name"],
                check["value"],
                f"[{style}]{check['status']}[/{style}]",
            )
    return table
