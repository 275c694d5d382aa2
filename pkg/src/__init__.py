"""Package of numerical and plumbing modules behind the laboratory's subcommands.

Modules:
    - config: Constants, the experiment configuration schema and argument parsing.
    - errors: Exception hierarchy mapped to exit codes by the entry point.
    - surface_utils: Quadrature rules on the circle, sphere and caps.
    - cover_utils: Lattice covers of B_R and the Fourier transform of one cell.
    - weight_utils: Random and custom weights built from unit cells.
    - extension_utils: Extension operator, Gram assembly and cell-integral seminorms.
    - functional_utils: Top eigenvalue S(w), Monte Carlo means and scaling studies.
    - tube_utils: Tube occupancy and the tube supremum search.
    - bound_utils: Concentration bounds and their tail studies.
    - chaining_utils: Maurey nets and packing witnesses for covering numbers.
    - task_utils: Worker pool with index-ordered results.
    - file_utils: CSV/JSON artifacts, run folders and manifests.
    - format_utils: Pinned float formatting and config hashing.
    - general_utils: Seed derivation and shared argument checks.
    - progress_utils: Rich progress bars and report tables.
    - report_utils: Aggregation of run folders into report.txt and plot data.
"""

# src/__init__.py

__all__ = [
    "bound_utils",
    "chaining_utils",
    "config",
    "cover_utils",
    "errors",
    "extension_utils",
    "file_utils",
    "format_utils",
    "functional_utils",
    "general_utils",
    "progress_utils",
    "report_utils",
    "surface_utils",
    "task_utils",
    "tube_utils",
    "weight_utils",
]
