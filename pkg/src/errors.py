"""Exception hierarchy shared by the numerical modules and the command line.

Library code raises these; only `main.py` translates them into exit codes.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    import numpy as np


class MTLabError(Exception):
    """Base class for every error raised by the laboratory."""


class ConfigurationError(MTLabError):
    """Invalid parameters, specs or configuration files."""


class DimensionError(MTLabError):
    """Array lengths or ambient dimensions that do not agree."""


class DomainError(MTLabError):
    """Arguments outside the validity domain of a closed-form bound."""


class PreconditionError(MTLabError):
    """Geometric preconditions (such as point separation) that do not hold."""


class NonConvergenceError(MTLabError):
    """Power iteration ran out of iterations before meeting its tolerance."""

    def __init__(
        self,
        message: str,
        best_vector: np.ndarray,
        best_value: float,
        iterations: int,
    ) -> None:
        super().__init__(message)
        self.best_vector = best_vector
        self.best_value = best_value
        self.iterations = iterations
