"""Error types shared across the package.

The split is by how a caller should react:

  * ParameterError: the call itself is malformed (bad shapes, bad bounds).
  * DomainError: the inputs are well-formed but outside the mathematical
    domain of the operation (non-decaying input to a transform, exponent
    past an inversion threshold).
  * DivergenceError: a requested norm or integral does not converge; the
    message names the offending frequency end.
  * AccuracyError: refinement-based self-check failed; the value computed
    is not trusted and is not returned.
  * ConsistencyError: two independent routes to the same quantity
    disagree beyond tolerance.
  * NonConvergenceError: iteration hit its budget; carries the history.
"""

from __future__ import annotations

__all__ = [
    "ParameterError",
    "DomainError",
    "DivergenceError",
    "AccuracyError",
    "ConsistencyError",
    "NonConvergenceError",
]


class ParameterError(ValueError):
    """Invalid constructor or operation parameters."""


class DomainError(ValueError):
    """Input outside the mathematical domain of the operation."""


class DivergenceError(ValueError):
    """Requested integral or norm diverges; message names the end."""


class AccuracyError(RuntimeError):
    """Self-estimated numerical error exceeds the allowed tolerance."""


class ConsistencyError(RuntimeError):
    """Independent computation routes disagree beyond tolerance."""


class NonConvergenceError(RuntimeError):
    """Iteration failed to converge within its budget."""

    def __init__(self, message: str, history: list | None = None):
        super().__init__(message)
        self.history = history if history is not None else []
