"""Exception types shared across the package."""

from __future__ import annotations


class GraphComboError(Exception):
    """Base class for all package errors."""


class InvalidParameters(GraphComboError):
    """A function was called with out-of-range or inconsistent parameters."""


class EdgeListParseError(GraphComboError):
    """Malformed edge-list input; carries the offending line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class EmptyGraphError(GraphComboError):
    """Operation requires a graph with at least one edge or node."""


class ConvergenceError(GraphComboError):
    """Iterative solver exceeded its iteration cap."""


class NonSymmetricInput(GraphComboError):
    """Matrix expected to be symmetric is not, beyond tolerance."""


class MismatchedSubsetSize(GraphComboError):
    """Two subsets that must share the same k do not."""


class CapExceeded(GraphComboError):
    """A brute-force enumeration would exceed the configured cap."""


class FactorizationError(GraphComboError):
    """Gram matrix could not be factorized even after the jitter ladder."""


class ExhaustedSubgraph(GraphComboError):
    """Every combo-node in the current subgraph has been queried."""


class ConfigError(GraphComboError):
    """Invalid experiment configuration; carries all messages at once."""

    def __init__(self, problems: list[str]):
        super().__init__("\n".join(problems))
        self.problems = list(problems)


class SchemaMismatch(GraphComboError):
    """Run record rows with an unexpected schema version or shape."""
