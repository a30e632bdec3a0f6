"""Error taxonomy shared by all modules.

The CLI maps these onto exit codes: usage errors exit 1, ConfigError and
its subclasses exit 2, NumericError exits 3.
"""


class ContractViolation(ValueError):
    """A caller broke an operation's precondition (arity mismatch, NaN input)."""


class ConfigError(ValueError):
    """Invalid configuration or data for the requested operation."""


class ParseError(ConfigError):
    """Malformed input file; carries a 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class TrainingError(ConfigError):
    """Training data cannot support the requested fit (degenerate labels, n < k)."""


class BalancingError(ConfigError):
    """Class balancing impossible (minority class too small)."""


class DegenerateClusteringError(ConfigError):
    """Clustering produced clusters whose label mapping is undefined."""


class EmptyDatasetError(ConfigError):
    """Dataset construction yielded no usable rows."""


class NumericError(ArithmeticError):
    """Numerical failure: singular system or solver non-convergence."""
