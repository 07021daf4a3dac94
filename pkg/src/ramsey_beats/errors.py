"""Exception hierarchy shared across the package.

Two broad families matter to callers (and to the CLI exit codes):
``UsageError`` for bad inputs/configuration, ``NumericsError`` for
failures of the numerical machinery on otherwise valid inputs.
"""


class UsageError(ValueError):
    """Invalid input, configuration or file content."""


class NumericsError(RuntimeError):
    """A numerical procedure failed on valid inputs."""


class NoiseSpecError(UsageError):
    """Noise generation parameters violate their invariants."""


class FrequencyRangeError(UsageError):
    """A requested frequency falls outside the resolvable band."""


class InsufficientDataError(UsageError):
    """Not enough samples/bins/points for the requested operation."""


class InsufficientCurvesError(UsageError):
    """Operation needs at least two curves."""


class GridMismatchError(UsageError):
    """Two curve sets do not share a time grid / curve count."""


class TraceTooShortError(UsageError):
    """Noise trace does not cover the measurement schedule.

    ``required_samples`` carries the minimum trace length that would.
    """

    def __init__(self, message, required_samples):
        super().__init__(message)
        self.required_samples = required_samples


class ConfigError(UsageError):
    """Run configuration invalid; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class CsvParseError(UsageError):
    """Malformed CSV input; ``line`` is the 1-based offending line."""

    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


class FitFailureError(NumericsError):
    """A least-squares fit did not converge or gave a degenerate result."""


class StepSizeError(NumericsError):
    """Integrator step too large for the fastest timescale present."""
