"""Exception types shared across the package.

Exit-code mapping for the CLI lives in cli.py; library code raises these
and never calls sys.exit.
"""


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


class DataError(ValueError):
    """Malformed input file. Carries a human-readable location."""


class NumericError(RuntimeError):
    """A computation produced a non-finite or degenerate value.

    The message names the offending quantity (and parameter segment or
    step index where known) so aborted runs are diagnosable.
    """


class CapabilityError(RuntimeError):
    """An operation was requested from a model/proposal that cannot do it,
    e.g. pathwise gradients from a non-reparameterizable proposal."""
