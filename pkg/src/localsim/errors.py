"""Exception types shared across the package."""


class LocalityViolation(Exception):
    """An algorithm tried to look outside the neighborhood it was given."""


class TapeExhausted(Exception):
    """A consumer asked for more random bits than the tape budget holds."""


class InvalidParameters(ValueError):
    """A generator or algorithm got a parameter combination it cannot honour."""


class NoRedNodeError(RuntimeError):
    """Randomized cycle coloring found no selected node in any attempt."""


class SpeedupRefused(ValueError):
    """The speedup regime condition does not hold for the given parameters."""


class EnumerationTooLarge(RuntimeError):
    """Exact enumeration would exceed the configured bit cap."""


class ExpectationTooLarge(RuntimeError):
    """Initial expected failure count is not below 1, derandomization cannot start."""


class BudgetExhausted(RuntimeError):
    """Resampling ran out of its budget."""


class IncompatibleIds(ValueError):
    """Identifiers fall outside the range an algorithm expects."""
