"""Exception types shared across the package."""


class ChowlaLabError(Exception):
    """Base class for every error this package raises on purpose."""


class RangeLimitError(ChowlaLabError, ValueError):
    """An input lies outside a certified range (sieve table or the 2**62
    deterministic-factorization window)."""


class EvaluationOverflowError(ChowlaLabError, OverflowError):
    """A polynomial value would leave the signed 64-bit budget.

    Raised instead of ever letting fixed-width arithmetic wrap.
    """


class BudgetError(ChowlaLabError, RuntimeError):
    """A run would exceed its node, tuple, or memory budget and was refused."""


class WeightFileError(ChowlaLabError, ValueError):
    """A weight file is malformed or violates the unit-magnitude bound."""


class CacheFormatError(ChowlaLabError, ValueError):
    """A sieve cache file failed magic, size, or header validation."""
