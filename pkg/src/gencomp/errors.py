"""Exception hierarchy shared across the package.

The CLI maps a few of these onto documented exit codes: ConfigError -> 2,
BudgetError -> 3, InvariantViolationError -> 4.
"""


class GencompError(Exception):
    """Base class for all package-specific errors."""


class OutOfRangeError(GencompError):
    """Bit query beyond the hard length of an explicit-prefix real."""


class UndefinedInputError(GencompError):
    """Input outside the operation's domain (eg. prefix density at n=0)."""


class InsufficientDataError(GencompError):
    """A census or table does not cover the requested horizon."""


class MalformedGapError(GencompError):
    """Gap exponent incompatible with the block it is claimed for (e > i)."""


class ExcludedIndexError(GencompError):
    """Index outside a coded real's domain (codings start at 1, resp. 2)."""


class CorruptDescriptionError(GencompError):
    """Decoding witnesses disagree: the description lied about its source."""


class InsufficientOracleError(GencompError):
    """An operator axiom references elements beyond the oracle's bound."""


class FalsifiedPremiseError(GencompError):
    """A checked premise of a conversion failed (invalid harness scenario)."""


class CapacityError(GencompError):
    """Requested object exceeds the configured materialization bounds."""


class UndefinedRegionError(GencompError):
    """Functional evaluated outside the region defined so far."""


class SelectorCapError(GencompError):
    """A path selector returned a node deeper than the stage cap allows."""


class BudgetError(GencompError):
    """A configured work budget was exceeded.  CLI exit code 3."""


class ConfigError(GencompError):
    """Config file failed to parse or validate.  CLI exit code 2."""


class InvariantViolationError(GencompError):
    """A checked invariant failed on real data.  CLI exit code 4."""
