"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures onto its fixed exit-code taxonomy without a lookup table.
"""


class ReebSymError(Exception):
    exit_code = 1


# ingestion / I/O
class ParseError(ReebSymError):
    exit_code = 2


# topology of the input surface
class TopologyError(ReebSymError):
    exit_code = 3


# degenerate geometry or degenerate input data
class DegenerateError(ReebSymError):
    exit_code = 4


class DegenerateFieldError(DegenerateError):
    pass


class ResourceError(ReebSymError):
    exit_code = 5


class ConfigError(ReebSymError):
    exit_code = 5


class UnknownFieldError(ConfigError):
    pass


class DomainError(ReebSymError, ValueError):
    pass


class BadK(ReebSymError, ValueError):
    pass


class UnknownEdgeError(ReebSymError, KeyError):
    pass


class MeanNotZeroError(ReebSymError, ValueError):
    pass


class ResidualError(ReebSymError):
    pass


class GapError(ReebSymError, ValueError):
    pass


class EpsTooLarge(ReebSymError, ValueError):
    pass


class NonMonotoneProfile(ReebSymError, ValueError):
    pass
