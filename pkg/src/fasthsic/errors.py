"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: input problems exit with 2,
statistical degeneracy with 3, numerical failure with 4.
"""


class HSICError(Exception):
    """Base class for all errors raised by fasthsic."""


class InputError(HSICError, ValueError):
    """Malformed or out-of-contract input."""


class DegeneracyError(HSICError):
    """The data carry no usable statistical information."""


class DegenerateSampleError(DegeneracyError):
    """All observations coincide, so a kernel width cannot be chosen."""


class DegenerateNullError(DegeneracyError):
    """The estimated null distribution has no variance."""


class NumericalError(HSICError, ArithmeticError):
    """An internal numerical routine failed to converge or broke an identity."""
