"""Exception hierarchy.

Each family carries the process exit code the command-line front end maps it to.
"""


class EnceError(Exception):
    exit_code = 3


class ParameterError(EnceError, ValueError):
    """Bad argument to a library call (wrong size, bad index, invalid parameter)."""

    exit_code = 1


class InvalidStateError(EnceError, ValueError):
    """Input is not a valid density matrix."""

    exit_code = 2


class NumericalError(EnceError, ArithmeticError):
    exit_code = 3


class NonSquareError(ParameterError):
    pass


class NonHermitianError(InvalidStateError):
    pass


class NotPSDError(InvalidStateError):
    pass


class TraceNotOneError(InvalidStateError):
    pass


class DimMismatchError(InvalidStateError):
    pass


class StateFormatError(InvalidStateError):
    """Malformed density-matrix text file."""


class IterationFailure(NumericalError):
    pass


class DegenerateImageError(NumericalError):
    pass


class NotBipartiteError(ParameterError):
    pass
