"""Exception hierarchy.

Errors fall into three families that the command line maps onto distinct
exit codes: bad input (2), numerical trouble such as degeneracies or branch
cuts (3) and broken internal invariants (4).
"""


class BlockDiagError(Exception):
    """Base class for every error raised by this package."""


class InputError(BlockDiagError, ValueError):
    """The caller supplied something malformed."""


class DimensionError(InputError):
    pass


class NotHermitianError(InputError):
    pass


class NotUnitaryError(InputError):
    pass


class NormalizationError(InputError):
    """A series has the wrong constant term for the requested operation."""


class ParseError(InputError):
    """Malformed partition string or matrix file.

    ``line`` and ``column`` are 1-based when known.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}, column {column})"
        super().__init__(f"{message}{where}")


class InsufficientDataError(InputError):
    pass


class NumericalError(BlockDiagError, ArithmeticError):
    """The input is well formed but sits outside the regime we can handle."""


class DegeneracyError(NumericalError):
    pass


class BranchError(NumericalError):
    """An eigenvalue approached a branch cut of sqrt or log."""


class GaugeAmbiguityError(NumericalError):
    pass


class BlockMismatchError(NumericalError):
    pass


class InternalError(BlockDiagError, RuntimeError):
    """An invariant that should hold by construction was violated."""
