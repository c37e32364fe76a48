"""Exception hierarchy shared by all modules.

``ValidationError`` marks bad input (CLI exit code 2); every subclass of
``NumericalError`` marks a numerical failure (CLI exit code 3).
"""


class DPTError(Exception):
    pass


class ValidationError(DPTError, ValueError):
    pass


class NumericalError(DPTError, ArithmeticError):
    pass


class NotPSD(NumericalError):
    pass


class NotConvex(NumericalError):
    pass


class DecayViolation(NumericalError):
    pass


class CFLViolation(NumericalError):
    pass


class ObstructionNonzero(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class ExtrapolationError(NumericalError):
    pass


class PQMismatch(NumericalError):
    pass
