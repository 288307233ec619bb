"""Exception hierarchy.

Every error raised on bad input derives from :class:`EofbError`, which is a
``ValueError`` so callers that only care about "bad argument" can catch that.
"""


class EofbError(ValueError):
    """Base class for all validation errors raised by the package."""


class NotSquare(EofbError):
    pass


class NotHermitian(EofbError):
    def __init__(self, deviation: float, tol: float):
        self.deviation = deviation
        super().__init__(
            f"matrix is not Hermitian: max |m - m^dagger| = {deviation:.3e} > tol {tol:.1e}"
        )


class NotSymmetric(EofbError):
    def __init__(self, deviation: float, tol: float):
        self.deviation = deviation
        super().__init__(
            f"matrix is not complex symmetric: max |m - m^T| = {deviation:.3e} > tol {tol:.1e}"
        )


class NotPSD(EofbError):
    def __init__(self, min_eigenvalue: float, tol: float):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(
            f"matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e} < -{tol:.1e}"
        )


class NotUnitTrace(EofbError):
    pass


class NotNormalized(EofbError):
    pass


class NonFinite(EofbError):
    pass


class OutOfRange(EofbError):
    pass


class BadRank(EofbError):
    pass


class BadIndices(EofbError):
    pass


class BadSize(EofbError):
    pass


class BadShape(EofbError):
    pass


class DimensionMismatch(EofbError):
    pass


class WrongDimension(EofbError):
    pass


class NegativeInput(EofbError):
    pass


class BadRightMatrix(EofbError):
    pass


class NotInRegime(EofbError):
    pass


class TakagiFailure(ArithmeticError):
    """Factorization completed but failed its reconstruction check."""


class ConsistencyError(ArithmeticError):
    """Two independent formulas for the same quantity disagreed."""


class ParseError(EofbError):
    pass
