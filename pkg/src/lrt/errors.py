class LRTError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(LRTError, ValueError):
    pass


class DimensionError(LRTError, ValueError):
    pass


class NumericalError(LRTError, ArithmeticError):
    """An SVD/eigensolver failed or an iterate went non-finite."""


class SingularityError(NumericalError):
    pass


class DegenerateGeometryError(NumericalError):
    pass


class MatrixFormatError(LRTError, ValueError):
    pass
