"""
Exceptions raised by the extrapolation package
"""


class ExtrapolationError(Exception):
    """Base class for extrapolation errors"""


class ModelSpecError(ExtrapolationError, ValueError):
    """Model specification is invalid or cannot be parsed"""


class ParamLayoutError(ExtrapolationError, ValueError):
    """Parameter vector does not match the layout of its model spec"""


class InsufficientDataError(ExtrapolationError, ValueError):
    """Too few measurement points for the requested operation"""


class SingularSystemError(ExtrapolationError, ArithmeticError):
    """Least-squares design matrix is rank deficient"""


class OutsideBoxError(ExtrapolationError, ValueError):
    """Starting point lies outside the parameter box"""
