class CyclabError(Exception):
    """Base class for every error raised by the laboratory"""


class TruncationError(CyclabError, ValueError):
    """A jet is too short for the requested operation"""


class OrderDeficiencyError(CyclabError, ValueError):
    """A jet does not vanish to the order a monomial division needs"""


class SeriesDivisionError(CyclabError, ZeroDivisionError):
    """Division by a series whose constant term vanishes"""


class EvaluationOverflowError(CyclabError, OverflowError):
    """An exponent Q_k(z) left the floating point range"""


class PolynomialFamilyError(CyclabError, ValueError):
    """Every Q_k vanishes identically, so f is a polynomial"""


class CenterSetError(CyclabError, ValueError):
    """The parameter lies in the center set and the check is vacuous"""


class ConvergenceError(CyclabError, ArithmeticError):
    """Quadrature or root iteration did not settle"""


class ContourUnderflowError(ConvergenceError):
    """|f| underflowed on an integration contour"""


class FrobeniusError(CyclabError, ArithmeticError):
    """A Wronskian quotient could not be formed inside the valid window"""


class SchemaError(CyclabError, ValueError):
    """Input file does not match the expected schema"""


class SweepError(CyclabError, RuntimeError):
    """A sweep produced no usable samples"""
