"""Exception hierarchy shared across the toolkit.

Validation problems (bad input data, malformed specs) and numerical
problems (rank deficiency, degenerate fits, divergent simulations) are
kept distinct so the CLI can map them onto separate exit codes.
"""


class GrangerMdlError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(GrangerMdlError, ValueError):
    """Invalid input: bad CSV, malformed spec, inconsistent dimensions."""


class NumericalError(GrangerMdlError, ArithmeticError):
    """Numerical failure during estimation or simulation."""


class RankDeficiencyError(NumericalError):
    """Design matrix is rank deficient beyond tolerance."""

    def __init__(self, message: str, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class DegenerateFitError(NumericalError):
    """Residual variance is zero; code lengths are undefined."""


class DivergenceError(NumericalError):
    """Simulated trajectory exceeded the magnitude guard."""

    def __init__(self, message: str, node: int, step: int):
        super().__init__(message)
        self.node = node
        self.step = step
