"""Exception types raised by the library."""


class TropirootsError(Exception):
    """Base class for all library errors."""


class InvalidInput(TropirootsError, ValueError):
    pass


class ZeroPolynomial(InvalidInput):
    pass


class DimensionMismatch(InvalidInput):
    pass


class LengthMismatch(InvalidInput):
    pass


class NonRealInput(InvalidInput):
    pass


class BothZero(InvalidInput):
    pass


class GenerationFailed(TropirootsError, RuntimeError):
    pass


class RankDeficientLeadingBlock(TropirootsError, ArithmeticError):
    def __init__(self, rank, size):
        super().__init__(f"first block column has numerical rank {rank} < {size}")
        self.rank = rank
        self.size = size


class NoConvergence(TropirootsError, ArithmeticError):
    """QZ iteration cap reached; ``index`` is the row that failed to deflate."""

    def __init__(self, index, iterations, diagnostics=None):
        super().__init__(f"QZ failed to converge at index {index} after {iterations} iterations")
        self.index = index
        self.iterations = iterations
        self.diagnostics = diagnostics or {}
