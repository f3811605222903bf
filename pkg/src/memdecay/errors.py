"""Exception hierarchy shared by all modules.

Each class carries an ``exit_code`` consumed by the command line front end.
"""


class MemDecayError(Exception):
    exit_code = 1


class ShapeMismatch(MemDecayError, ValueError):
    exit_code = 12


class OffsetOutOfRange(MemDecayError, ValueError):
    pass


class DimensionMismatch(MemDecayError, ValueError):
    pass


class TopologyUnsupported(MemDecayError, ValueError):
    pass


class WindowTooWide(MemDecayError, ValueError):
    pass


class Singular(MemDecayError, ArithmeticError):
    exit_code = 13


class IllConditioned(UserWarning):
    pass


class NonConvergence(MemDecayError, ArithmeticError):
    exit_code = 16

    def __init__(self, message, residual=None, trace=None):
        super().__init__(message)
        self.residual = residual
        self.trace = trace


class Overflow(MemDecayError, OverflowError):
    pass


class InvalidKappa(MemDecayError, ValueError):
    pass


class EmptyDomain(MemDecayError, ValueError):
    exit_code = 14


class NoConvergentScale(MemDecayError, ArithmeticError):
    exit_code = 15


class InvalidSpec(MemDecayError, ValueError):
    exit_code = 11


class SymbolVanishes(MemDecayError, ArithmeticError):
    def __init__(self, message, grid_index=None):
        super().__init__(message)
        self.grid_index = grid_index


class ParseError(MemDecayError, ValueError):
    exit_code = 11
