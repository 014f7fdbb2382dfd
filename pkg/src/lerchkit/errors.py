"""Exception types raised across lerchkit."""


class LerchError(Exception):
    """Base class for library errors."""


class DomainError(LerchError, ValueError):
    """An argument lies outside the domain of the requested function."""


class NoConvergence(LerchError, RuntimeError):
    """An iterative procedure exhausted its budget."""


class NoSolution(LerchError, RuntimeError):
    """An estimating equation system has no acceptable solution."""


class SingularMatrix(LerchError, ArithmeticError):
    """A matrix that must be inverted is numerically rank deficient."""


class ParseError(LerchError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where = f" ({where})"
        super().__init__(message + where)


class ValidationError(LerchError, ValueError):
    """Parsed data violates a FrequencyTable or Dataset invariant."""


class UnknownDataset(LerchError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown dataset"
