"""Exception hierarchy."""


class ClrlrError(Exception):
    pass


class DomainError(ClrlrError, ValueError):
    """Input outside the mathematical domain of an operation."""


class DimensionError(ClrlrError, ValueError):
    pass


class ConfigError(ClrlrError, ValueError):
    pass


class NumericError(ClrlrError, ArithmeticError):
    """Numerical failure during iteration; carries whatever trace was recorded."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ParseError(ClrlrError, ValueError):
    def __init__(self, message, line=None, column=None, token=None):
        loc = ""
        if line is not None:
            loc = f"line {line}"
            if column is not None:
                loc += f", column {column}"
            loc += ": "
        super().__init__(loc + message + (f" ({token!r})" if token is not None else ""))
        self.line = line
        self.column = column
        self.token = token
