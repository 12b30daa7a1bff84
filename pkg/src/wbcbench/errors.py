"""Exception hierarchy shared across the package."""


class WbcBenchError(Exception):
    """Base class for all errors raised by wbcbench."""


class ParseError(WbcBenchError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DataError(WbcBenchError, ValueError):
    pass


class BalanceError(WbcBenchError, ValueError):
    pass


class StatsError(WbcBenchError, ValueError):
    pass


class ShapeError(WbcBenchError, ValueError):
    pass


class ConfigError(WbcBenchError, ValueError):
    pass


class DomainError(WbcBenchError, ValueError):
    pass


class FoldError(WbcBenchError, ValueError):
    pass


class FitError(WbcBenchError, RuntimeError):
    pass


class ReportError(WbcBenchError, ValueError):
    pass
