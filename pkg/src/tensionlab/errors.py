"""Exception types shared across the package."""


class TensionLabError(Exception):
    pass


class DomainError(TensionLabError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class UnsupportedOperation(TensionLabError):
    pass


class GridTooCoarseError(TensionLabError, ValueError):
    pass


class SpecError(TensionLabError, ValueError):
    """Inconsistent functional or problem description."""


class InfiniteEnergyError(TensionLabError):
    pass


class DivergenceError(TensionLabError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class InsufficientDataError(TensionLabError, ValueError):
    pass


class ConfigError(TensionLabError, ValueError):
    pass
