"""Exception hierarchy for lwrnet."""


class LwrnetError(Exception):
    """Base class for all errors raised by this package."""


class NetworkError(LwrnetError, ValueError):
    """The road network description is not admissible."""


class ColumnSumError(NetworkError):
    pass


class DanglingEndpoint(NetworkError):
    pass


class DuplicateAttachment(NetworkError):
    pass


class BoundaryConflict(NetworkError):
    """A road end is attached to a junction and also carries a boundary mode."""


class RangeError(NetworkError):
    pass


class UnknownRoad(NetworkError):
    pass


class FluxError(LwrnetError, ValueError):
    pass


class DomainError(FluxError):
    pass


class DimensionError(FluxError):
    pass


class UnsupportedJunction(FluxError):
    pass


class DegenerateAlpha(FluxError):
    pass


class DiscretizationError(LwrnetError, ValueError):
    pass


class UnsupportedOrder(DiscretizationError):
    pass


class UnsupportedDegree(DiscretizationError):
    pass


class MassViolationError(LwrnetError, RuntimeError):
    """Raised in strict bounds mode when a cell average leaves [0, u_max]."""


class ParseError(LwrnetError, ValueError):
    """Configuration could not be parsed.

    ``line`` and ``column`` are set for syntax errors; ``path`` points at the
    offending key for schema errors.
    """

    def __init__(self, message, line=None, column=None, path=None):
        where = []
        if line is not None:
            where.append(f"line {line}, column {column}")
        if path:
            where.append(f"at {path}")
        full = f"{message} ({'; '.join(where)})" if where else message
        super().__init__(full)
        self.line = line
        self.column = column
        self.path = path
