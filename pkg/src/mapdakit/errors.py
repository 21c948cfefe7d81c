"""Exception types shared across the package."""


class MapdaError(Exception):
    """Base class for every error raised by mapdakit."""


class InvalidParameterError(MapdaError, ValueError):
    pass


class ConstraintError(MapdaError, ValueError):
    """A theorem or table precondition does not hold.

    ``constraint`` carries the failing inequality in readable form.
    """

    def __init__(self, constraint: str, detail: str = ""):
        self.constraint = constraint
        msg = f"constraint violated: {constraint}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class InvalidSolutionError(MapdaError, ValueError):
    pass


class OracleLimitError(MapdaError):
    pass


class ConsistencyError(MapdaError, RuntimeError):
    """Internal invariant broken; always indicates a construction bug."""


class UnevenFillError(ConsistencyError):
    """Null cells of the filled array hold different numbers of vectors."""


class UnknownSymbolError(MapdaError, KeyError):
    pass


class InvalidArrayError(MapdaError, ValueError):
    pass


class ChannelDegeneracyError(MapdaError, RuntimeError):
    pass
