"""Exception types shared across the library."""


class TorsionLabError(Exception):
    """Base class for all library errors."""


class InvalidComplexError(TorsionLabError):
    def __init__(self, report):
        self.report = report
        super().__init__(f"invalid complex: {report.summary()}")


class PathComplexMismatchError(TorsionLabError):
    pass


class MissingEdgeMatrixError(TorsionLabError):
    pass


class NotFlatError(TorsionLabError):
    pass


class OpenPathError(TorsionLabError):
    pass


class UnsupportedDimensionError(TorsionLabError):
    pass


class UnsupportedStructureError(TorsionLabError):
    pass


class IllConditionedError(TorsionLabError):
    """A rank decision fell inside the guard band around the cutoff."""


class ZeroModeError(TorsionLabError):
    """Holonomy has eigenvalue 1 and zero modes were not requested."""


class SprayError(TorsionLabError):
    pass
