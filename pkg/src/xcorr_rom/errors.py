"""Exception hierarchy shared by all modules."""


class RomError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(RomError, ValueError):
    """Invalid generator, model or configuration parameter."""


class DegenerateCorrelationError(RomError, ValueError):
    """The cross-correlation carries no alignment information (an all-zero field)."""


class RegressionError(RomError):
    """A regression model could not be fitted."""


class GridMismatchError(RomError, ValueError):
    """Two snapshot containers live on incompatible grids."""


class FormatError(RomError):
    """A persisted file is malformed or truncated."""


class StageError(RomError):
    """Failure inside one stage of the offline/online pipeline.

    The original exception is chained as ``__cause__``.
    """

    def __init__(self, stage, cause):
        self.stage = stage
        super().__init__(f"{stage} stage failed: {cause}")
