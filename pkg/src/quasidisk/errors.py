"""Exception hierarchy shared by all modules."""


class QuasidiskError(Exception):
    """Base class for every error raised by the package."""


class MetricError(QuasidiskError, ValueError):
    """Input distances do not describe a metric (asymmetry, negativity, ...)."""


class DisconnectedError(QuasidiskError):
    """Two points cannot be joined at the requested scale."""

    def __init__(self, message, pair=None, scale=None):
        super().__init__(message)
        self.pair = pair
        self.scale = scale


class PreconditionError(QuasidiskError, ValueError):
    """An operation was called outside its documented domain."""


class ResolutionError(QuasidiskError):
    """The sample is too coarse for a chart-based computation."""


class ChartError(QuasidiskError):
    """A chart is required but missing, or does not cover the region asked for."""


class GuardError(QuasidiskError):
    """The requested scale violates the scale guard and the guard is on."""


class NotPorousError(QuasidiskError):
    """No witness ball was found even for the largest porosity candidate."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class TopologyError(QuasidiskError):
    """No loop with nonzero winding exists in the search region."""


class DomainError(QuasidiskError):
    """The extracted domain violates one of its inclusion bounds."""
