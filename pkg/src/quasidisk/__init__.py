"""Discrete certificates for quasidisk hypotheses on finite metric samples.

Finite metric spaces with path metrics and nets, epsilon-chains and
quasiarcs, sampled regularity invariants, level-set based quasiconvex paths,
and chord-arc loops whose enclosed domains are checked for LLC, Ahlfors
regularity and boundary porosity.
"""

__version__ = "0.1.0"

from .errors import (ChartError, DisconnectedError, DomainError, GuardError, MetricError, NotPorousError,
                     PreconditionError, QuasidiskError, ResolutionError, TopologyError)
from .space import FiniteMetricSpace, PathMetricSpace, build_space, maximal_net, path_metric

__all__ = [
    "__version__", "FiniteMetricSpace", "PathMetricSpace", "build_space", "maximal_net", "path_metric",
    "QuasidiskError", "MetricError", "DisconnectedError", "PreconditionError", "ResolutionError", "ChartError",
    "GuardError", "NotPorousError", "TopologyError", "DomainError",
]
