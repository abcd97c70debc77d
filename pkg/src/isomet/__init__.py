"""Isotropic randomization tests for Frechet means in metric spaces."""
from .errors import (
    CutLocusError,
    DegenerateStatisticError,
    GeometryError,
    IsometError,
    NonUniqueMeanError,
    NotPositiveDefiniteError,
    SingularResultError,
)
from .frechet import FrechetEstimate, frechet_mean, frechet_mean_oracle, frechet_objective, frechet_variance
from .geometry import Booklet, BuresWasserstein, Circle, Euclidean, MetricSpace, get_space
from .inference import (
    ConfidenceSet,
    TestConfig,
    TestResult,
    invert_test,
    isotropic_test,
    score_test_circle,
)
from .isotropy import RandomIsotropy, apply, probe_admissibility

__version__ = "0.1.0"
