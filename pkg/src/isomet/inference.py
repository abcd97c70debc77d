"""The isotropic randomization test for a hypothesized Frechet mean.

The statistic is the empirical Frechet variance. Randomizing each
observation by an independent random isotropy of the hypothesized mean
``mu`` leaves the law of the sample unchanged when ``mu`` is the true
Frechet mean and inflates the variance otherwise, so the test rejects when
the observed variance is *small* compared with its randomized replicates.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import DegenerateStatisticError, IsometError, NonUniqueMeanError
from .frechet import batch_frechet_variance
from .geometry.points import wrap_angle
from .geometry.spaces import Circle, MetricSpace
from .isotropy import RandomIsotropy
from .parallel import parallel_map
from .streams import derive_seed, replicate_stream

CHUNK_ELEMENTS = 2_000_000


@dataclass(frozen=True, eq=False)
class TestConfig:
    """Inputs of one test: the space, the null mean, ``B``, ``alpha`` and the seed.

    ``randomization`` defaults to the space's standard random isotropy of
    ``null_mean``.
    """
    __test__ = False

    space: MetricSpace
    null_mean: np.ndarray
    replicates: int = 1000
    alpha: float = 0.05
    seed: int = 0
    randomization: RandomIsotropy | None = None

    def __post_init__(self):
        if int(self.replicates) < 1:
            raise IsometError("the number of replicates must be at least 1")
        if not 0.0 < self.alpha < 1.0:
            raise IsometError("alpha must lie in (0, 1)")
        null = self.space.canonical(self.null_mean)
        rand = self.randomization or RandomIsotropy.for_space(self.space, null)
        if rand.space != self.space or not np.array_equal(rand.center, null):
            raise IsometError("randomization must be centered at the null mean")
        object.__setattr__(self, "null_mean", null)
        object.__setattr__(self, "randomization", rand)
        object.__setattr__(self, "replicates", int(self.replicates))


@dataclass(frozen=True, eq=False)
class TestResult:
    __test__ = False

    observed_statistic: float
    randomized_statistics: np.ndarray
    p_value: float
    reject: bool
    fallback_count: int
    seed: int
    replicates: int
    alpha: float
    degenerate_redraws: int = 0

    def to_dict(self):
        return {
            "observed_statistic": self.observed_statistic,
            "p_value": self.p_value,
            "reject": self.reject,
            "B": self.replicates,
            "alpha": self.alpha,
            "seed": self.seed,
            "fallback_count": self.fallback_count,
        }


def p_value_curve(randomized_statistics, observed):
    """``(1 + #{V_b <= observed}) / (B + 1)``; ties count against rejection."""
    v = np.asarray(randomized_statistics, dtype=float)
    if v.size < 1:
        raise IsometError("need at least one randomized statistic")
    return float((1 + np.count_nonzero(v <= observed)) / (v.size + 1))


def _replicate_block(rand, prepared, seed, indices, sub=0):
    draws = [rand.randomize(prepared, replicate_stream(seed, b, sub)) for b in indices]
    return np.stack([d[0] for d in draws]), sum(d[1] for d in draws)


def isotropic_test(sample, config):
    """Run the randomization test of ``H0: E[X] = config.null_mean``.

    Replicate ``b`` draws its isotropies from the stream ``(seed, b)``;
    within it observation ``i`` uses the ``i``-th draw. A replicate whose
    Frechet mean is not unique is redrawn once from ``(seed, b, 1)``.

    Raises
    ------
    NonUniqueMeanError
        If the observed sample, or a replicate after its redraw, has no
        unique Frechet mean.
    """
    space = config.space
    sample = space.canonical(sample)
    if sample.ndim != space.point_ndim + 1 or sample.shape[0] < 2:
        raise IsometError("the test needs a sample of at least two points")
    n = sample.shape[0]
    observed, degenerate = batch_frechet_variance(space, sample[None])
    if degenerate[0]:
        raise NonUniqueMeanError("the observed sample has no unique Frechet mean")
    observed = float(observed[0])

    rand = config.randomization
    prepared = rand.prepare(sample)
    B = config.replicates
    per_point = int(np.prod(sample.shape[1:], dtype=int))
    chunk = max(1, CHUNK_ELEMENTS // (n * per_point))
    values = np.empty(B)
    fallback = 0
    redraws = 0
    for start in range(0, B, chunk):
        idx = np.arange(start, min(B, start + chunk))
        block, fb = _replicate_block(rand, prepared, config.seed, idx)
        fallback += fb
        v, bad = batch_frechet_variance(space, block)
        if np.any(bad):
            again, fb = _replicate_block(rand, prepared, config.seed, idx[bad], sub=1)
            fallback += fb
            v2, bad2 = batch_frechet_variance(space, again)
            if np.any(bad2):
                raise NonUniqueMeanError("randomized sample has no unique Frechet mean after redraw")
            v[bad] = v2
            redraws += int(bad.sum())
        values[idx] = v
    p = p_value_curve(values, observed)
    return TestResult(observed_statistic=observed, randomized_statistics=values, p_value=p,
                      reject=bool(p <= config.alpha), fallback_count=int(fallback),
                      seed=int(config.seed), replicates=B, alpha=float(config.alpha),
                      degenerate_redraws=redraws)


@dataclass(frozen=True, eq=False)
class ConfidenceSet:
    """Grid points whose null hypothesis is not rejected.

    ``intervals`` lists maximal accepted arcs ``(start, end)`` in radians,
    running counterclockwise from ``start`` to ``end`` (circle only).
    """
    grid: np.ndarray
    accepted: np.ndarray
    p_values: np.ndarray
    errors: tuple = ()
    intervals: list = field(default_factory=list)


def _invert_one(args):
    sample, space, mu, replicates, alpha, seed = args
    try:
        res = isotropic_test(sample, TestConfig(space, mu, replicates, alpha, seed))
    except IsometError as exc:
        return float("nan"), False, str(exc)
    return res.p_value, not res.reject, None


def invert_test(sample, space, grid, replicates=1000, alpha=0.05, seed=0, workers=1):
    """Confidence set for the Frechet mean by testing every grid point.

    Grid point ``i`` uses the seed derived from ``(seed, i)``. A point whose
    test fails is reported as rejected and its message kept in ``errors``.
    """
    grid = space.canonical(grid)
    if grid.ndim != space.point_ndim + 1 or grid.shape[0] == 0:
        raise IsometError("grid must be a nonempty stack of points")
    sample = space.canonical(sample)
    tasks = [(sample, space, grid[i], replicates, alpha, derive_seed(seed, i))
             for i in range(grid.shape[0])]
    results = parallel_map(_invert_one, tasks, workers)
    p = np.array([r[0] for r in results])
    accepted = np.array([r[1] for r in results], dtype=bool)
    errors = tuple((i, r[2]) for i, r in enumerate(results) if r[2] is not None)
    intervals = circle_arcs(grid, accepted) if isinstance(space, Circle) else []
    return ConfidenceSet(grid=grid, accepted=accepted, p_values=p, errors=errors, intervals=intervals)


def circle_arcs(grid, accepted):
    """Merge accepted angles into maximal arcs, respecting wrap-around.

    ``grid`` must be sorted. A fully accepted grid returns ``[(0, 2*pi)]``.
    """
    grid = np.asarray(grid, dtype=float)
    accepted = np.asarray(accepted, dtype=bool)
    m = accepted.size
    if not accepted.any():
        return []
    if accepted.all():
        return [(0.0, 2.0 * np.pi)]
    # start scanning just after a rejected point so no run straddles the seam
    shift = int(np.flatnonzero(~accepted)[0]) + 1
    arcs = []
    run_start = None
    for step in range(m):
        i = (shift + step) % m
        if accepted[i] and run_start is None:
            run_start = i
        if run_start is not None and (not accepted[i] or step == m - 1):
            last = i if accepted[i] else (i - 1) % m
            arcs.append((float(grid[run_start]), float(grid[last])))
            run_start = None
    return arcs


def arc_contains(arc, theta):
    start, end = arc
    span = wrap_angle(end - start)
    return bool(wrap_angle(theta - start) <= span + 1e-12)


def score_test_circle(sample, mu0, alpha=0.05):
    """Score test for the mean direction of circular data.

    ``T = n * mean(sin(theta - mu0))^2 / mean(sin^2(theta - mu0))`` is
    referred to a chi-squared law with one degree of freedom.

    Returns
    -------
    statistic, p_value, reject
    """
    theta = Circle().canonical(sample)
    n = theta.size
    if n < 2:
        raise IsometError("the score test needs at least two observations")
    s = np.sin(theta - float(mu0))
    denom = np.mean(s * s)
    if denom < 1e-12:
        raise DegenerateStatisticError("all observations lie on the axis of the null direction")
    t = float(n * np.mean(s) ** 2 / denom)
    p = float(stats.chi2.sf(t, 1))
    return t, p, bool(p <= alpha)


__all__ = [
    "ConfidenceSet", "TestConfig", "TestResult", "arc_contains", "circle_arcs", "invert_test",
    "isotropic_test", "p_value_curve", "score_test_circle",
]
