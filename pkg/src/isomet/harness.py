"""Monte Carlo sweeps of rejection rates.

A sweep crosses a list of sample sizes with a list of offsets ``delta``
(or the local rule ``delta_n = c / sqrt(n)``). For every cell it draws
independent datasets, runs :func:`isomet.inference.isotropic_test` on each
and reports the rejection rate with a Wilson interval.

Scenarios
---------
``circle-vm``
    VM(delta, kappa), null 0.
``circle-mixture``
    (2/3) VM(pi/2 + delta, kappa) + (1/3) VM(delta, kappa), null at the
    population Frechet mean of the unshifted mixture (computed numerically).
``bw``
    Tangent Gaussian centered at the point ``delta`` along the geodesic from
    I to [[4, 1], [1, 3]], null I.
``booklet``
    The hierarchical booklet model stays fixed and the null moves to the
    point ``delta`` along the geodesic from its Frechet mean to (2, 1, 0).

The concentration ``kappa`` (default 1) only affects the circle scenarios.

Dataset ``k`` of cell ``(i, j)`` draws its data from
``generator(seed, scenario_id, i, j, k, 0)`` and tests with seed
``derive_seed(seed, scenario_id, i, j, k, 1)``, so every cell can be
rerun on its own and results do not depend on the worker count.
"""
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import stats

from .errors import IsometError
from .geometry.spaces import Booklet, BuresWasserstein, Circle
from .inference import TestConfig, isotropic_test
from .parallel import parallel_map, resolve_workers
from .sampling import (
    BookletHierarchical,
    BwTangentGaussian,
    VonMises,
    VonMisesMixture,
    population_frechet_mean_circle,
    shift_spec,
)
from .streams import derive_seed, generator

MAX_ERROR_RATE = 0.01
BW_TARGET = np.array([[4.0, 1.0], [1.0, 3.0]])
BOOKLET_TARGET = np.array([2.0, 1.0, 0.0])
DEFAULT_KAPPA = 1.0

SCENARIO_IDS = {"circle-vm": 0, "circle-mixture": 1, "bw": 2, "booklet": 3}


class SweepError(IsometError):
    """A cell had too many failing datasets."""


def mixture(kappa=DEFAULT_KAPPA):
    return VonMisesMixture(((2 / 3, np.pi / 2, kappa), (1 / 3, 0.0, kappa)))


@lru_cache(maxsize=None)
def mixture_null(kappa=DEFAULT_KAPPA):
    """Population Frechet mean of the unshifted mixture, in radians."""
    return population_frechet_mean_circle(mixture(kappa))[0]


def scenario_cell(scenario, delta, kappa=DEFAULT_KAPPA):
    """``(space, spec, null_mean)`` for one offset of a scenario."""
    delta = float(delta)
    kappa = float(kappa)
    if scenario == "circle-vm":
        space = Circle()
        return space, shift_spec(VonMises(0.0, kappa), space, delta), 0.0
    if scenario == "circle-mixture":
        space = Circle()
        return space, shift_spec(mixture(kappa), space, delta), mixture_null(kappa)
    if scenario == "bw":
        space = BuresWasserstein(2)
        spec = shift_spec(BwTangentGaussian(np.eye(2)), space, delta, BW_TARGET)
        return space, spec, np.eye(2)
    if scenario == "booklet":
        space = Booklet(4, 2)
        spec = BookletHierarchical()
        return space, spec, space.geodesic(spec.frechet_mean(), BOOKLET_TARGET, delta)
    raise IsometError(f"unknown scenario {scenario!r}; expected one of {sorted(SCENARIO_IDS)}")


@dataclass(frozen=True)
class SweepConfig:
    """Experiment grid.

    Exactly one of ``deltas`` and ``local_c`` is set. With ``local_c`` each
    sample size ``n`` gets the single offset ``local_c / sqrt(n)``.
    """
    scenario: str
    n_list: tuple
    deltas: tuple | None = None
    local_c: float | None = None
    datasets: int = 500
    replicates: int = 1000
    alpha: float = 0.05
    seed: int = 0
    kappa: float = DEFAULT_KAPPA

    def __post_init__(self):
        if self.scenario not in SCENARIO_IDS:
            raise IsometError(f"unknown scenario {self.scenario!r}; expected one of {sorted(SCENARIO_IDS)}")
        n_list = tuple(int(n) for n in self.n_list)
        if not n_list or min(n_list) < 2:
            raise IsometError("sample sizes must be a nonempty list of integers >= 2")
        if (self.deltas is None) == (self.local_c is None):
            raise IsometError("give either a delta grid or a local constant, not both")
        if self.deltas is not None:
            deltas = tuple(float(d) for d in self.deltas)
            if not deltas or not np.all(np.isfinite(deltas)):
                raise IsometError("delta grid must be a nonempty list of finite numbers")
            object.__setattr__(self, "deltas", deltas)
        elif not np.isfinite(self.local_c):
            raise IsometError("local constant must be finite")
        if int(self.datasets) < 1 or int(self.replicates) < 1:
            raise IsometError("datasets and replicates must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise IsometError("alpha must lie in (0, 1)")
        if not self.kappa > 0:
            raise IsometError("kappa must be positive")
        object.__setattr__(self, "n_list", n_list)
        object.__setattr__(self, "datasets", int(self.datasets))
        object.__setattr__(self, "replicates", int(self.replicates))

    def cells(self):
        """``(n_index, n, delta_index, delta)`` for every cell."""
        out = []
        for i, n in enumerate(self.n_list):
            if self.local_c is not None:
                out.append((i, n, 0, float(self.local_c) / np.sqrt(n)))
            else:
                out.extend((i, n, j, d) for j, d in enumerate(self.deltas))
        return out


@dataclass(frozen=True)
class SweepRow:
    scenario: str
    n: int
    delta: float
    rejection_rate: float
    wilson_low: float
    wilson_high: float
    datasets: int
    wall_seconds: float
    errors: int = 0

    FIELDS = ("scenario", "n", "delta", "rejection_rate", "wilson_low", "wilson_high",
              "datasets", "wall_seconds")

    def as_record(self):
        return {f: getattr(self, f) for f in self.FIELDS}


def wilson_interval(successes, trials, level=0.95):
    """Wilson score interval for a binomial proportion.

    >>> wilson_interval(0, 100)[0]
    0.0
    """
    successes, trials = int(successes), int(trials)
    if trials < 1 or not 0 <= successes <= trials:
        raise IsometError("need 0 <= successes <= trials and trials >= 1")
    if not 0.0 < level < 1.0:
        raise IsometError("level must lie in (0, 1)")
    z = stats.norm.ppf(0.5 + 0.5 * level)
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * np.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    # the exact endpoints at 0 and 1 are known; keep them free of roundoff
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == trials else min(1.0, center + half)
    return float(low), float(high)


def _run_dataset(task):
    scenario, kappa, n, delta, replicates, alpha, path = task
    try:
        space, spec, null = scenario_cell(scenario, delta, kappa)
        x = spec.sample(n, generator(*path, 0))
        res = isotropic_test(x, TestConfig(space, null, replicates, alpha, derive_seed(*path, 1)))
    except IsometError as exc:
        return None, str(exc)
    return res.reject, None


def run_cell(config, n_index, n, delta_index, delta, workers=1):
    """Run one ``(n, delta)`` cell and return its row (``wall_seconds`` included)."""
    sid = SCENARIO_IDS[config.scenario]
    # fail fast on a bad scenario or offset rather than once per dataset
    scenario_cell(config.scenario, delta, config.kappa)
    tasks = [(config.scenario, config.kappa, n, delta, config.replicates, config.alpha,
              (config.seed, sid, n_index, delta_index, k)) for k in range(config.datasets)]
    start = time.perf_counter()
    results = parallel_map(_run_dataset, tasks, workers)
    elapsed = time.perf_counter() - start
    errors = [msg for ok, msg in results if msg is not None]
    if len(errors) > MAX_ERROR_RATE * config.datasets:
        raise SweepError(f"{config.scenario} n={n} delta={delta:g}: {len(errors)} of "
                         f"{config.datasets} datasets failed (first: {errors[0]})")
    done = [ok for ok, msg in results if msg is None]
    if not done:
        raise SweepError(f"{config.scenario} n={n} delta={delta:g}: every dataset failed")
    hits = int(sum(done))
    low, high = wilson_interval(hits, len(done))
    return SweepRow(config.scenario, int(n), float(delta), hits / len(done), low, high,
                    len(done), elapsed, len(errors))


def run_sweep(config, workers=None, timing=True):
    """Rejection-rate table for every cell of ``config``, sorted by ``(scenario, n, delta)``.

    ``timing=False`` reports ``wall_seconds`` as 0 so that repeated runs are
    byte-identical.
    """
    workers = resolve_workers(workers)
    rows = []
    for i, n, j, delta in config.cells():
        row = run_cell(config, i, n, j, delta, workers)
        if not timing:
            row = SweepRow(**{**row.__dict__, "wall_seconds": 0.0})
        rows.append(row)
    rows.sort(key=lambda r: (r.scenario, r.n, r.delta))
    return rows


def run_local_power(config, workers=None, timing=True):
    """Rejection rates along ``delta_n = c / sqrt(n)``, one row per sample size."""
    if config.local_c is None:
        raise IsometError("run_local_power needs a config with local_c set")
    return run_sweep(config, workers, timing)


__all__ = [
    "BOOKLET_TARGET", "BW_TARGET", "DEFAULT_KAPPA", "SCENARIO_IDS", "SweepConfig", "SweepError",
    "SweepRow", "mixture", "mixture_null", "run_cell", "run_local_power", "run_sweep", "scenario_cell",
    "wilson_interval",
]
