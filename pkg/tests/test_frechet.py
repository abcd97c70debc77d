import numpy as np
import pytest

from isomet.errors import IsometError, NonUniqueMeanError
from isomet.frechet import (
    batch_frechet_mean,
    batch_frechet_variance,
    frechet_mean,
    frechet_mean_oracle,
    frechet_objective,
    frechet_variance,
)
from isomet.geometry import Booklet, BuresWasserstein, Circle, Euclidean
from isomet.isotropy import BookletMap, CircleReflection

from conftest import random_booklet, random_spd

PI = np.pi
BOOK = Booklet(4, 2)
SEVEN = np.array([[1, 0.8, 1]] * 4 + [[2, 0.2, 1], [3, 0.2, 1], [4, 0.2, 1]], dtype=float)


# -- examples ------------------------------------------------------------------

def test_objective_examples():
    assert frechet_objective(Euclidean(1), [[0.0], [2.0]], [1.0]) == pytest.approx(1.0)
    assert frechet_objective(Circle(), [0.0, PI / 2], 0.0) == pytest.approx(PI ** 2 / 8)
    assert frechet_objective(BOOK, [[1, 1, 0], [2, 1, 0]], [1, 0, 0]) == pytest.approx(1.0)


def test_objective_broadcasts_over_candidates():
    vals = frechet_objective(Circle(), [0.0, PI / 2], np.array([0.0, PI / 4]))
    assert vals == pytest.approx([PI ** 2 / 8, PI ** 2 / 16])


def test_mean_examples():
    est = frechet_mean(Circle(), [PI / 2 - 0.3, PI / 2 + 0.3])
    assert est.mean == pytest.approx(PI / 2)
    assert est.variance == pytest.approx(0.09)
    with pytest.raises(NonUniqueMeanError):
        frechet_mean(Circle(), [0.0, PI])
    est = frechet_mean(BOOK, SEVEN)
    assert est.mean == pytest.approx([1, 2.6 / 7, 1], abs=1e-14)
    a = np.array([[2.0, 0.5], [0.5, 1.0]])
    est = frechet_mean(BuresWasserstein(), [a, a])
    assert np.allclose(est.mean, a, atol=1e-12)
    assert est.converged and est.variance < 1e-20


def test_variance_examples():
    assert frechet_variance(Euclidean(1), [[0.0], [2.0]], [1.0]) == pytest.approx(1.0)
    assert frechet_variance(Circle(), [1.234], 1.234) == 0.0
    assert frechet_variance(BOOK, [[2, 0.3, 1]], [2, 0.3, 1]) == 0.0
    assert frechet_variance(Circle(), [0.0, PI / 2], PI / 4) == pytest.approx(PI ** 2 / 16)


def test_oracle_examples():
    grid = np.arange(10_000) * (2 * PI / 10_000)
    assert abs(frechet_mean_oracle(Circle(), [PI / 2 - 0.3, PI / 2 + 0.3], grid) - PI / 2) <= 2 * PI / 10_000
    assert frechet_mean_oracle(Euclidean(1), [[0.0], [2.0]], [[0.0], [1.0], [2.0]]) == pytest.approx([1.0])
    spine = np.arange(1001) * 1e-3
    grid = np.array([[z, x, 1.0] for z in range(1, 5) for x in spine])
    best = frechet_mean_oracle(BOOK, SEVEN, grid)
    assert best[0] == 1 and abs(best[1] - 0.371) <= 1e-3


def test_ties_go_to_first_grid_point():
    assert frechet_mean_oracle(Euclidean(1), [[0.0], [2.0]], [[0.0], [2.0]]) == pytest.approx([0.0])


def test_empty_inputs():
    with pytest.raises(IsometError):
        frechet_mean(Circle(), np.array([]))
    with pytest.raises(IsometError):
        frechet_mean_oracle(Circle(), [0.0], np.array([]))


# -- oracle agreement on 100 random samples per space ------------------------------

def _refine(space, sample, center_grid, steps, make_grid):
    best = frechet_mean_oracle(space, sample, center_grid)
    for h in steps:
        best = frechet_mean_oracle(space, sample, make_grid(best, h))
    return best


def test_circle_matches_oracle(rng):
    grid = np.arange(200_000) * (2 * PI / 200_000)
    for _ in range(100):
        n = rng.integers(2, 21)
        x = rng.vonmises(rng.uniform(-PI, PI), rng.uniform(0.1, 3.0), n) % (2 * PI)
        est = frechet_mean(Circle(), x)
        best = frechet_mean_oracle(Circle(), x, grid)
        assert Circle().distance(est.mean, best) <= 2 * PI / 200_000
        assert est.variance <= frechet_objective(Circle(), x, best) + 1e-12


def test_euclidean_matches_oracle(rng):
    h = 1e-3
    offsets = np.stack(np.meshgrid(np.arange(-50, 51), np.arange(-50, 51)), -1).reshape(-1, 2) * h
    for _ in range(100):
        x = rng.normal(size=(rng.integers(2, 21), 2))
        coarse = np.stack(np.meshgrid(np.linspace(-3, 3, 121), np.linspace(-3, 3, 121)), -1).reshape(-1, 2)
        best = _refine(Euclidean(2), x, coarse, [h], lambda b, step: b + offsets)
        assert np.linalg.norm(frechet_mean(Euclidean(2), x).mean - best) <= h


def _booklet_grid(space, center, h, width=20):
    spine = center[1] + h * np.arange(-width, width + 1)
    page = center[2] + h * np.arange(-width, width + 1)
    spine = spine[spine >= 0]
    pts = [[z, s, y] for z in range(1, space.k + 1) for s in np.append(spine, 0.0) for y in page]
    return space.canonical(np.array(pts))


def test_booklet_matches_oracle(rng):
    space = Booklet(3, 2)
    for _ in range(100):
        x = random_booklet(rng, rng.integers(2, 21), k=3, d=2, spine_zero_prob=0.05)
        # skew one branch so that the mean is off the spine about half of the time
        x[:, 1] *= np.where(x[:, 0] == 1, rng.uniform(1, 4), 1.0)
        # the coarse grid covers the hull of the data
        coarse_spine = np.arange(0, x[:, 1].max() + 0.05, 0.05)
        coarse_page = np.arange(x[:, 2].min(), x[:, 2].max() + 0.05, 0.05)
        coarse = space.canonical(np.array([[z, s, y] for z in (1, 2, 3) for s in coarse_spine for y in coarse_page]))
        best = _refine(space, x, coarse, [0.01, 1e-3, 1e-4],
                       lambda b, h: _booklet_grid(space, b, h))
        est = frechet_mean(space, x)
        assert space.distance(est.mean, best) <= 2e-4
        assert est.variance <= frechet_objective(space, x, best) + 1e-12


def _bw_grid(center, h, width=4):
    r = h * np.arange(-width, width + 1)
    a, b, c = np.meshgrid(r, r, r, indexing="ij")
    d = np.stack([a.ravel(), b.ravel(), b.ravel(), c.ravel()], -1).reshape(-1, 2, 2)
    cand = center + d
    return cand[np.linalg.eigvalsh(cand)[:, 0] > 1e-3]


def test_bw_matches_oracle(rng):
    space = BuresWasserstein(2)
    for _ in range(100):
        x = random_spd(rng, rng.integers(2, 21), spread=1.0)
        start = x.mean(axis=0)[None]
        best = _refine(space, x, start, [0.1, 0.03, 0.01, 3e-3, 1e-3, 3e-4],
                       lambda b, h: _bw_grid(b, h))
        est = frechet_mean(space, x)
        assert est.converged
        assert space.distance(est.mean, best) <= 1e-3
        assert est.variance <= frechet_objective(space, x, best) + 1e-12


# -- minimality, monotonicity, equivariance -------------------------------------------

@pytest.mark.parametrize("space", [Circle(), Euclidean(2), BuresWasserstein(2), Booklet(4, 2)], ids=repr)
def test_mean_beats_random_probes(space, rng):
    for _ in range(10):
        if isinstance(space, Circle):
            x, probes = rng.vonmises(1.0, 1.0, 15) % (2 * PI), rng.uniform(0, 2 * PI, 1000)
        elif isinstance(space, Euclidean):
            x, probes = rng.normal(size=(15, 2)), rng.normal(size=(1000, 2))
        elif isinstance(space, BuresWasserstein):
            x, probes = random_spd(rng, 15), random_spd(rng, 1000)
        else:
            x, probes = random_booklet(rng, 15), random_booklet(rng, 1000)
        est = frechet_mean(space, x)
        assert np.all(est.variance <= frechet_objective(space, x, probes) + 1e-12)


def test_bw_fixed_point_is_monotone(rng):
    for _ in range(20):
        x = random_spd(rng, 30, spread=2.0)
        est = frechet_mean(BuresWasserstein(), x, trace=True)
        trace = np.array(est.trace)
        assert len(trace) == est.objective_evaluations + 1
        assert np.all(np.diff(trace) <= 1e-12)
        assert trace[-1] == pytest.approx(est.variance, rel=1e-10)


def test_estimate_variance_is_recomputable(rng):
    x = random_spd(rng, 25)
    est = frechet_mean(BuresWasserstein(), x)
    assert abs(est.variance - frechet_variance(BuresWasserstein(), x, est.mean)) < 1e-12


def test_isotropy_equivariance(rng):
    c = Circle()
    for _ in range(20):
        x = rng.vonmises(0.5, 1.0, 30) % (2 * PI)
        g = CircleReflection(rng.uniform(0, 2 * PI))
        assert frechet_mean(c, g.apply(x)).variance == pytest.approx(frechet_mean(c, x).variance, abs=1e-9)
    for _ in range(20):
        x = random_booklet(rng, 30)
        center = np.array([2.0, 0.4, 0.1])
        g = BookletMap(center, (3, 2, 4, 1), bool(rng.integers(2)))
        assert frechet_mean(BOOK, g.apply(x)).variance == pytest.approx(frechet_mean(BOOK, x).variance, abs=1e-9)


# -- batched estimators agree with the single-sample ones ---------------------------

@pytest.mark.parametrize("space", [Circle(), Euclidean(3), BuresWasserstein(2), Booklet(4, 2)], ids=repr)
def test_batch_matches_single(space, rng):
    if isinstance(space, Circle):
        xs = rng.vonmises(2.0, 0.5, (8, 40)) % (2 * PI)
    elif isinstance(space, Euclidean):
        xs = rng.normal(size=(8, 40, 3))
    elif isinstance(space, BuresWasserstein):
        xs = random_spd(rng, 320).reshape(8, 40, 2, 2)
    else:
        xs = random_booklet(rng, 320).reshape(8, 40, 3)
    means, bad = batch_frechet_mean(space, xs)
    values, _ = batch_frechet_variance(space, xs)
    assert not bad.any()
    for i in range(8):
        est = frechet_mean(space, xs[i])
        assert np.max(space.distance(means[i], est.mean)) < 1e-9
        assert values[i] == pytest.approx(est.variance, rel=1e-10, abs=1e-14)


def test_batch_flags_non_unique_rows():
    xs = np.array([[0.0, PI], [0.1, 0.2]])
    _, bad = batch_frechet_mean(Circle(), xs)
    assert list(bad) == [True, False]


def test_circle_ties_with_more_points():
    # three equally spaced points: three global minimizers
    with pytest.raises(NonUniqueMeanError):
        frechet_mean(Circle(), [0.0, 2 * PI / 3, 4 * PI / 3])
