import itertools
from collections import Counter

import numpy as np
import pytest

from isomet.errors import IsometError, SingularResultError
from isomet.geometry import Booklet, BuresWasserstein, Circle, Euclidean
from isomet.isotropy import (
    BookletMap,
    CircleReflection,
    GeodesicSymmetry,
    Identity,
    RandomIsotropy,
    apply,
    probe_admissibility,
)
from isomet.sampling import BookletHierarchical, BwTangentGaussian, VonMises

from conftest import random_booklet, random_spd

PI = np.pi
BOOK = Booklet(4, 2)
BW = BuresWasserstein(2)


# -- examples ------------------------------------------------------------------

def test_apply_examples():
    assert apply(CircleReflection(0.0), PI / 2) == pytest.approx(3 * PI / 2)
    assert apply(CircleReflection(0.0), PI) == pytest.approx(PI)
    g = BookletMap([1, 0.5, 1], (1, 3, 2, 4), reflect_page=True)
    assert np.array_equal(apply(g, [2, 0.7, 0]), [3, 0.7, 2])
    with pytest.raises(SingularResultError):
        apply(GeodesicSymmetry(BW, np.eye(2)), np.diag([4.0, 1.0]))


def test_booklet_map_must_fix_center_branch():
    with pytest.raises(IsometError):
        BookletMap([1, 0.5, 1], (2, 1, 3, 4))
    with pytest.raises(IsometError):
        BookletMap([1, 0.5, 1], (1, 1, 3, 4))
    # a spine-origin center lies on every branch
    BookletMap([1, 0.0, 1], (2, 1, 3, 4))


def test_scheme_validation():
    with pytest.raises(IsometError):
        RandomIsotropy(Circle(), 0.0, "booklet")
    with pytest.raises(IsometError):
        RandomIsotropy(BOOK, [1, 0.5, 1], "reflection")
    with pytest.raises(IsometError):
        RandomIsotropy(Circle(), 0.0, "rotation")
    assert RandomIsotropy.for_space(BOOK, [1, 0.5, 1]).scheme == "booklet"
    assert RandomIsotropy.for_space(BW, np.eye(2)).scheme == "reflection"


def test_reflection_coin_is_fair(rng):
    r = RandomIsotropy(Circle(), 0.0)
    draws = [r.draw(rng) for _ in range(100_000)]
    freq = np.mean([isinstance(g, CircleReflection) for g in draws])
    assert abs(freq - 0.5) < 0.01


def test_booklet_permutations_are_uniform(rng):
    r = RandomIsotropy(BOOK, [1, 0.5, 1], "booklet")
    perms = r._permutations(rng, 100_000)
    assert np.all(perms[:, 0] == 1)
    counts = Counter(map(tuple, perms[:, 1:].astype(int)))
    assert set(counts) == set(itertools.permutations((2, 3, 4)))
    for c in counts.values():
        assert abs(c / 100_000 - 1 / 6) < 0.02
    flips = [r.draw(rng).reflect_page for _ in range(20_000)]
    assert abs(np.mean(flips) - 0.5) < 0.015


def test_spine_center_uses_all_permutations(rng):
    r = RandomIsotropy(Booklet(3, 1), [1, 0.0], "booklet")
    counts = Counter(map(tuple, r._permutations(rng, 60_000).astype(int)))
    assert len(counts) == 6


def test_probe_examples(rng):
    r = RandomIsotropy(Circle(), 0.0)
    (_, fixed), (_, moved) = probe_admissibility(r, np.array([PI, PI / 2]), 100, rng)
    assert fixed == 1 and moved == 2
    rb = RandomIsotropy(BOOK, [1, 0.5, 1], "booklet")
    [(_, count)] = probe_admissibility(rb, [[2, 0.7, 0]], 100, rng)
    assert count >= 2
    # branch 2 at the center page moves only by permutation: 3 images
    [(_, count)] = probe_admissibility(rb, [[2, 0.7, 1]], 200, rng)
    assert count == 3


def test_probe_skips_undefined_reflections(rng):
    r = RandomIsotropy(BW, np.eye(2))
    [(_, count)] = probe_admissibility(r, [np.diag([4.0, 1.0])], 50, rng)
    assert count == 1


# -- invariants over draws ----------------------------------------------------------

CENTERS = [
    (Circle(), 1.3),
    (Euclidean(3), np.array([0.5, -1.0, 2.0])),
    (BW, np.array([[2.0, 0.3], [0.3, 1.0]])),
    (BOOK, np.array([2.0, 0.4, -0.5])),
    (BOOK, np.array([1.0, 0.0, 0.7])),
]


@pytest.mark.parametrize("space,center", CENTERS, ids=lambda v: repr(v) if not isinstance(v, np.ndarray) else "")
def test_drawn_elements_fix_the_center_exactly(space, center, rng):
    r = RandomIsotropy.for_space(space, center)
    for _ in range(200):
        g = r.draw(rng)
        assert np.array_equal(apply(g, r.center), r.center)


def _random_points(space, rng, size):
    if isinstance(space, Circle):
        return rng.uniform(0, 2 * PI, size)
    if isinstance(space, Euclidean):
        return rng.standard_normal((size, space.dim))
    return random_booklet(rng, size, space.k, space.d)


@pytest.mark.parametrize("space,center", [c for c in CENTERS if not isinstance(c[0], BuresWasserstein)],
                         ids=["circle", "euclidean", "booklet", "booklet-spine"])
def test_isometry_and_involution(space, center, rng):
    r = RandomIsotropy.for_space(space, center)
    x, y = _random_points(space, rng, 1000), _random_points(space, rng, 1000)
    for _ in range(30):
        g = r.draw(rng)
        gx, gy = apply(g, x), apply(g, y)
        assert np.max(np.abs(space.distance(gx, gy) - space.distance(x, y))) < 1e-9
    refl = r.reflection() if r.scheme == "reflection" else BookletMap(r.center, tuple(range(1, space.k + 1)), True)
    assert np.max(space.distance(apply(refl, apply(refl, x)), x)) < 1e-9


def test_bw_symmetry_is_involution_on_its_domain(rng):
    center = np.array([[2.0, 0.3], [0.3, 1.0]])
    g = GeodesicSymmetry(BW, center)
    x = BwTangentGaussian(center).sample(500, rng)
    # stay off the boundary, where x is nearly singular and the square root loses digits
    x = x[np.all(np.abs(np.linalg.eigvalsh(BW.log(center, x))) < 0.9, axis=-1)]
    assert np.max(BW.distance(apply(g, apply(g, x)), x)) < 1e-9


# -- randomize ------------------------------------------------------------------

def test_randomize_is_stream_deterministic(rng):
    r = RandomIsotropy(Circle(), 0.4)
    prepared = r.prepare(rng.uniform(0, 2 * PI, 50))
    a, _ = r.randomize(prepared, np.random.default_rng(7))
    b, _ = r.randomize(prepared, np.random.default_rng(7))
    assert np.array_equal(a, b)


def test_randomize_counts_bw_fallbacks(rng):
    r = RandomIsotropy(BW, np.eye(2))
    sample = np.array([np.diag([4.0, 1.0])] * 200 + [np.diag([1.5, 1.0])] * 200)
    prepared = r.prepare(sample)
    out, fallback = r.randomize(prepared, rng)
    # the first half can never be reflected, so it is always left in place
    assert np.array_equal(out[:200], sample[:200])
    assert 70 < fallback < 130
    moved = ~np.all(out[200:] == sample[200:], axis=(1, 2))
    assert 70 < moved.sum() < 130


def test_identity_scheme_is_a_control(rng):
    r = RandomIsotropy(Circle(), 0.0, "identity")
    x = rng.uniform(0, 2 * PI, 10)
    assert isinstance(r.draw(rng), Identity)
    out, fallback = r.randomize(r.prepare(x), rng)
    assert np.array_equal(out, x) and fallback == 0


# -- moment preservation under radial symmetry -----------------------------------

def _moment_z(space, center, x, y):
    # two-sample z statistics for the first four distance moments
    dx, dy = space.distance(center, x), space.distance(center, y)
    out = []
    for k in range(1, 5):
        a, b = dx ** k, dy ** k
        se = np.sqrt(a.var() / a.size + b.var() / b.size)
        out.append((a.mean() - b.mean()) / se)
    return np.array(out)


def test_circle_moments_preserved(rng):
    mu = 1.0
    r = RandomIsotropy(Circle(), mu)
    x = VonMises(mu, 1.0).sample(5000, rng)
    # an independent sample plays the role of the original so the z band is honest
    x2 = VonMises(mu, 1.0).sample(5000, rng)
    out, _ = r.randomize(r.prepare(x), rng)
    assert np.all(np.abs(_moment_z(Circle(), mu, out, x2)) < 3)


def test_booklet_moments_preserved(rng):
    spec = BookletHierarchical()
    center = spec.frechet_mean()
    r = RandomIsotropy(spec.space, center, "booklet")
    x = spec.sample(5000, rng)
    x2 = spec.sample(5000, rng)
    out, _ = r.randomize(r.prepare(x), rng)
    # the distance to the center is invariant under every isotropy, so moments agree exactly
    assert np.allclose(spec.space.distance(center, out), spec.space.distance(center, x), atol=1e-12)
    assert np.all(np.abs(_moment_z(spec.space, center, out, x2)) < 3)


def test_bw_tangent_mean_preserved(rng):
    center = np.array([[2.0, 0.3], [0.3, 1.0]])
    r = RandomIsotropy(BW, center)
    x = BwTangentGaussian(center).sample(10_000, rng)
    out, fallback = r.randomize(r.prepare(x), rng)
    assert fallback == 0
    logs = BW.log(center, out).reshape(-1, 4)
    z = logs.mean(0) / (logs.std(0) / np.sqrt(logs.shape[0]))
    assert np.all(np.abs(z) < 3)


def test_random_spd_reflections_mostly_defined(rng):
    # sanity for the fallback path: a concentrated sample rarely leaves the domain
    center = np.eye(2)
    x = random_spd(rng, 1000, spread=0.3)
    _, ok = BW.geodesic_symmetry_masked(center, x)
    assert ok.mean() > 0.99
