"""Mean-fixing maps and the random isotropies used to randomize samples.

An isotropy of ``mu`` is an isometry that leaves ``mu`` in place. Two
families are instantiated:

* the two-element group ``{id, reflection through mu}`` on the circle, the
  Euclidean space and Bures-Wasserstein (where the geodesic symmetry is not
  an isometry, but still fixes ``mu`` and reverses geodesics through it);
* on a booklet, a permutation of the branches fixing the branch of ``mu``,
  combined with an optional reflection of the page coordinate through the
  page of ``mu``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, IsometError, SingularResultError
from .geometry.spaces import Booklet, BuresWasserstein, Circle, MetricSpace

DISTINCT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Identity:
    def apply(self, x):
        return np.array(x, dtype=float)


@dataclass(frozen=True, eq=False)
class CircleReflection:
    center: float

    def apply(self, x):
        return Circle().geodesic_symmetry(self.center, x)


@dataclass(frozen=True, eq=False)
class GeodesicSymmetry:
    """``x -> exp_c(-log_c(x))``; raises where the reflection is undefined."""
    space: MetricSpace
    center: np.ndarray

    def apply(self, x):
        x = self.space.canonical(x)
        center = self.space.canonical(self.center)
        out = self.space.geodesic_symmetry(center, x)
        return _pin_center(self.space, center, x, out)


@dataclass(frozen=True, eq=False)
class BookletMap:
    """Branch permutation plus optional page reflection.

    ``permutation[i]`` is the image of branch ``i + 1``.
    """
    center: np.ndarray
    permutation: tuple
    reflect_page: bool = False

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        perm = tuple(int(p) for p in self.permutation)
        if sorted(perm) != list(range(1, len(perm) + 1)):
            raise IsometError(f"{perm} is not a permutation of 1..{len(perm)}")
        if center[1] > 0 and perm[int(center[0]) - 1] != int(center[0]):
            raise IsometError("permutation must fix the branch of the center")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "permutation", perm)

    def apply(self, x):
        x = np.array(x, dtype=float)
        lookup = np.asarray((0,) + self.permutation, dtype=float)
        x[..., 0] = lookup[x[..., 0].astype(int)]
        if self.reflect_page:
            x[..., 2:] = 2.0 * self.center[2:] - x[..., 2:]
        x[..., 0] = np.where(x[..., 1] == 0.0, 1.0, x[..., 0])
        return x


IsotropyElement = Identity | CircleReflection | GeodesicSymmetry | BookletMap


def apply(g, x):
    """Apply an isotropy element to one point or a stack of points."""
    return g.apply(x)


def _pin_center(space, center, x, out):
    # roundoff in exp/log must not move the center itself
    axes = tuple(range(x.ndim - space.point_ndim, x.ndim))
    same = np.all(x == center, axis=axes, keepdims=True) if axes else x == center
    return np.where(same, center, out)


@dataclass(frozen=True, eq=False)
class RandomIsotropy:
    """Law of a random isotropy of ``center``.

    ``scheme`` is ``"reflection"`` (fair coin over identity and the
    reflection through ``center``), ``"booklet"`` (uniform branch
    permutation fixing the center's branch, independent fair page-reflection
    coin) or ``"identity"`` (the trivial group, useful as a control).
    """
    space: MetricSpace
    center: np.ndarray
    scheme: str = "reflection"

    def __post_init__(self):
        center = self.space.canonical(self.center)
        if self.scheme == "booklet":
            if not isinstance(self.space, Booklet):
                raise IsometError("booklet scheme needs a booklet space")
        elif self.scheme == "reflection":
            if isinstance(self.space, Booklet):
                raise IsometError("booklets use the 'booklet' scheme")
        elif self.scheme != "identity":
            raise IsometError(f"unknown randomization scheme {self.scheme!r}")
        object.__setattr__(self, "center", center)

    @classmethod
    def for_space(cls, space, center):
        """The default randomization used by the test for ``space``."""
        return cls(space, center, "booklet" if isinstance(space, Booklet) else "reflection")

    # -- single draws -------------------------------------------------------
    def reflection(self):
        if isinstance(self.space, Circle):
            return CircleReflection(float(self.center))
        return GeodesicSymmetry(self.space, self.center)

    def draw(self, rng):
        """Draw one isotropy element."""
        if self.scheme == "identity":
            return Identity()
        if self.scheme == "reflection":
            return self.reflection() if rng.random() < 0.5 else Identity()
        perm = self._permutations(rng, 1)[0]
        flip = bool(rng.random() < 0.5)
        return BookletMap(self.center, tuple(int(p) for p in perm), flip)

    def _permutations(self, rng, n):
        """``n`` uniform permutations of 1..k fixing the center branch, shape ``(n, k)``.

        A center on the spine belongs to every branch, so then all ``k!``
        permutations fix it.
        """
        k = self.space.k
        if self.center[1] == 0.0:
            movable = np.arange(1, k + 1)
        else:
            c = int(self.center[0])
            movable = np.array([z for z in range(1, k + 1) if z != c])
        order = np.argsort(rng.random((n, movable.size)), axis=-1)
        perm = np.broadcast_to(np.arange(1, k + 1, dtype=float), (n, k)).copy()
        perm[:, movable - 1] = movable[order]
        return perm

    # -- whole-sample randomization ----------------------------------------
    def prepare(self, sample):
        """Precompute what :meth:`randomize` needs for a fixed sample.

        For the two-element schemes this is the reflected sample together
        with a mask of observations whose reflection is well defined.
        """
        sample = self.space.canonical(sample)
        if self.scheme != "reflection":
            return sample, None, None
        if isinstance(self.space, BuresWasserstein):
            reflected, ok = self.space.geodesic_symmetry_masked(self.center, sample)
        else:
            reflected = self.space.geodesic_symmetry(self.center, sample)
            ok = np.ones(sample.shape[0], dtype=bool)
        reflected = _pin_center(self.space, self.center, sample, reflected)
        return sample, reflected, ok

    def randomize(self, prepared, rng):
        """Draw ``g_1, ..., g_n`` and return ``(g_i . X_i)`` and the fallback count.

        Observation ``i`` always consumes the ``i``-th draw of ``rng``, so the
        result depends only on the stream, never on batching. When a
        reflection is drawn for an observation whose reflection left the
        space, the coin is redrawn up to ten times before falling back to
        the identity; such observations are counted. A reflection that fails
        once fails on every redraw, so the outcome is always the identity.
        """
        sample, reflected, ok = prepared
        n = sample.shape[0]
        if self.scheme == "identity":
            return sample.copy(), 0
        if self.scheme == "booklet":
            perm = self._permutations(rng, n)
            flip = rng.random(n) < 0.5
            out = sample.copy()
            idx = out[:, 0].astype(int) - 1
            out[:, 0] = perm[np.arange(n), idx]
            if self.space.d > 1:
                out[:, 2:] = np.where(flip[:, None], 2.0 * self.center[2:] - out[:, 2:], out[:, 2:])
            out[:, 0] = np.where(out[:, 1] == 0.0, 1.0, out[:, 0])
            return out, 0
        coins = rng.random(n) < 0.5
        bad = coins & ~ok
        fallback = int(bad.sum())
        coins &= ~bad
        mask = coins.reshape((n,) + (1,) * self.space.point_ndim)
        return np.where(mask, reflected, sample), fallback


def probe_admissibility(r, probes, draws, rng):
    """Count distinct images of each probe point under ``draws`` random isotropies.

    A count of one means the probe is fixed almost surely, which witnesses
    that the randomization is not admissible at ``r.center``.
    """
    space = r.space
    probes = space.canonical(probes)
    if probes.ndim == space.point_ndim:
        probes = probes[None]
    elements = [r.draw(rng) for _ in range(draws)]
    out = []
    for probe in probes:
        images = []
        for g in elements:
            try:
                images.append(g.apply(probe))
            except (GeometryError, SingularResultError):
                continue
        distinct = []
        for img in images:
            if all(space.distance(img, seen) > DISTINCT_TOL for seen in distinct):
                distinct.append(img)
        out.append((probe, len(distinct)))
    return out


__all__ = [
    "BookletMap", "CircleReflection", "GeodesicSymmetry", "Identity", "IsotropyElement",
    "RandomIsotropy", "apply", "probe_admissibility",
]
