"""Samplers for the simulation scenarios.

Every spec is an immutable dataclass with a ``sample(n, rng)`` method
returning an array in the layout of its space. :func:`shift_spec` moves a
spec's Frechet mean along a geodesic.
"""
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize, special

from .errors import IsometError
from .geometry.linalg import eigvalsh, sym_part, symmetrize
from .geometry.points import TWO_PI, wrap_angle
from .geometry.spaces import Booklet, BuresWasserstein, Circle


def sample_von_mises(mu, kappa, n, rng):
    """Best-Fisher rejection sampler for the von Mises distribution."""
    if kappa <= 0:
        raise IsometError("kappa must be positive")
    tau = 1.0 + np.sqrt(1.0 + 4.0 * kappa * kappa)
    rho = (tau - np.sqrt(2.0 * tau)) / (2.0 * kappa)
    r = (1.0 + rho * rho) / (2.0 * rho)
    out = np.empty(n)
    filled = 0
    while filled < n:
        m = 2 * (n - filled) + 8
        u1, u2, u3 = rng.random((3, m))
        z = np.cos(np.pi * u1)
        f = (1.0 + r * z) / (r + z)
        c = kappa * (r - f)
        with np.errstate(divide="ignore"):
            accept = (c * (2.0 - c) - u2 > 0.0) | (np.log(c / u2) + 1.0 - c >= 0.0)
        theta = np.sign(u3 - 0.5) * np.arccos(np.clip(f, -1.0, 1.0))
        theta = theta[accept][: n - filled]
        out[filled:filled + theta.size] = theta
        filled += theta.size
    return wrap_angle(mu + out)


def von_mises_pdf(theta, mu, kappa):
    return np.exp(kappa * (np.cos(theta - mu) - 1.0)) / (TWO_PI * special.i0e(kappa))


@dataclass(frozen=True)
class VonMises:
    mu: float
    kappa: float

    space = Circle()

    def __post_init__(self):
        if not self.kappa > 0:
            raise IsometError("kappa must be positive")

    def sample(self, n, rng):
        return sample_von_mises(self.mu, self.kappa, n, rng)

    def pdf(self, theta):
        return von_mises_pdf(theta, self.mu, self.kappa)


@dataclass(frozen=True)
class VonMisesMixture:
    """Mixture of von Mises laws given as ``((weight, mu, kappa), ...)``."""
    components: tuple

    space = Circle()

    def __post_init__(self):
        comps = tuple((float(w), float(m), float(k)) for w, m, k in self.components)
        weights = np.array([c[0] for c in comps])
        if not comps or np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise IsometError("mixture weights must be nonnegative and sum to 1")
        if any(k <= 0 for _, _, k in comps):
            raise IsometError("kappa must be positive")
        object.__setattr__(self, "components", comps)

    def sample(self, n, rng):
        weights = np.array([c[0] for c in self.components])
        labels = rng.choice(len(self.components), size=n, p=weights)
        out = np.empty(n)
        for j, (_, mu, kappa) in enumerate(self.components):
            idx = np.flatnonzero(labels == j)
            if idx.size:
                out[idx] = sample_von_mises(mu, kappa, idx.size, rng)
        return out

    def pdf(self, theta):
        return sum(w * von_mises_pdf(theta, mu, k) for w, mu, k in self.components)


@dataclass(frozen=True, eq=False)
class BwTangentGaussian:
    """Push-forward of a symmetrized standard Gaussian through ``exp_center``.

    A matrix ``M`` with i.i.d. N(0, 1) entries gives ``W = (M + M^T) / 2``
    and the draw is ``(I + W/2) C (I + W/2)``; at ``C = I`` this is
    ``(W/2 + I)^2``.

    With ``truncate`` (the default) ``W`` is conditioned on the eigenvalues
    of ``W/2`` lying in ``(-1, 1)``. On that set ``log_C`` inverts the
    exponential and the geodesic symmetry through ``C`` maps ``W`` to
    ``-W``, so the law is exactly invariant under it and its tangent mean
    at ``C`` is zero. The untruncated push-forward folds about 19% of the
    draws and its Frechet mean is not ``C``.
    """
    center: np.ndarray
    truncate: bool = True

    def __post_init__(self):
        c = symmetrize(self.center)
        if eigvalsh(c)[0] <= 0:
            raise IsometError("center must be positive definite")
        object.__setattr__(self, "center", c)

    @property
    def space(self):
        return BuresWasserstein(self.center.shape[0])

    def sample(self, n, rng):
        p = self.center.shape[0]
        out = np.empty((n, p, p))
        todo = np.arange(n)
        while todo.size:
            m = rng.standard_normal((todo.size, p, p))
            half = 0.25 * (m + np.swapaxes(m, -1, -2))
            step = np.eye(p) + half
            x = sym_part(step @ self.center @ step)
            ok = eigvalsh(x)[:, 0] > 1e-12
            if self.truncate:
                ev = eigvalsh(half)
                ok &= (ev[:, 0] > -1.0) & (ev[:, -1] < 1.0)
            out[todo[ok]] = x[ok]
            todo = todo[~ok]
        return out

    def __eq__(self, other):
        return (isinstance(other, BwTangentGaussian) and self.truncate == other.truncate
                and np.array_equal(self.center, other.center))


@dataclass(frozen=True)
class BookletHierarchical:
    """Branch, spine and page drawn hierarchically.

    Defaults: branch ~ Categorical(4/7, 1/7, 1/7, 1/7), spine ~ Beta(20, 5)
    on branch 1 and Beta(5, 20) elsewhere, page ~ N(1, 1).
    """
    weights: tuple = (4 / 7, 1 / 7, 1 / 7, 1 / 7)
    spine_params: tuple = ((20.0, 5.0), (5.0, 20.0), (5.0, 20.0), (5.0, 20.0))
    page_mean: float = 1.0
    page_sd: float = 1.0
    d: int = 2

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise IsometError("branch weights must be nonnegative and sum to 1")
        if len(self.spine_params) != w.size:
            raise IsometError("need one Beta law per branch")
        if any(a <= 0 or b <= 0 for a, b in self.spine_params):
            raise IsometError("Beta parameters must be positive")
        if self.page_sd <= 0 or self.d < 1:
            raise IsometError("page law needs positive sd and d >= 1")

    @property
    def space(self):
        return Booklet(len(self.weights), self.d)

    def sample(self, n, rng):
        k = len(self.weights)
        branch = rng.choice(k, size=n, p=np.asarray(self.weights)) + 1
        a = np.array([p[0] for p in self.spine_params])[branch - 1]
        b = np.array([p[1] for p in self.spine_params])[branch - 1]
        spine = rng.beta(a, b)
        page = rng.normal(self.page_mean, self.page_sd, size=(n, self.d - 1))
        out = np.column_stack([branch.astype(float), spine, page])
        out[:, 0] = np.where(out[:, 1] == 0.0, 1.0, out[:, 0])
        return out

    def frechet_mean(self):
        """Population Frechet mean, from the same closed form as the sample one."""
        w = np.asarray(self.weights)
        m = np.array([a / (a + b) for a, b in self.spine_params])
        mass = w * m
        cand = np.maximum(0.0, 2.0 * mass - mass.sum())
        z = int(np.argmax(cand))
        out = np.full(self.d + 1, self.page_mean)
        out[0] = z + 1.0 if cand[z] > 0 else 1.0
        out[1] = cand[z]
        return out


@dataclass(frozen=True)
class SpiderNormal:
    """Normal law on the ``k``-spider centered at ``(branch, spine)``.

    The branch is uniform. On the center branch the position is
    N(spine, 1); a negative draw ``v`` lands at ``|v|`` on a uniformly chosen
    other branch. On the other branches the position is ``|N(0, 1)|``. A
    center on the origin gives branch uniform, position ``|N(0, 1)|``.
    """
    branch: int
    spine: float
    k: int = 3

    @property
    def space(self):
        return Booklet(self.k, 1)

    def __post_init__(self):
        if self.k < 2 or self.spine < 0 or not 1 <= self.branch <= self.k:
            raise IsometError("invalid spider center")

    def sample(self, n, rng):
        k = self.k
        z = rng.integers(1, k + 1, size=n)
        v = rng.standard_normal(n)
        other = rng.integers(1, k, size=n)
        if self.spine == 0.0:
            return np.column_stack([z.astype(float), np.abs(v)])
        c = self.branch
        on_center = z == c
        v = np.where(on_center, v + self.spine, v)
        # skip the center branch when choosing where a negative draw lands
        fold_branch = np.where(other >= c, other + 1, other)
        branch = np.where(on_center & (v < 0), fold_branch, z)
        out = np.column_stack([branch.astype(float), np.abs(v)])
        out[:, 0] = np.where(out[:, 1] == 0.0, 1.0, out[:, 0])
        return out


DistributionSpec = VonMises | VonMisesMixture | BwTangentGaussian | BookletHierarchical | SpiderNormal


def sample(spec, n, rng):
    """``n`` independent draws from ``spec``."""
    if n < 1:
        raise IsometError("sample size must be at least 1")
    return spec.sample(int(n), rng)


def shift_spec(spec, space, delta, direction=None):
    """Move the Frechet mean of ``spec`` by ``delta`` along a geodesic.

    Circle laws rotate by ``delta`` radians (every mixture component moves).
    The Bures-Wasserstein law is recentered at the point at parameter
    ``delta`` on the geodesic from its center to ``direction``.
    """
    if isinstance(spec, VonMises):
        return replace(spec, mu=spec.mu + delta)
    if isinstance(spec, VonMisesMixture):
        return VonMisesMixture(tuple((w, mu + delta, k) for w, mu, k in spec.components))
    if isinstance(spec, BwTangentGaussian):
        if direction is None:
            raise IsometError("a Bures-Wasserstein shift needs a target matrix")
        if not isinstance(space, BuresWasserstein):
            raise IsometError("spec lives on the Bures-Wasserstein space")
        return BwTangentGaussian(space.geodesic(spec.center, direction, delta), spec.truncate)
    raise IsometError(f"{type(spec).__name__} cannot be shifted; move the null instead")


def circle_frechet_function(pdf, omega, nodes=256):
    """Population Frechet function of a circular density.

    Integrates ``u^2 pdf(omega + u)`` over ``u`` in ``(-pi, pi)`` with
    Gauss-Legendre nodes, which keeps the antipodal kink at the boundary.
    """
    u, w = np.polynomial.legendre.leggauss(nodes)
    u = np.pi * u
    w = np.pi * w
    omega = np.asarray(omega, dtype=float)[..., None]
    return np.sum(w * u * u * pdf(omega + u), axis=-1)


def population_frechet_mean_circle(spec, coarse=2048):
    """Frechet mean and variance of a circular law (grid search, then polish)."""
    grid = np.arange(coarse) * (TWO_PI / coarse)
    vals = circle_frechet_function(spec.pdf, grid)
    start = grid[int(np.argmin(vals))]
    h = TWO_PI / coarse
    res = optimize.minimize_scalar(lambda w: float(circle_frechet_function(spec.pdf, w)),
                                   bounds=(start - h, start + h), method="bounded",
                                   options={"xatol": 1e-10})
    return float(wrap_angle(res.x)), float(res.fun)


__all__ = [
    "BookletHierarchical", "BwTangentGaussian", "DistributionSpec", "SpiderNormal", "VonMises",
    "VonMisesMixture", "circle_frechet_function", "population_frechet_mean_circle", "sample",
    "sample_von_mises", "shift_spec", "von_mises_pdf",
]
