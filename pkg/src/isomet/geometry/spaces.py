"""Metric spaces: Euclidean, circle, Bures-Wasserstein and booklets.

Points are numpy arrays whose trailing ``point_ndim`` axes describe a single
point; every operation broadcasts over leading axes, so a sample of ``n``
points is just an array with one extra leading axis.

==================  ===============  ==================================
space               point layout     tangent vector
==================  ===============  ==================================
``Euclidean(d)``    ``(d,)``         ``(d,)`` displacement
``Circle()``        ``()`` radians   ``()`` signed angle
``BuresWasserstein``  ``(p, p)``     ``(p, p)`` symmetric matrix
``Booklet(k, d)``   ``(d + 1,)``     none
==================  ===============  ==================================

Booklet points are stored as ``[branch, spine, page_1, ..., page_{d-1}]``
with the branch index kept as a float.
"""
import numpy as np

from ..errors import CutLocusError, GeometryError, NotPositiveDefiniteError, SingularResultError
from .linalg import eigvalsh, spd_inv, spd_sqrt, sym_part, symmetrize
from .points import TWO_PI, BookletPoint, CirclePoint, EuclideanPoint, SpdMatrix, wrap_angle

SINGULAR_TOL = 1e-12


class MetricSpace:
    """Common interface; subclasses fill in the geometry."""

    name = "abstract"
    point_ndim = 0

    def canonical(self, x):
        raise NotImplementedError

    def distance(self, a, b):
        raise NotImplementedError

    def exp(self, base, v):
        raise GeometryError(f"{self.name} has no tangent representation")

    def log(self, base, x):
        raise GeometryError(f"{self.name} has no tangent representation")

    def geodesic(self, a, b, t):
        a = self.canonical(a)
        return self.exp(a, t * self.log(a, b))

    def geodesic_symmetry(self, center, x):
        """The reflection ``exp_c(-log_c(x))`` through ``center``."""
        raise GeometryError(f"{self.name} has no geodesic symmetry")

    def as_point(self, x):
        """Wrap a single array point into its value type."""
        raise NotImplementedError

    def n_points(self, sample):
        sample = np.asarray(sample)
        return int(np.prod(sample.shape[:sample.ndim - self.point_ndim], dtype=int))

    def __eq__(self, other):
        return type(self) is type(other) and self.__dict__ == other.__dict__

    def __hash__(self):
        return hash((type(self).__name__, tuple(sorted(self.__dict__.items()))))

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.__dict__.items())
        return f"{type(self).__name__}({args})"


class Euclidean(MetricSpace):
    name = "euclidean"
    point_ndim = 1

    def __init__(self, dim=1):
        if dim < 1:
            raise GeometryError("dimension must be positive")
        self.dim = int(dim)

    def canonical(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim < 1 or x.shape[-1] != self.dim:
            raise GeometryError(f"expected points of dimension {self.dim}, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise GeometryError("coordinates must be finite")
        return x

    def distance(self, a, b):
        return np.linalg.norm(self.canonical(a) - self.canonical(b), axis=-1)

    def exp(self, base, v):
        return self.canonical(base) + np.asarray(v, dtype=float)

    def log(self, base, x):
        return self.canonical(x) - self.canonical(base)

    def geodesic(self, a, b, t):
        a = self.canonical(a)
        return a + t * (self.canonical(b) - a)

    def geodesic_symmetry(self, center, x):
        return 2.0 * self.canonical(center) - self.canonical(x)

    def as_point(self, x):
        return EuclideanPoint(self.canonical(x))


class Circle(MetricSpace):
    """The unit circle with angular (arc length) distance."""

    name = "circle"
    point_ndim = 0

    def canonical(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise GeometryError("angles must be finite")
        return wrap_angle(x)

    def distance(self, a, b):
        diff = np.abs(self.canonical(a) - self.canonical(b))
        return np.minimum(diff, TWO_PI - diff)

    def exp(self, base, v):
        return wrap_angle(self.canonical(base) + np.asarray(v, dtype=float))

    def log(self, base, x):
        delta = wrap_angle(self.canonical(x) - self.canonical(base) + np.pi) - np.pi
        if np.any(np.abs(np.abs(delta) - np.pi) <= 1e-12):
            raise CutLocusError("target is the antipode of the base point")
        return delta

    def geodesic_symmetry(self, center, x):
        # antipode maps to itself, which is the cut-locus convention
        return wrap_angle(2.0 * self.canonical(center) - self.canonical(x))

    def antipode(self, x):
        return wrap_angle(self.canonical(x) + np.pi)

    def as_point(self, x):
        return CirclePoint(float(x))


def _lex_greater(a, b):
    """Elementwise ``a > b`` under lexicographic order of the flattened matrices."""
    flat_a = a.reshape(a.shape[:-2] + (-1,))
    flat_b = b.reshape(b.shape[:-2] + (-1,))
    diff = flat_a - flat_b
    nz = diff != 0.0
    first = np.argmax(nz, axis=-1)
    lead = np.take_along_axis(diff, first[..., None], axis=-1)[..., 0]
    return lead > 0.0


class BuresWasserstein(MetricSpace):
    r"""Symmetric positive definite matrices with the Bures-Wasserstein metric.

    Tangent vectors at ``S`` are symmetric matrices ``V`` with
    ``exp_S(V) = (I + V) S (I + V)``, so ``I + V`` is the optimal transport
    map between the centered Gaussians. The identity-based formulas found in
    the literature, ``exp_I(W) = (W/2 + I)^2`` and ``log_I(M) = 2 M^{1/2} - 2I``,
    use ``W = 2V``; see :func:`to_paper_tangent` and :func:`from_paper_tangent`.
    """

    name = "bw"

    def __init__(self, dim=2):
        if dim < 1:
            raise GeometryError("dimension must be positive")
        self.dim = int(dim)

    point_ndim = 2

    def canonical(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim < 2 or x.shape[-2:] != (self.dim, self.dim):
            raise GeometryError(f"expected {self.dim}x{self.dim} matrices, got shape {x.shape}")
        x = symmetrize(x)
        if np.any(eigvalsh(x)[..., 0] <= SINGULAR_TOL):
            raise NotPositiveDefiniteError("matrix is not strictly positive definite")
        return x

    def identity(self):
        return np.eye(self.dim)

    def transport_map(self, source, target, check=True):
        """Optimal transport map ``T`` with ``T source T = target``."""
        root = spd_sqrt(source, check)
        inv_root = spd_inv(root)
        middle = spd_sqrt(sym_part(root @ target @ root), check)
        return sym_part(inv_root @ middle @ inv_root)

    def distance(self, a, b, check=True):
        """BW distance, evaluated as ``sqrt(tr((T - I) a (T - I)))``.

        ``check=False`` trusts that both inputs are already canonical.
        """
        if check:
            a, b = self.canonical(a), self.canonical(b)
        a, b = np.broadcast_arrays(a, b)
        # evaluate in a canonical argument order so d(a, b) == d(b, a) bitwise
        swap = _lex_greater(a, b)[..., None, None]
        lo = np.where(swap, b, a)
        hi = np.where(swap, a, b)
        v = self.transport_map(lo, hi, check) - np.eye(self.dim)
        d2 = np.trace(v @ lo @ v, axis1=-2, axis2=-1)
        d = np.sqrt(np.maximum(d2, 0.0))
        same = np.all(a == b, axis=(-2, -1))
        return np.where(same, 0.0, d)

    def exp(self, base, v):
        base = self.canonical(base)
        v = symmetrize(v)
        step = np.eye(self.dim) + v
        out = sym_part(step @ base @ np.swapaxes(step, -1, -2))
        self._check_nonsingular(out)
        return out

    def log(self, base, x):
        return self.transport_map(self.canonical(base), self.canonical(x)) - np.eye(self.dim)

    def geodesic_symmetry(self, center, x):
        out, ok = self.geodesic_symmetry_masked(center, x)
        if not np.all(ok):
            raise SingularResultError("reflected geodesic leaves the positive definite cone")
        return out

    def geodesic_symmetry_masked(self, center, x):
        """Reflect and report which reflections are defined.

        ``t -> (I - tV) S (I - tV)`` with ``V = log_S(x)`` is a geodesic only
        while ``I - tV`` stays positive definite. Past that point the formula
        folds back into the cone and no longer reverses the geodesic, so the
        reflection counts as defined only when ``I - V`` is positive definite.
        """
        center = self.canonical(center)
        step = np.eye(self.dim) - self.log(center, x)
        out = sym_part(step @ center @ np.swapaxes(step, -1, -2))
        ok = eigvalsh(sym_part(step))[..., 0] > SINGULAR_TOL * np.maximum(1.0, np.abs(step).max(axis=(-2, -1)))
        return out, ok

    def _check_nonsingular(self, m):
        lo = eigvalsh(m)[..., 0]
        if np.any(lo <= SINGULAR_TOL * np.maximum(1.0, np.abs(m).max(axis=(-2, -1)))):
            raise SingularResultError("result left the positive definite cone")

    def as_point(self, x):
        return SpdMatrix(self.canonical(x))


def to_paper_tangent(v):
    """Convert an internal tangent vector to the ``exp_I(W) = (W/2 + I)^2`` convention."""
    return 2.0 * np.asarray(v, dtype=float)


def from_paper_tangent(w):
    return 0.5 * np.asarray(w, dtype=float)


def paper_exp_identity(w):
    """``(W/2 + I)(W/2 + I)``."""
    w = symmetrize(w)
    step = 0.5 * w + np.eye(w.shape[-1])
    return sym_part(step @ step)


def paper_log_identity(m):
    """``2 M^{1/2} - 2 I``."""
    m = symmetrize(m)
    return 2.0 * spd_sqrt(m) - 2.0 * np.eye(m.shape[-1])


class Booklet(MetricSpace):
    """``k`` copies of the halfspace ``R_+ x R^{d-1}`` glued along their boundary.

    With ``d = 1`` this is the k-spider.
    """

    name = "booklet"
    point_ndim = 1

    def __init__(self, k=4, d=2):
        if k < 2 or d < 1:
            raise GeometryError("booklet needs k >= 2 branches and dimension d >= 1")
        self.k = int(k)
        self.d = int(d)

    def canonical(self, x):
        x = np.array(x, dtype=float)
        if x.ndim < 1 or x.shape[-1] != self.d + 1:
            raise GeometryError(f"expected booklet points of length {self.d + 1}, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise GeometryError("coordinates must be finite")
        branch, spine = x[..., 0], x[..., 1]
        if np.any(branch != np.round(branch)) or np.any((branch < 1) | (branch > self.k)):
            raise GeometryError(f"branch index must be an integer in 1..{self.k}")
        if np.any(spine < 0):
            raise GeometryError("spine coordinate must be nonnegative")
        x[..., 0] = np.where(spine == 0.0, 1.0, branch)
        return x

    def distance(self, a, b):
        a = self.canonical(a)
        b = self.canonical(b)
        same = a[..., 0] == b[..., 0]
        spine = np.where(same, a[..., 1] - b[..., 1], a[..., 1] + b[..., 1])
        page = a[..., 2:] - b[..., 2:]
        return np.sqrt(spine * spine + np.sum(page * page, axis=-1))

    def geodesic(self, a, b, t):
        """Point at fraction ``t`` along the geodesic from ``a`` to ``b``.

        Within one branch the geodesic is a straight segment and may be
        extended while the spine coordinate stays nonnegative. Between
        branches it passes through the spine and only ``t`` in ``[0, 1]``
        is meaningful.
        """
        a, b = np.broadcast_arrays(self.canonical(a), self.canonical(b))
        t = np.asarray(t, dtype=float)
        same = a[..., 0] == b[..., 0]
        if np.any(~same & ((t < 0) | (t > 1))):
            raise GeometryError("cross-branch geodesics are only defined for t in [0, 1]")
        out = np.array(a + t[..., None] * (b - a) if t.ndim else a + t * (b - a))
        travelled = t * (a[..., 1] + b[..., 1])
        past_spine = travelled > a[..., 1]
        cross_branch = np.where(past_spine, b[..., 0], a[..., 0])
        cross_spine = np.abs(a[..., 1] - travelled)
        out[..., 0] = np.where(same, a[..., 0], cross_branch)
        out[..., 1] = np.where(same, out[..., 1], cross_spine)
        if np.any(out[..., 1] < 0):
            raise GeometryError("geodesic extension leaves the branch")
        out[..., 0] = np.where(out[..., 1] == 0.0, 1.0, out[..., 0])
        return out

    def origin(self, page=None):
        pt = np.zeros(self.d + 1)
        pt[0] = 1.0
        if page is not None:
            pt[2:] = page
        return pt

    def as_point(self, x):
        return BookletPoint.from_array(self.canonical(x))


SPACES = {"euclidean": Euclidean, "circle": Circle, "bw": BuresWasserstein, "booklet": Booklet}


def get_space(name, **params):
    """Build a space from its short name (``circle``, ``bw``, ``booklet``, ``euclidean``)."""
    try:
        cls = SPACES[name]
    except KeyError:
        raise GeometryError(f"unknown space {name!r}; choose from {sorted(SPACES)}") from None
    return cls(**params)
