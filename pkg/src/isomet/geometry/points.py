"""Value types for single points.

Spaces operate on plain numpy arrays so that whole samples can be handled
at once; these small wrappers validate one point at a time and convert to
the array layout the spaces expect through ``np.asarray``.
"""
from dataclasses import dataclass, field

import numpy as np

from ..errors import GeometryError
from .linalg import eigvalsh, symmetrize

TWO_PI = 2.0 * np.pi


def wrap_angle(theta):
    """Map angles into ``[0, 2*pi)``."""
    # a single mod leaves in-range angles bit-identical; tiny negatives round up to 2*pi
    out = np.mod(theta, TWO_PI)
    return np.where(out >= TWO_PI, 0.0, out)


@dataclass(frozen=True)
class CirclePoint:
    theta: float

    def __post_init__(self):
        if not np.isfinite(self.theta):
            raise GeometryError("angle must be finite")
        object.__setattr__(self, "theta", float(wrap_angle(self.theta)))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.theta, dtype=dtype)

    @classmethod
    def from_degrees(cls, deg):
        return cls(np.deg2rad(deg))


@dataclass(frozen=True, eq=False)
class SpdMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = symmetrize(self.entries)
        if eigvalsh(m)[0] <= 1e-12:
            raise GeometryError("matrix is not strictly positive definite")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self):
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __eq__(self, other):
        return isinstance(other, SpdMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())


@dataclass(frozen=True, eq=False)
class BookletPoint:
    """Point ``(branch, spine, page)`` of a booklet.

    Points on the spine (``spine == 0``) belong to every branch at once and
    are normalized to branch 1.
    """
    branch: int
    spine: float
    page: tuple = field(default=())

    def __post_init__(self):
        page = tuple(float(y) for y in np.atleast_1d(np.asarray(self.page, dtype=float)))
        if self.spine < 0 or not np.isfinite(self.spine):
            raise GeometryError("spine coordinate must be a finite nonnegative number")
        if int(self.branch) != self.branch or self.branch < 1:
            raise GeometryError("branch must be a positive integer")
        branch = 1 if self.spine == 0 else int(self.branch)
        object.__setattr__(self, "branch", branch)
        object.__setattr__(self, "spine", float(self.spine))
        object.__setattr__(self, "page", page)

    def __array__(self, dtype=None, copy=None):
        return np.asarray([self.branch, self.spine, *self.page], dtype=dtype)

    def __eq__(self, other):
        return (isinstance(other, BookletPoint) and self.branch == other.branch
                and self.spine == other.spine and self.page == other.page)

    def __hash__(self):
        return hash((self.branch, self.spine, self.page))

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float)
        return cls(int(a[0]), float(a[1]), tuple(a[2:]))


@dataclass(frozen=True, eq=False)
class EuclideanPoint:
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if not np.all(np.isfinite(c)):
            raise GeometryError("coordinates must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)

    def __eq__(self, other):
        return isinstance(other, EuclideanPoint) and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())
