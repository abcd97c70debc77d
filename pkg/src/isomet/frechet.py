"""Empirical Frechet means and variances.

Each space has an exact (or fixed-point, for Bures-Wasserstein) strategy:

* Euclidean: the arithmetic mean.
* Circle: the objective is piecewise quadratic with kinks only at the
  antipodes of the sample points. Cutting the circle between consecutive
  sorted angles gives ``n`` unwrapped windows; the minimizer is the mean of
  one of them. All windows are scored at once from prefix sums.
* Booklet: pages average independently; along the spine the candidate on
  branch ``z`` is ``max(0, (sum of spines on z - sum of the others) / n)``.
* Bures-Wasserstein: the fixed-point iteration
  ``S <- S^{-1/2} (mean_i (S^{1/2} X_i S^{1/2})^{1/2})^2 S^{-1/2}``
  started at the linear average.

The ``batch_*`` functions take stacks of samples, shape ``(B, n, *point)``,
and are what the randomization test runs on.
"""
from dataclasses import dataclass

import numpy as np

from .errors import IsometError, NonUniqueMeanError
from .geometry.linalg import spd_inv, spd_sqrt, sym_part
from .geometry.points import TWO_PI, wrap_angle
from .geometry.spaces import Booklet, BuresWasserstein, Circle, Euclidean

UNIQUENESS_RTOL = 1e-9
BW_TOL = 1e-10
BW_MAX_ITER = 1000


@dataclass(frozen=True, eq=False)
class FrechetEstimate:
    """Empirical Frechet mean and variance of a sample.

    ``trace`` holds the objective after each fixed-point iteration when it
    was requested; it is empty for closed-form strategies.
    """
    mean: np.ndarray
    variance: float
    objective_evaluations: int
    converged: bool = True
    trace: tuple = ()


def _as_sample(space, sample):
    sample = space.canonical(sample)
    if sample.ndim != space.point_ndim + 1:
        raise IsometError(f"expected a sample of shape (n, ...), got {sample.shape}")
    if sample.shape[0] == 0:
        raise IsometError("sample is empty")
    return sample


def frechet_objective(space, sample, omega):
    """Average squared distance from the sample to ``omega``.

    ``omega`` may be a single point or a stack of candidates; the result
    has the stack's leading shape.
    """
    sample = _as_sample(space, sample)
    omega = space.canonical(omega)
    lead = omega.ndim - space.point_ndim
    expanded = np.expand_dims(omega, axis=lead)
    d = space.distance(sample, expanded)
    return np.mean(d * d, axis=-1)


def frechet_variance(space, sample, mean):
    return float(frechet_objective(space, sample, mean))


def frechet_mean(space, sample, *, trace=False):
    """Global minimizer of the empirical Frechet function.

    Raises
    ------
    NonUniqueMeanError
        When two distinct candidates attain the minimum up to a relative
        objective gap of 1e-9 (circle only; the other spaces have unique
        minimizers).
    """
    sample = _as_sample(space, sample)
    if isinstance(space, Euclidean):
        mean = sample.mean(axis=0)
        evals = 1
        converged, history = True, ()
    elif isinstance(space, Circle):
        means, _, tied = _circle_batch(sample[None])
        if tied[0]:
            raise NonUniqueMeanError("the circular sample has several Frechet means")
        mean = means[0]
        evals = sample.shape[0]
        converged, history = True, ()
    elif isinstance(space, Booklet):
        mean = _booklet_batch(space, sample[None])[0]
        evals = space.k + 1
        converged, history = True, ()
    elif isinstance(space, BuresWasserstein):
        means, iters, conv, hist = _bw_batch(space, sample[None], record=trace)
        mean, evals, converged = means[0], int(iters[0]), bool(conv[0])
        history = tuple(float(h[0]) for h in hist)
    else:
        raise IsometError(f"no Frechet mean strategy for {space!r}")
    variance = frechet_variance(space, sample, mean)
    return FrechetEstimate(mean=mean, variance=variance, objective_evaluations=evals,
                           converged=converged, trace=history)


def frechet_mean_oracle(space, sample, grid, chunk=4096):
    """Brute-force minimizer over an explicit candidate grid (first one wins ties)."""
    grid = space.canonical(grid)
    if grid.ndim != space.point_ndim + 1 or grid.shape[0] == 0:
        raise IsometError("grid must be a nonempty stack of points")
    best_val, best_idx = np.inf, -1
    for start in range(0, grid.shape[0], chunk):
        vals = frechet_objective(space, sample, grid[start:start + chunk])
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val, best_idx = vals[i], start + i
    return grid[best_idx]


def batch_frechet_mean(space, samples):
    """Frechet means of a stack of samples.

    Returns ``(means, degenerate)`` where ``degenerate`` flags samples whose
    mean is not unique.
    """
    samples = space.canonical(samples)
    degenerate = np.zeros(samples.shape[0], dtype=bool)
    if isinstance(space, Euclidean):
        means = samples.mean(axis=1)
    elif isinstance(space, Circle):
        means, _, degenerate = _circle_batch(samples)
    elif isinstance(space, Booklet):
        means = _booklet_batch(space, samples)
    elif isinstance(space, BuresWasserstein):
        means = _bw_batch(space, samples)[0]
    else:
        raise IsometError(f"no Frechet mean strategy for {space!r}")
    return means, degenerate


def batch_frechet_variance(space, samples):
    """Empirical Frechet variances of a stack of samples, with degeneracy flags."""
    samples = space.canonical(samples)
    means, degenerate = batch_frechet_mean(space, samples)
    expanded = np.expand_dims(means, axis=1)
    if isinstance(space, BuresWasserstein):
        d = space.distance(samples, expanded, check=False)
    else:
        d = space.distance(samples, expanded)
    return np.mean(d * d, axis=1), degenerate


def _circle_batch(theta):
    """Exact circular Frechet means for each row of ``theta`` (shape ``(B, n)``)."""
    s = np.sort(theta, axis=-1)
    n = s.shape[-1]
    j = np.arange(n)
    prefix = np.cumsum(s, axis=-1) - s
    total = s.sum(axis=-1, keepdims=True)
    sq = np.sum(s * s, axis=-1, keepdims=True)
    centers = (total + TWO_PI * j) / n
    # window j unwraps the j smallest angles by +2*pi
    values = (sq + 2.0 * TWO_PI * prefix + TWO_PI * TWO_PI * j) / n - centers * centers
    best = np.argmin(values, axis=-1)
    best_val = np.take_along_axis(values, best[:, None], axis=-1)[:, 0]
    means = wrap_angle(np.take_along_axis(centers, best[:, None], axis=-1)[:, 0])
    if n > 1:
        others = values.copy()
        np.put_along_axis(others, best[:, None], np.inf, axis=-1)
        gap = others.min(axis=-1) - best_val
        tied = gap <= UNIQUENESS_RTOL * np.maximum(np.abs(best_val), np.finfo(float).tiny)
    else:
        tied = np.zeros(s.shape[0], dtype=bool)
    return means, best_val, tied


def _booklet_batch(space, samples):
    branch = samples[..., 0]
    spine = samples[..., 1]
    n = samples.shape[1]
    onehot = branch[..., None] == np.arange(1, space.k + 1)
    per_branch = np.sum(np.where(onehot, spine[..., None], 0.0), axis=1)
    total = spine.sum(axis=1, keepdims=True)
    cand = np.maximum(0.0, (2.0 * per_branch - total) / n)
    best = np.argmax(cand, axis=-1)
    a = np.take_along_axis(cand, best[:, None], axis=-1)[:, 0]
    means = np.empty((samples.shape[0], space.d + 1))
    means[:, 0] = np.where(a > 0.0, best + 1.0, 1.0)
    means[:, 1] = a
    means[:, 2:] = samples[..., 2:].mean(axis=1)
    return means


def _bw_objective(space, samples, s):
    d = space.distance(samples, s[:, None], check=False)
    return np.mean(d * d, axis=1)


def _bw_batch(space, samples, tol=BW_TOL, max_iter=BW_MAX_ITER, record=False):
    """Fixed-point Bures-Wasserstein barycenters, iterating only unconverged rows."""
    b = samples.shape[0]
    s = sym_part(samples.mean(axis=1))
    iters = np.zeros(b, dtype=int)
    converged = np.zeros(b, dtype=bool)
    history = [_bw_objective(space, samples, s)] if record else []
    active = np.arange(b)
    for _ in range(max_iter):
        if active.size == 0:
            break
        cur = s[active]
        root = spd_sqrt(cur, check=False)
        inv_root = spd_inv(root)
        mid = spd_sqrt(sym_part(root[:, None] @ samples[active] @ root[:, None]), check=False).mean(axis=1)
        new = sym_part(inv_root @ mid @ mid @ inv_root)
        step = space.distance(cur, new, check=False)
        s[active] = new
        iters[active] += 1
        if record:
            history.append(_bw_objective(space, samples, s))
        done = step < tol
        converged[active[done]] = True
        active = active[~done]
    return s, iters, converged, history
