"""Small dense symmetric-matrix kernels.

Everything here works on stacks of matrices with shape ``(..., m, m)``.
Two-by-two inputs, which is what the experiments use, go through closed
forms; larger ones go through a cyclic Jacobi eigensolver.
"""
import numpy as np

from ..errors import GeometryError, NotPositiveDefiniteError

SYMMETRY_TOL = 1e-12
EIG_DUST_TOL = 1e-12


def _scale(m):
    return np.maximum(1.0, np.max(np.abs(m), axis=(-2, -1)))


def symmetrize(m, tol=SYMMETRY_TOL):
    """Return ``(m + m^T) / 2`` after checking ``m`` is symmetric.

    The check is componentwise and relative to ``max(1, max|m|)`` so that
    products like ``(I + V) S (I + V)`` survive their own roundoff.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise GeometryError(f"expected square matrices, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise GeometryError("matrix has non-finite entries")
    mt = np.swapaxes(m, -1, -2)
    asym = np.max(np.abs(m - mt), axis=(-2, -1))
    if np.any(asym > tol * _scale(m)):
        raise GeometryError(f"matrix is not symmetric (max asymmetry {np.max(asym):.3g})")
    return 0.5 * (m + mt)


def jacobi_eigh(m, tol=1e-13, max_sweeps=100):
    """Eigen-decomposition of symmetric matrices by cyclic Jacobi rotations.

    Parameters
    ----------
    m : array_like, shape (..., n, n)
        Symmetric matrices.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm falls below
        ``tol * ||m||_F`` for every matrix in the stack.
    max_sweeps : int
        Hard cap on the number of sweeps.

    Returns
    -------
    w : ndarray, shape (..., n)
        Eigenvalues in ascending order.
    v : ndarray, shape (..., n, n)
        Orthonormal eigenvectors stored column-wise, ``m = v diag(w) v^T``.
    """
    a = np.array(m, dtype=float, copy=True)
    n = a.shape[-1]
    v = np.broadcast_to(np.eye(n), a.shape).copy()
    scale = np.linalg.norm(a, axis=(-2, -1))
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.where(offmask, a * a, 0.0), axis=(-2, -1)))
        if np.all(off <= tol * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[..., p, q]
                nz = apq != 0.0
                safe = np.where(nz, apq, 1.0)
                # theta may overflow for negligible apq; t -> 0 is the right limit
                with np.errstate(over="ignore"):
                    theta = (a[..., q, q] - a[..., p, p]) / (2.0 * safe)
                    sgn = np.where(theta >= 0.0, 1.0, -1.0)
                    t = np.where(nz, sgn / (np.abs(theta) + np.sqrt(theta * theta + 1.0)), 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                c_ = c[..., None]
                s_ = s[..., None]
                ap = a[..., :, p].copy()
                aq = a[..., :, q].copy()
                a[..., :, p] = c_ * ap - s_ * aq
                a[..., :, q] = s_ * ap + c_ * aq
                ap = a[..., p, :].copy()
                aq = a[..., q, :].copy()
                a[..., p, :] = c_ * ap - s_ * aq
                a[..., q, :] = s_ * ap + c_ * aq
                a[..., p, q] = 0.0
                a[..., q, p] = 0.0
                vp = v[..., :, p].copy()
                vq = v[..., :, q].copy()
                v[..., :, p] = c_ * vp - s_ * vq
                v[..., :, q] = s_ * vp + c_ * vq
    w = np.diagonal(a, axis1=-2, axis2=-1).copy()
    order = np.argsort(w, axis=-1)
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[..., None, :], axis=-1)
    return w, v


def _eig2(m):
    a, b, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 1]
    half_tr = 0.5 * (a + d)
    rad = np.hypot(0.5 * (a - d), b)
    return half_tr - rad, half_tr + rad


def eigvalsh(m):
    """Ascending eigenvalues of symmetric matrices, shape ``(..., n)``."""
    m = np.asarray(m, dtype=float)
    if m.shape[-1] == 1:
        return m[..., 0, :].copy()
    if m.shape[-1] == 2:
        lo, hi = _eig2(m)
        return np.stack([lo, hi], axis=-1)
    return jacobi_eigh(m)[0]


def _check_psd(wmin, m):
    if np.any(wmin < -EIG_DUST_TOL * _scale(m)):
        raise NotPositiveDefiniteError(
            f"matrix has a negative eigenvalue ({np.min(wmin):.3g})")


def spd_sqrt(m, check=True):
    """Principal square root of symmetric positive semi-definite matrices.

    Eigenvalues in ``[-1e-12, 0)`` (relative to the matrix scale) are
    treated as roundoff and clamped to zero; anything more negative raises
    :class:`NotPositiveDefiniteError`. ``check=False`` skips validation and
    clamps silently; it is meant for inner loops whose inputs are known to
    be symmetric positive definite.

    >>> spd_sqrt(np.diag([4.0, 9.0]))
    array([[2., 0.],
           [0., 3.]])
    """
    m = symmetrize(m) if check else np.asarray(m, dtype=float)
    n = m.shape[-1]
    if n == 1:
        if check:
            _check_psd(m[..., 0, 0], m)
        return np.sqrt(np.maximum(m, 0.0))
    if n == 2:
        if check:
            _check_psd(_eig2(m)[0], m)
        det = np.maximum(m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] ** 2, 0.0)
        s = np.sqrt(det)
        t = np.sqrt(np.maximum(m[..., 0, 0] + m[..., 1, 1] + 2.0 * s, 0.0))
        out = m + s[..., None, None] * np.eye(2)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(t[..., None, None] > 0.0, out / t[..., None, None], 0.0)
        return out
    w, v = jacobi_eigh(m)
    if check:
        _check_psd(w[..., 0], m)
    root = np.sqrt(np.maximum(w, 0.0))
    return (v * root[..., None, :]) @ np.swapaxes(v, -1, -2)


def spd_inv(m):
    """Inverse of symmetric positive definite matrices."""
    m = np.asarray(m, dtype=float)
    if m.shape[-1] == 2:
        a, b, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 1]
        det = a * d - b * b
        if np.any(det <= 0.0):
            raise NotPositiveDefiniteError("matrix is singular")
        out = np.empty_like(m)
        out[..., 0, 0] = d / det
        out[..., 1, 1] = a / det
        out[..., 0, 1] = -b / det
        out[..., 1, 0] = -b / det
        return out
    w, v = jacobi_eigh(m)
    if np.any(w[..., 0] <= 0.0):
        raise NotPositiveDefiniteError("matrix is singular")
    return (v / w[..., None, :]) @ np.swapaxes(v, -1, -2)


def spd_sqrt_and_inv_sqrt(m):
    """Return ``(m^{1/2}, m^{-1/2})`` for symmetric positive definite ``m``."""
    root = spd_sqrt(m)
    return root, spd_inv(root)


def sym_part(m):
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + np.swapaxes(m, -1, -2))
