import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_spd(rng, size, dim=2, spread=1.0):
    """SPD matrices with log-eigenvalues in [-spread, spread] and random rotations."""
    q, _ = np.linalg.qr(rng.standard_normal((size, dim, dim)))
    w = np.exp(rng.uniform(-spread, spread, (size, dim)))
    return (q * w[:, None, :]) @ np.swapaxes(q, -1, -2)


def random_booklet(rng, size, k=4, d=2, spine_zero_prob=0.1):
    branch = rng.integers(1, k + 1, size).astype(float)
    spine = np.where(rng.random(size) < spine_zero_prob, 0.0, rng.exponential(1.0, size))
    page = rng.normal(0.0, 1.0, (size, d - 1))
    out = np.column_stack([branch, spine, page])
    out[:, 0] = np.where(out[:, 1] == 0.0, 1.0, out[:, 0])
    return out
