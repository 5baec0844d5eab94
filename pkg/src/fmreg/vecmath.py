"""Deterministic float64 vector kernels used everywhere else.

All arithmetic is 64-bit even though on-disk storage is 32-bit; the tight
gradient checks depend on that headroom.
"""

import numpy as np

from .errors import DimensionMismatch, InvalidTemperature, ZeroNorm

_NORM_FLOOR = 1e-12


def l2_normalize(v):
    """Return v / ||v|| as float64, bitwise idempotent.

    The division is iterated to a fixed point so that normalizing an
    already-normalized vector returns it unchanged bit-for-bit.
    """
    x = np.asarray(v, dtype=np.float64)
    if x.ndim != 1 or x.size < 1:
        raise DimensionMismatch("expected a 1-D vector of length >= 1")
    if not np.all(np.isfinite(x)):
        raise ZeroNorm("vector has non-finite entries")
    n = float(np.linalg.norm(x))
    if n <= _NORM_FLOOR:
        raise ZeroNorm(f"norm {n} below {_NORM_FLOOR}")
    # a vector already unit within the contract tolerance is its own fixed
    # point, which makes normalization bitwise idempotent
    for _ in range(8):
        if abs(n - 1.0) <= _NORM_FLOOR:
            return x
        x = x / n
        n = float(np.linalg.norm(x))
    return x


def cosine(a, b):
    """Cosine similarity of two vectors, clamped to [-1, 1]."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionMismatch(f"shapes {x.shape} vs {y.shape}")
    na = float(np.linalg.norm(x))
    nb = float(np.linalg.norm(y))
    if na <= _NORM_FLOOR or nb <= _NORM_FLOOR:
        raise ZeroNorm("cosine of (near-)zero vector")
    c = float(np.dot(x, y) / (na * nb))
    return min(1.0, max(-1.0, c))


def softmax(scores, tau):
    """Temperature softmax with max-subtraction for stability."""
    if not tau > 0:
        raise InvalidTemperature(f"tau must be positive, got {tau}")
    z = np.asarray(scores, dtype=np.float64) / tau
    z = z - np.max(z)
    e = np.exp(z)
    return e / np.sum(e)
