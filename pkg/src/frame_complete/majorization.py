"""Vector orderings: rearrangements, traces, submajorization and majorization.

All predicates zero-pad the shorter argument to the common length before
comparing, so vectors of different sizes can be compared directly.
"""

import numpy as np

__all__ = [
    "as_vector",
    "sort_desc",
    "sort_asc",
    "trace",
    "submajorizes",
    "majorizes",
    "strictly_majorizes",
    "entrywise_leq",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-9


def as_vector(x) -> np.ndarray:
    """Return `x` as a 1-d float array, rejecting empty or non-finite input."""
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.size == 0:
        raise ValueError("vector must have at least one entry")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def sort_desc(x) -> np.ndarray:
    return np.sort(as_vector(x))[::-1].copy()


def sort_asc(x) -> np.ndarray:
    return np.sort(as_vector(x))


def trace(x) -> float:
    return float(np.sum(as_vector(x)))


def _padded_desc(x, y):
    x = sort_desc(x)
    y = sort_desc(y)
    n = max(x.size, y.size)
    x = np.concatenate([x, np.zeros(n - x.size)])
    y = np.concatenate([y, np.zeros(n - y.size)])
    # zero padding may break descending order when entries are negative
    return np.sort(x)[::-1], np.sort(y)[::-1]


def submajorizes(x, y, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``x`` is submajorized by ``y`` (x ≺_w y).

    Every partial sum of ``x`` sorted in decreasing order is bounded by the
    matching partial sum of ``y``, up to ``tol``.
    """
    xs, ys = _padded_desc(x, y)
    return bool(np.all(np.cumsum(xs) <= np.cumsum(ys) + tol))


def majorizes(x, y, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``x`` is majorized by ``y`` (x ≺ y): submajorization plus equal traces."""
    return submajorizes(x, y, tol) and abs(trace(x) - trace(y)) <= tol


def strictly_majorizes(x, y, tol: float = DEFAULT_TOL) -> bool:
    """True iff x ≺ y but not y ≺ x, i.e. ``y`` is not a rearrangement of ``x``."""
    return majorizes(x, y, tol) and not majorizes(y, x, tol)


def entrywise_leq(x, y) -> bool:
    x = as_vector(x)
    y = as_vector(y)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.size} != {y.size}")
    return bool(np.all(x <= y))
