"""Dynamic time warping with squared pointwise cost.

The distance is the raw accumulated cost along the optimal path (no square
root). Paths are lists of 0-based ``(i, j)`` index pairs into ``a`` and ``b``.
"""

import numba as nb
import numpy as np

_jit = nb.njit(nogil=True, cache=True)


def as_series(values, name="series"):
    """Validate ``values`` as a univariate series and return a float64 array."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return np.ascontiguousarray(arr)


def _band(n, m, window):
    # -1 means unconstrained; a band narrower than |n - m| admits no path
    if window is None:
        return -1
    window = int(window)
    if window < 0:
        raise ValueError("window must be nonnegative")
    return max(window, abs(n - m))


@_jit
def _distance_kernel(a, b, band):
    n = a.shape[0]
    m = b.shape[0]
    prev = np.full(m, np.inf)
    curr = np.full(m, np.inf)
    for i in range(n):
        lo = 0
        hi = m
        if band >= 0:
            lo = max(0, i - band)
            hi = min(m, i + band + 1)
        for j in range(m):
            curr[j] = np.inf
        for j in range(lo, hi):
            d = a[i] - b[j]
            cost = d * d
            if i == 0 and j == 0:
                curr[j] = cost
                continue
            best = np.inf
            if i > 0 and j > 0:
                best = prev[j - 1]
            if i > 0 and prev[j] < best:
                best = prev[j]
            if j > 0 and curr[j - 1] < best:
                best = curr[j - 1]
            curr[j] = cost + best
        prev, curr = curr, prev
    return prev[m - 1]


@_jit
def _cost_matrix(a, b, band):
    n = a.shape[0]
    m = b.shape[0]
    acc = np.full((n, m), np.inf)
    for i in range(n):
        lo = 0
        hi = m
        if band >= 0:
            lo = max(0, i - band)
            hi = min(m, i + band + 1)
        for j in range(lo, hi):
            d = a[i] - b[j]
            cost = d * d
            if i == 0 and j == 0:
                acc[i, j] = cost
                continue
            best = np.inf
            if i > 0 and j > 0:
                best = acc[i - 1, j - 1]
            if i > 0 and acc[i - 1, j] < best:
                best = acc[i - 1, j]
            if j > 0 and acc[i, j - 1] < best:
                best = acc[i, j - 1]
            acc[i, j] = cost + best
    return acc


@_jit
def _backtrack(acc):
    n, m = acc.shape
    i = n - 1
    j = m - 1
    out = np.empty((n + m - 1, 2), dtype=np.int64)
    k = 0
    out[k, 0] = i
    out[k, 1] = j
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag = acc[i - 1, j - 1]
            up = acc[i - 1, j]
            left = acc[i, j - 1]
            # priority on ties: diagonal, then advance in a, then advance in b
            if diag <= up and diag <= left:
                i -= 1
                j -= 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        k += 1
        out[k, 0] = i
        out[k, 1] = j
    return out[: k + 1][::-1].copy()


def dtw_distance(a, b, window=None):
    """DTW distance between ``a`` and ``b`` using two rolling DP rows.

    ``window`` is an optional Sakoe-Chiba half-width; ``None`` (the default)
    leaves the alignment unconstrained.
    """
    a = as_series(a, "a")
    b = as_series(b, "b")
    return float(_distance_kernel(a, b, _band(len(a), len(b), window)))


def dtw_path(a, b, window=None):
    """Optimal warping path and its cost.

    Returns ``(path, cost)`` where ``path`` is a list of ``(i, j)`` tuples
    running from ``(0, 0)`` to ``(len(a) - 1, len(b) - 1)``.
    """
    a = as_series(a, "a")
    b = as_series(b, "b")
    steps, cost = path_array(a, b, _band(len(a), len(b), window))
    return [(int(i), int(j)) for i, j in steps], cost


def path_array(a, b, band=-1):
    """Unchecked fast path for callers that already hold validated arrays.

    Returns the path as an ``(L, 2)`` int array and the cost.
    """
    acc = _cost_matrix(a, b, band)
    return _backtrack(acc), float(acc[-1, -1])


def distance_array(a, b, band=-1):
    """Unchecked counterpart of :func:`dtw_distance`."""
    return float(_distance_kernel(a, b, band))


def path_cost(a, b, path):
    """Sum of squared differences along ``path``, accumulated in path order."""
    total = 0.0
    for i, j in path:
        d = float(a[i]) - float(b[j])
        total += d * d
    return total


def is_valid_path(path, n, m):
    """Check the boundary, step and length constraints of a warping path."""
    path = [tuple(p) for p in path]
    if not path or path[0] != (0, 0) or path[-1] != (n - 1, m - 1):
        return False
    if not max(n, m) <= len(path) <= n + m - 1:
        return False
    for (i0, j0), (i1, j1) in zip(path, path[1:]):
        if (i1 - i0, j1 - j0) not in {(1, 0), (0, 1), (1, 1)}:
            return False
    return True
