"""DTW barycenter averaging (DBA) and its weighted form."""

from dataclasses import dataclass

import numba as nb
import numpy as np

from .warping import _band, as_series, path_array

DEFAULT_MAX_ITERS = 10
DEFAULT_REL_TOL = 1e-8


@dataclass(frozen=True)
class WeightAssignment:
    """Weights over a subset of series, addressed by index.

    ``indices`` point into whatever collection the subset was drawn from;
    ``weights[k]`` belongs to ``indices[k]``.
    """

    indices: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.indices) != len(self.weights):
            raise ValueError("indices and weights differ in length")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("indices must be distinct")
        if any(not np.isfinite(w) or w < 0 for w in self.weights):
            raise ValueError("weights must be finite and nonnegative")
        if len(self.weights) and abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {sum(self.weights)!r}, not 1")

    @classmethod
    def uniform(cls, n):
        return cls(tuple(range(n)), tuple([1.0 / n] * n))

    def __len__(self):
        return len(self.indices)

    def as_dict(self):
        return dict(zip(self.indices, self.weights))


@nb.njit(nogil=True, cache=True)
def _accumulate(num, den, path, member, weight):
    for k in range(path.shape[0]):
        t = path[k, 0]
        num[t] += weight * member[path[k, 1]]
        den[t] += weight


def _check_inputs(subset, weights):
    if len(subset) == 0:
        raise ValueError("subset is empty")
    if isinstance(weights, WeightAssignment):
        w = list(weights.weights)
    else:
        w = [float(x) for x in weights]
    if len(w) != len(subset):
        raise ValueError(f"{len(w)} weights given for {len(subset)} series")
    if any(not np.isfinite(x) or x < 0 for x in w):
        raise ValueError("weights must be finite and nonnegative")
    if abs(sum(w) - 1.0) > 1e-12:
        raise ValueError(f"weights sum to {sum(w)!r}, not 1")
    members = [as_series(s, f"subset[{i}]") for i, s in enumerate(subset)]
    return members, w


def dba_objective(subset, weights, average, window=None):
    """Weighted sum of DTW distances from every member to ``average``."""
    members, w = _check_inputs(subset, weights)
    average = as_series(average, "average")
    total = 0.0
    for s, wi in zip(members, w):
        total += wi * path_array(average, s, _band(len(average), len(s), window))[1]
    return total


def iterate_weighted_dba(subset, weights, init, max_iters=DEFAULT_MAX_ITERS,
                         rel_tol=DEFAULT_REL_TOL, window=None):
    """Run weighted DBA, yielding ``(average, objective)`` for every state.

    The first item is the initial series with its objective; each following
    item is the result of one update. Iteration ends after ``max_iters``
    updates or once the relative decrease of the objective drops below
    ``rel_tol``.

    Each update aligns every member to the current average (average as the
    first argument to the DTW path) and replaces coordinate ``t`` by

        sum_i w_i * sum_{j: (t, j) in path_i} s_i[j]
        / sum_i w_i * |{j: (t, j) in path_i}|

    A coordinate that collects no weight keeps its previous value.
    """
    members, w = _check_inputs(subset, weights)
    avg = as_series(init, "init").copy()
    if max_iters < 1:
        raise ValueError("max_iters must be positive")
    if rel_tol < 0:
        raise ValueError("rel_tol must be nonnegative")
    n = len(avg)
    bands = [_band(n, len(s), window) for s in members]
    lo = min(s.min() for s in members)
    hi = max(s.max() for s in members)

    def align(current):
        paths = []
        objective = 0.0
        for s, wi, band in zip(members, w, bands):
            path, cost = path_array(current, s, band)
            paths.append(path)
            objective += wi * cost
        return paths, objective

    paths, objective = align(avg)
    yield avg.copy(), objective
    for _ in range(max_iters):
        num = np.zeros(n)
        den = np.zeros(n)
        # member order fixed so the floating-point sums are reproducible
        for path, s, wi in zip(paths, members, w):
            if wi > 0:
                _accumulate(num, den, path, s, wi)
        filled = den > 0
        # rounding can push a convex combination one ulp outside its inputs
        avg = avg.copy()
        avg[filled] = np.clip(num[filled] / den[filled], lo, hi)
        previous = objective
        paths, objective = align(avg)
        yield avg.copy(), objective
        if previous <= 0 or (previous - objective) / previous < rel_tol:
            break


def weighted_dba(subset, weights, init, max_iters=DEFAULT_MAX_ITERS,
                 rel_tol=DEFAULT_REL_TOL, window=None):
    """Weighted DTW barycenter of ``subset`` starting from ``init``.

    Parameters
    ----------
    subset : sequence of array_like
        Series to average; lengths may differ.
    weights : WeightAssignment or sequence of float
        One nonnegative weight per member, summing to 1.
    init : array_like
        Starting average; the result has the same length.
    """
    avg = None
    for avg, _ in iterate_weighted_dba(subset, weights, init, max_iters, rel_tol, window):
        pass
    return avg


def dba(subset, init, max_iters=DEFAULT_MAX_ITERS, rel_tol=DEFAULT_REL_TOL, window=None):
    """Plain DBA: :func:`weighted_dba` with uniform weights."""
    if len(subset) == 0:
        raise ValueError("subset is empty")
    return weighted_dba(subset, [1.0 / len(subset)] * len(subset), init,
                        max_iters, rel_tol, window)
