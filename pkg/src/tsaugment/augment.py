"""Synthetic series generation with the Average Selected weighting scheme.

A synthetic series is the weighted DBA average of a randomly drawn seed and
its DTW-nearest neighbors within the same class. The seed carries the
largest weight and initializes DBA, two random neighbors get a boosted
weight, and the remaining neighbors share what is left.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .barycenter import DEFAULT_MAX_ITERS, DEFAULT_REL_TOL, WeightAssignment, weighted_dba
from .datasets import LabeledDataset
from .warping import _band, distance_array

logger = logging.getLogger(__name__)

SIZING_RULES = ("balance", "generate")


@dataclass(frozen=True)
class AugmentationPolicy:
    """Constants of the weighting scheme and the sizing rule.

    ``sizing="balance"`` raises every class to ``multiplier`` times the
    size of the largest class. ``sizing="generate"`` instead adds that many
    synthetic series to every class regardless of its size.
    """

    neighbor_count: int = 5
    boosted_count: int = 2
    seed_weight: float = 0.5
    boosted_weight: float = 0.15
    residual_mass: float = 0.2
    multiplier: float = 2.0
    sizing: str = "balance"
    master_seed: int = 0

    def __post_init__(self):
        if self.neighbor_count < 1:
            raise ValueError("neighbor_count must be positive")
        if not 1 <= self.boosted_count <= self.neighbor_count:
            raise ValueError("boosted_count must lie in [1, neighbor_count]")
        for name in ("seed_weight", "boosted_weight", "residual_mass"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and nonnegative")
        if self.seed_weight <= 0:
            raise ValueError("seed_weight must be positive")
        if not math.isfinite(self.multiplier) or self.multiplier < 0:
            raise ValueError("multiplier must be finite and nonnegative")
        if self.sizing not in SIZING_RULES:
            raise ValueError(f"sizing must be one of {SIZING_RULES}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class DBAParams:
    max_iters: int = DEFAULT_MAX_ITERS
    rel_tol: float = DEFAULT_REL_TOL
    window: int = None

    def to_dict(self):
        return asdict(self)


@dataclass
class AugmentationReport:
    generated: dict
    skipped: list
    targets: dict


def generation_rng(master_seed, class_index, generation_index):
    """Independent counter-based stream for one synthetic series."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(class_index, generation_index))
    return np.random.Generator(np.random.Philox(seq))


class _NeighborIndex:
    """Lazily computed DTW distance rows within one class."""

    def __init__(self, members, window=None):
        self.members = [np.ascontiguousarray(m, dtype=np.float64) for m in members]
        self.window = window
        self._rows = {}

    def row(self, i):
        row = self._rows.get(i)
        if row is None:
            a = self.members[i]
            row = np.array([
                0.0 if j == i else distance_array(a, b, _band(len(a), len(b), self.window))
                for j, b in enumerate(self.members)
            ])
            self._rows[i] = row
        return row


def nearest_neighbors(distances, seed_index, k):
    """Indices of the ``k`` smallest distances, excluding the seed.

    Ties are broken by the smaller index.
    """
    candidates = [j for j in range(len(distances)) if j != seed_index]
    candidates.sort(key=lambda j: (distances[j], j))
    return candidates[:k]


def assign_weights_average_selected(class_members, seed_index, policy, rng,
                                    distances=None, window=None):
    """Weights over the seed and its nearest in-class neighbors.

    The seed gets ``policy.seed_weight``; ``boosted_count`` neighbors drawn
    at random from the ``neighbor_count`` nearest get ``boosted_weight``
    each; the rest of the neighbors split ``residual_mass`` evenly. Small
    classes give fewer neighbors, and when the resulting weights do not
    sum to 1 they are rescaled by their sum.

    Returns a :class:`WeightAssignment` whose indices point into
    ``class_members``, seed first, then neighbors nearest first.
    """
    n = len(class_members)
    if n < 2:
        raise ValueError("class needs at least two members to select neighbors")
    if not 0 <= seed_index < n:
        raise IndexError(f"seed_index {seed_index} out of range for {n} members")
    if distances is None:
        distances = _NeighborIndex(class_members, window).row(seed_index)
    neighbors = nearest_neighbors(distances, seed_index, policy.neighbor_count)
    k = len(neighbors)
    b = min(policy.boosted_count, k)
    boosted = set(rng.choice(k, size=b, replace=False).tolist())
    rest = k - b

    weights = [policy.seed_weight]
    for rank in range(k):
        if rank in boosted:
            weights.append(policy.boosted_weight)
        else:
            weights.append(policy.residual_mass / rest)
    total = sum(weights)
    if abs(total - 1.0) > 1e-12:
        weights = [w / total for w in weights]
    return WeightAssignment(tuple([seed_index] + neighbors), tuple(weights))


def synthesize(class_members, rng, policy, dba_params=None, neighbor_index=None):
    """Generate one synthetic series; returns ``(series, assignment)``."""
    dba_params = dba_params or DBAParams()
    if neighbor_index is None:
        neighbor_index = _NeighborIndex(class_members, dba_params.window)
    seed_index = int(rng.integers(len(class_members)))
    assignment = assign_weights_average_selected(
        class_members, seed_index, policy, rng,
        distances=neighbor_index.row(seed_index))
    subset = [neighbor_index.members[i] for i in assignment.indices]
    series = weighted_dba(subset, assignment.weights, subset[0],
                          dba_params.max_iters, dba_params.rel_tol, dba_params.window)
    return series, assignment


def _map(fn, items, n_jobs):
    if n_jobs is None or n_jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, items))


def generate_synthetic(dataset, class_label, count, policy=None, dba_params=None,
                       n_jobs=1, return_assignments=False):
    """``count`` synthetic series for ``class_label`` drawn from ``dataset``.

    Generation ``g`` uses the random stream keyed by the master seed, the
    class position in ``dataset.class_order`` and ``g``, so results do not
    depend on ``n_jobs``. A singleton class yields an empty list.
    """
    policy = policy or AugmentationPolicy()
    dba_params = dba_params or DBAParams()
    class_label = str(class_label)
    if class_label not in dataset.class_order:
        raise KeyError(f"unknown class label {class_label!r}")
    if count < 0:
        raise ValueError("count must be nonnegative")
    members = dataset.members(class_label)
    if count == 0:
        return []
    if len(members) < 2:
        logger.warning("skipping class %r: a single member has no neighbors", class_label)
        return []
    class_index = dataset.class_order.index(class_label)
    index = _NeighborIndex(members, dba_params.window)

    def one(g):
        rng = generation_rng(policy.master_seed, class_index, g)
        return synthesize(members, rng, policy, dba_params, index)

    results = _map(one, range(count), n_jobs)
    if return_assignments:
        return results
    return [s for s, _ in results]


def plan_counts(dataset, policy=None):
    """Number of synthetic series to add per class."""
    policy = policy or AugmentationPolicy()
    counts = dataset.class_counts()
    quota = int(round(policy.multiplier * max(counts.values())))
    if policy.sizing == "balance":
        return {c: max(0, quota - n) for c, n in counts.items()}
    return {c: quota for c in counts}


def augment_with_report(dataset, policy=None, dba_params=None, n_jobs=1):
    """Augmented dataset plus per-class bookkeeping."""
    policy = policy or AugmentationPolicy()
    plan = plan_counts(dataset, policy)
    counts = dataset.class_counts()
    instances = list(dataset.instances)
    generated = {}
    skipped = []
    for label in dataset.class_order:
        if plan[label] > 0 and counts[label] < 2:
            skipped.append(label)
        series = generate_synthetic(dataset, label, plan[label], policy, dba_params, n_jobs)
        generated[label] = len(series)
        instances.extend((label, s) for s in series)
    out = LabeledDataset(instances, class_order=list(dataset.class_order),
                         name=dataset.name and f"{dataset.name}_augmented")
    targets = {c: counts[c] + plan[c] for c in counts}
    return out, AugmentationReport(generated, skipped, targets)


def augment_dataset(dataset, policy=None, dba_params=None, n_jobs=1):
    """Originals in their order, then synthetic series by class and generation."""
    return augment_with_report(dataset, policy, dba_params, n_jobs)[0]
