"""1-NN DTW classification and posterior-averaging ensembles."""

import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .warping import _band, as_series, distance_array


def classify_1nn(train, query, window=None):
    """Label of the DTW-nearest training series; ties go to the lower index."""
    if train is None or len(train) == 0:
        raise ValueError("training set is empty")
    q = as_series(query, "query")
    best_label, best = None, np.inf
    for label, s in train:
        d = distance_array(q, s, _band(len(q), len(s), window))
        if d < best:
            best_label, best = label, d
    return best_label


@dataclass
class EvaluationResult:
    accuracy: float
    predictions: list


def evaluate(train, test, window=None, n_jobs=1):
    """1-NN DTW accuracy of ``train`` on ``test``; predictions in test order."""
    if len(train) == 0 or len(test) == 0:
        raise ValueError("train and test must be nonempty")
    queries = test.series
    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            predictions = list(pool.map(lambda q: classify_1nn(train, q, window), queries))
    else:
        predictions = [classify_1nn(train, q, window) for q in queries]
    correct = sum(p == t for p, t in zip(predictions, test.labels))
    return EvaluationResult(correct / len(predictions), predictions)


class ProbabilityMatrix:
    """Per-instance class posteriors with an explicit column order."""

    def __init__(self, values, class_order, atol=1e-9):
        class_order = [str(c) for c in class_order]
        if len(set(class_order)) != len(class_order):
            raise ValueError("duplicate labels in class_order")
        values = np.asarray(values, dtype=np.float64)
        if values.size == 0:
            values = values.reshape(0, len(class_order))
        if values.ndim != 2 or values.shape[1] != len(class_order):
            raise ValueError(f"expected {len(class_order)} columns, got shape {values.shape}")
        if not np.all(np.isfinite(values)) or np.any(values < 0) or np.any(values > 1):
            raise ValueError("probabilities must lie in [0, 1]")
        sums = values.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > atol)
        if bad.size:
            raise ValueError(f"row {bad[0]} sums to {sums[bad[0]]!r}, not 1")
        self.values = values
        self.class_order = class_order

    @property
    def shape(self):
        return self.values.shape

    def __len__(self):
        return self.values.shape[0]

    def argmax_labels(self):
        # np.argmax returns the first maximal column, i.e. the earlier class
        return [self.class_order[k] for k in np.argmax(self.values, axis=1)] \
            if len(self) else []

    def to_csv(self):
        out = io.StringIO()
        out.write(",".join(self.class_order) + "\n")
        for row in self.values:
            out.write(",".join(repr(float(v)) for v in row) + "\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, source):
        """Parse a header line of labels followed by probability rows."""
        if isinstance(source, (str, os.PathLike)):
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        else:
            text = source.read()
            text = text.decode("utf-8") if isinstance(text, bytes) else text
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty probability file")
        header = [c.strip() for c in lines[0].split(",")]
        rows = []
        for lineno, line in enumerate(lines[1:], start=2):
            fields = line.split(",")
            if len(fields) != len(header):
                raise ValueError(f"line {lineno}: {len(fields)} fields, expected {len(header)}")
            try:
                rows.append([float(f) for f in fields])
            except ValueError:
                raise ValueError(f"line {lineno}: non-numeric probability") from None
        try:
            return cls(np.array(rows, dtype=np.float64).reshape(len(rows), len(header)), header)
        except ValueError as exc:
            raise ValueError(f"invalid probability file: {exc}") from None


def average_posteriors(a, b):
    """Element-wise mean of two posterior matrices and its argmax labels.

    Ties in the argmax go to the class listed first in ``class_order``.
    """
    if a.class_order != b.class_order:
        raise ValueError("class orders differ")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    avg = ProbabilityMatrix((a.values + b.values) / 2.0, a.class_order)
    return avg, avg.argmax_labels()


def one_hot_posteriors(predictions, class_order):
    """Hard predictions as a 0/1 posterior matrix."""
    class_order = [str(c) for c in class_order]
    column = {c: k for k, c in enumerate(class_order)}
    values = np.zeros((len(predictions), len(class_order)))
    for row, label in enumerate(predictions):
        try:
            values[row, column[str(label)]] = 1.0
        except KeyError:
            raise ValueError(f"prediction {label!r} not in class_order") from None
    return ProbabilityMatrix(values, class_order)


def accuracy(predictions, truth):
    if len(predictions) != len(truth):
        raise ValueError("predictions and truth differ in length")
    if not len(truth):
        raise ValueError("no instances to score")
    return sum(str(p) == str(t) for p, t in zip(predictions, truth)) / len(truth)
