"""Labeled time series datasets in the UCR delimited-text layout.

Each nonempty line holds the class label followed by the series values,
separated by a single delimiter (tab or comma). Labels are kept as the
exact token strings read from the file.
"""

import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .warping import as_series


class DatasetParseError(ValueError):
    """Malformed dataset text; ``line`` and ``column`` are 1-based."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclass
class LabeledDataset:
    """Ordered ``(label, series)`` pairs.

    ``class_order`` lists labels by first appearance unless given
    explicitly; every label present must be in it.
    """

    instances: list
    class_order: list = field(default=None)
    name: str = None

    def __post_init__(self):
        if not self.instances:
            raise ValueError("dataset has no instances")
        self.instances = [(str(label), as_series(s, f"instance {k}"))
                          for k, (label, s) in enumerate(self.instances)]
        seen = list(dict.fromkeys(label for label, _ in self.instances))
        if self.class_order is None:
            self.class_order = seen
        else:
            self.class_order = [str(c) for c in self.class_order]
            missing = set(seen) - set(self.class_order)
            if missing:
                raise ValueError(f"labels missing from class_order: {sorted(missing)}")

    def __len__(self):
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    @property
    def labels(self):
        return [label for label, _ in self.instances]

    @property
    def series(self):
        return [s for _, s in self.instances]

    @property
    def n_classes(self):
        return len(self.class_order)

    def class_counts(self):
        counts = {c: 0 for c in self.class_order}
        for label, _ in self.instances:
            counts[label] += 1
        return counts

    def members(self, label):
        """Series of class ``label`` in dataset order."""
        return [s for lab, s in self.instances if lab == label]

    def equals(self, other):
        """Exact equality of labels, order and values."""
        return (self.labels == other.labels
                and all(np.array_equal(a, b) for a, b in zip(self.series, other.series)))


def detect_delimiter(line):
    return "\t" if "\t" in line else ","


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read().decode("utf-8")
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def read_dataset(source, delimiter=None, name=None):
    """Parse a dataset from a path or a binary/text stream.

    ``delimiter`` defaults to auto-detection from the first nonempty line:
    tab if present, else comma. Missing-value tokens and non-finite values
    are rejected.
    """
    text = _open_text(source)
    instances = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if delimiter is None:
            delimiter = detect_delimiter(line)
        fields = line.split(delimiter)
        label = fields[0].strip()
        if not label:
            raise DatasetParseError("empty label", lineno, 1)
        if len(fields) < 2:
            raise DatasetParseError("no values after label", lineno)
        values = []
        for col, tok in enumerate(fields[1:], start=2):
            try:
                if "_" in tok:
                    raise ValueError(tok)
                v = float(tok)
            except ValueError:
                raise DatasetParseError(f"not a number: {tok!r}", lineno, col) from None
            if not math.isfinite(v):
                raise DatasetParseError(f"non-finite value: {tok!r}", lineno, col)
            values.append(v)
        instances.append((label, np.array(values)))
    if not instances:
        raise DatasetParseError("empty dataset")
    if name is None and isinstance(source, (str, os.PathLike)):
        name = os.path.splitext(os.path.basename(source))[0]
    return LabeledDataset(instances, name=name)


def format_dataset(dataset, delimiter="\t"):
    """Render ``dataset`` as text with shortest round-trip float digits."""
    if not len(dataset):
        raise ValueError("dataset has no instances")
    out = io.StringIO()
    for label, s in dataset:
        out.write(label)
        for v in s:
            out.write(delimiter)
            out.write(repr(float(v)))
        out.write("\n")
    return out.getvalue()


def write_dataset(dataset, sink, delimiter="\t"):
    """Write ``dataset`` to a path or binary stream as UTF-8 with LF endings."""
    data = format_dataset(dataset, delimiter).encode("utf-8")
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            fh.write(data)
    else:
        sink.write(data)
