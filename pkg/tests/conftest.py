import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import sinusoids_and_ramps  # noqa: E402

from tsaugment.datasets import LabeledDataset  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def desk_split():
    """Disjoint 10+10 train and test sets of sinusoids vs. ramps."""
    train = LabeledDataset(sinusoids_and_ramps(10, seed=1), name="desk_train")
    test = LabeledDataset(sinusoids_and_ramps(10, seed=2), name="desk_test")
    return train, test


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
