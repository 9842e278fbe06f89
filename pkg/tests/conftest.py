import sys

import numpy as np
import pytest

from notescan.dataset import CLASS_VALUES, Dataset
from notescan.texfeat import FEATURE_NAMES


def random_dataset(rng, n=40, n_yes=None):
    """Random 16-attribute dataset with both classes present."""
    n_yes = n // 2 if n_yes is None else n_yes
    X = rng.normal(size=(n, 16)) * rng.uniform(0.1, 50, size=16) + rng.uniform(-5, 5, size=16)
    y = np.array(["yes"] * n_yes + ["no"] * (n - n_yes), dtype=object)
    return Dataset(X, y, FEATURE_NAMES, CLASS_VALUES)


def separable_dataset(seed=0, n=400, noise=0.0):
    """Attribute 0 separates the classes with a margin; the rest is noise.

    ``noise`` flips that fraction of labels (exactly ``round(noise * n)``).
    """
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 1, size=(n, 16))
    yes = np.arange(n) < n // 2
    X[yes, 0] = rng.uniform(0.0, 0.3, size=yes.sum())
    X[~yes, 0] = rng.uniform(0.7, 1.0, size=(~yes).sum())
    y = np.where(yes, "yes", "no").astype(object)
    flip = rng.choice(n, size=int(round(noise * n)), replace=False)
    y[flip] = np.where(y[flip] == "yes", "no", "yes")
    return Dataset(X, y, FEATURE_NAMES, CLASS_VALUES)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
