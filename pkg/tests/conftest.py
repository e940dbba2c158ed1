import os

import numpy as np
import pytest

THREADS = min(2, os.cpu_count() or 1)


@pytest.fixture(scope="session")
def threads():
    return THREADS


def within_se(estimate: float, target: float, se: float, k: float = 4.0) -> bool:
    return abs(estimate - target) <= k * max(se, 1e-300)


@pytest.fixture(scope="session")
def gaussian_forest():
    """The q=3, alpha=0.5, depth-12, 200-tree Gaussian forest shared by the
    tree-statistics acceptance criteria."""
    import rotwalk as rw

    config = rw.TreeConfig(q=3.0, max_depth=12, alpha=0.5)
    return rw.build_forest(rw.ComplexGaussian(1.0), config, 20250811, 200, THREADS)
