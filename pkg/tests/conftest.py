import os
import sys

import numpy as np
import pytest

# Ensure repository root is on sys.path so local modules import correctly during pytest
ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)


@pytest.fixture(autouse=True)
def pinned_environment(monkeypatch):
    """Single worker, no progress bar, default log level."""
    monkeypatch.setenv('MBIKIT_WORKERS', '1')
    monkeypatch.setenv('MBIKIT_PROGRESS', '0')
    monkeypatch.delenv('MBIKIT_LOG_LEVEL', raising=False)
    yield


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def admissible(rng):
    """(E, B, F) for 200 random fields in |E| <= 0.9, |B| <= 3 (ℓ² >= 0.19)."""
    from mbikit.minkowski_core import em_recompose
    from mbikit.verification import sample_compact_eb

    e, b = sample_compact_eb(rng, 200)
    return e, b, em_recompose(e, b)


@pytest.fixture
def points(rng):
    """(t, x) for 200 random points away from the origin."""
    from mbikit.verification import sample_points

    return sample_points(rng, 200)


@pytest.fixture
def small_grid():
    from mbikit.field_solver import Grid

    return Grid(16, 0.5)
