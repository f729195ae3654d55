"""Shared fixtures: domains and grids reused across the test modules."""
from __future__ import annotations

import numpy as np
import pytest

from hardycond import build_domain, build_polar_grid


def thetas(n: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n) / n


@pytest.fixture(scope="session")
def disk():
    return build_domain()


@pytest.fixture(scope="session")
def annulus():
    return build_domain([(0j, 0.5)])


@pytest.fixture(scope="session")
def two_holes():
    return build_domain([(-0.45 + 0.1j, 0.18), (0.4 - 0.05j, 0.15)])


@pytest.fixture(scope="session")
def disk_grid():
    return build_polar_grid(32, 64)


@pytest.fixture(scope="session")
def annulus_grid():
    return build_polar_grid(32, 64, r_inner=0.5)
