"""
Pytest configuration and fixtures for urlab tests
"""

import os
import sys
import tempfile
from collections.abc import Generator
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from urlab.geometry import BoundarySample, DomainBox, make_boundary  # noqa: E402


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Create a temporary directory for test files"""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture(autouse=True)
def cleanup_env():
    """Clean up environment variables after each test"""
    original_env = dict(os.environ)

    yield

    os.environ.clear()
    os.environ.update(original_env)


@pytest.fixture(scope="session")
def line_sample() -> BoundarySample:
    """Coarse line y = 0 in the plane with its flat tails"""
    return make_boundary("plane", {"d": 1, "extent": 4.0, "spacing": 0.02, "ahlfors_trials": 8})


@pytest.fixture(scope="session")
def line_domain(line_sample) -> DomainBox:
    """Upper half of [-1, 1] x [0, 1] over the line sample"""
    return DomainBox(lower=np.array([-1.0, 0.0]), upper=np.array([1.0, 1.0]), boundary=line_sample, side="one_side")


@pytest.fixture(scope="session")
def circle_sample() -> BoundarySample:
    """Unit circle with 256 atoms"""
    return make_boundary("circle", {"R": 1.0, "count": 256, "ahlfors_trials": 8})


@pytest.fixture(scope="session")
def cantor_sample() -> BoundarySample:
    """Generation-3 four-corner Cantor set"""
    return make_boundary("four_corner_cantor", {"generation": 3, "ahlfors_trials": 8})


@pytest.fixture
def flat_config() -> dict:
    """Flat dotted configuration of a small half-plane Green run"""
    return {
        "boundary.kind": "plane",
        "boundary.extent": 4.0,
        "boundary.spacing": 0.02,
        "boundary.ahlfors_trials": 8,
        "domain.side": "one_side",
        "domain.lower": [-1.0, 0.0],
        "domain.upper": [1.0, 1.0],
        "grid.h_ladder": [0.0625, 0.03125],
        "experiment.pole": [0.0, 0.5],
        "functional.tags": ["grad_sq_grad_u"],
    }
