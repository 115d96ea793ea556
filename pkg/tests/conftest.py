import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sscag import HsiCube, SceneSpec, normalize_cube, synth_scene


@pytest.fixture
def quadrant_scene():
    """The standard 32x32, 8-band, 4-class scene used across tests."""
    spec = SceneSpec(32, 32, 8, 4, separation=0.5, noise=0.05)
    return synth_scene(spec, 0)


@pytest.fixture
def small_scene():
    """A small noisy scene where exact neighbor search is instant."""
    spec = SceneSpec(9, 7, 5, 3, separation=0.4, noise=0.3)
    return synth_scene(spec, 3)


def random_cube(rng, height, width, bands):
    values = rng.uniform(0.0, 1.0, size=(height * width, bands))
    return HsiCube(height, width, values)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
