import os

import numpy as np
import pytest


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    """Shared mesh cache; honours POLAR_SCALING_CACHE so big meshes survive reruns."""
    env = os.environ.get("POLAR_SCALING_CACHE")
    return env if env else str(tmp_path_factory.mktemp("mesh-cache"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
