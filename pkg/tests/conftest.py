import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from locmap.fixtures import gen_fixtures
from locmap.manifest import load_manifest


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """Small shared fixture dataset for pipeline/CLI tests."""
    out = tmp_path_factory.mktemp("tinyset")
    path = gen_fixtures(seed=11, out_dir=out, n_images=4, size=48, channels=6)
    return load_manifest(path)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
