import sys
from pathlib import Path

import numpy as np
import pytest

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"

sys.path.insert(0, str(REPO / "tests"))


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def tiny_dataset():
    from ferfuse.dataset import load_fer_csv

    return load_fer_csv(FIXTURES / "fer_tiny.csv")


@pytest.fixture(scope="session")
def tiny_deep_path():
    return FIXTURES / "fer_tiny_deep.hyf"


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
