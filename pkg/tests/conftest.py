import os

import hypothesis
import numpy as np
import pytest

from src.cover_utils import build_cover
from src.surface_utils import build_surface
from src.weight_utils import sample_selector_weight

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=60, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "fast"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def circle32():
    return build_surface("circle", 2, 32)


@pytest.fixture
def cover4():
    return build_cover(4, 2, "cube")


@pytest.fixture
def selector4(cover4):
    """Selector weight at R=4 with delta = 1/2."""
    return sample_selector_weight(cover4, c=2.0, lam=0.0, seed=11)


@pytest.fixture(autouse=True)
def _no_output_env(monkeypatch):
    monkeypatch.delenv("MT_LAB_OUTPUT", raising=False)


def pytest_addoption(parser):
    parser.addoption(
        "--update-golden",
        action="store_true",
        help="rewrite tests/data/golden.json from the current code",
    )
