import os, sys

import pytest

# Ensure the repo root is first on sys.path (same as web_run.py)
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, BASE_DIR)

from lattice import BathSpec


@pytest.fixture
def small2d():
    return BathSpec(2, 8)


@pytest.fixture
def medium2d():
    return BathSpec(2, 16)
