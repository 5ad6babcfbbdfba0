import math

import numpy as np
import pytest

from reduction import ModeBlocks


@pytest.fixture
def vectors():
    rng = np.random.default_rng(3)
    a = rng.normal(size=1000) + 1j * rng.normal(size=1000)
    b = rng.normal(size=1000) + 1j * rng.normal(size=1000)
    return a, b


def test_blocks_cover_every_mode():
    mb = ModeBlocks(1000, threads=1, block_size=64)
    assert mb.slices[0] == slice(0, 64)
    assert mb.slices[-1] == slice(960, 1000)
    assert sum(s.stop - s.start for s in mb.slices) == 1000


def test_result_does_not_depend_on_thread_count(vectors):
    a, b = vectors
    ref = ModeBlocks(len(a), threads=1, block_size=37).vdot(a, b)
    for threads in (2, 4, None):
        with ModeBlocks(len(a), threads=threads, block_size=37) as mb:
            assert mb.parallel
            assert mb.vdot(a, b) == ref           # bitwise
            assert mb.norm2(a) == ModeBlocks(len(a), 1, 37).norm2(a)


def test_reductions_agree_with_numpy(vectors):
    a, b = vectors
    mb = ModeBlocks(len(a), threads=1, block_size=100)
    assert mb.vdot(a, b) == pytest.approx(np.vdot(a, b), rel=1e-12)
    assert mb.total(a) == pytest.approx(np.sum(a), rel=1e-12)
    assert mb.norm2(a) == pytest.approx(math.fsum(np.abs(a) ** 2), rel=1e-13)


def test_single_block_runs_inline():
    mb = ModeBlocks(10, threads=8)
    assert not mb.parallel
    with mb:
        assert mb.total(np.ones(10)) == 10
