import os
import subprocess
import sys

import numpy as np
import pytest

from rumorsource import _pykernels
from rumorsource._backend import BACKEND, compiled
from rumorsource.generators import line_graph, regular_tree, small_world
from rumorsource.rng import UniformStream

from conftest import random_tree_graph

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def _same(a, b):
    assert len(a) == len(b)
    for x, y in zip(a, b):
        if isinstance(x, np.ndarray):
            np.testing.assert_array_equal(x, y)
        else:
            assert x == y


def _graphs():
    rng = np.random.default_rng(0)
    yield random_tree_graph(rng, 200)
    yield regular_tree(3, 6)
    yield small_world(300, 4, 0.2, seed=3)
    yield line_graph(50)


@needs_compiled
@pytest.mark.parametrize("g", list(_graphs()), ids=["random-tree", "regular", "small-world", "line"])
def test_static_kernels_agree(g):
    _same(_pykernels.bfs_layers(g.indptr, g.indices, 0), compiled.bfs_layers(g.indptr, g.indices, 0))
    if g.is_tree():
        p = _pykernels.tree_scores(g.indptr, g.indices, 0)
        c = compiled.tree_scores(g.indptr, g.indices, 0)
        _same(p[:3], c[:3])
        np.testing.assert_allclose(p[3], c[3], rtol=1e-12, atol=1e-9)
        np.testing.assert_array_equal(c[3], compiled.tree_log_r(g.indptr, g.indices, 0))
        np.testing.assert_array_equal(p[3], _pykernels.tree_log_r(g.indptr, g.indices, 0))
    deg = g.degrees
    p = _pykernels.bfs_scores(g.indptr, g.indices, deg)
    c = compiled.bfs_scores(g.indptr, g.indices, deg)
    np.testing.assert_allclose(p[0], c[0], rtol=1e-12, atol=1e-9)
    np.testing.assert_array_equal(p[1], c[1])
    np.testing.assert_allclose(p[2], c[2], rtol=1e-12, atol=1e-9)


@needs_compiled
@pytest.mark.parametrize("g", list(_graphs()), ids=["random-tree", "regular", "small-world", "line"])
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_random_kernels_consume_identically(g, seed):
    n = min(150, g.n_nodes)
    _same(_pykernels.spread_count(g.indptr, g.indices, 0, n, UniformStream.from_seed(seed)),
          compiled.spread_count(g.indptr, g.indices, 0, n, UniformStream.from_seed(seed)))
    _same(_pykernels.spread_time(g.indptr, g.indices, 0, 2.5, UniformStream.from_seed(seed)),
          compiled.spread_time(g.indptr, g.indices, 0, 2.5, UniformStream.from_seed(seed)))


@needs_compiled
@pytest.mark.parametrize("d", [2, 3, 5])
def test_regular_kernel_agrees(d):
    for seed in range(3):
        _same(_pykernels.spread_count_regular(d, 3000, UniformStream.from_seed(seed)),
              compiled.spread_count_regular(d, 3000, UniformStream.from_seed(seed)))


@needs_compiled
def test_disconnected_tree_scores_rejected():
    ip = np.array([0, 1, 2, 2], dtype=np.int64)
    ix = np.array([1, 0], dtype=np.int64)
    for k in (_pykernels, compiled):
        with pytest.raises(ValueError):
            k.tree_scores(ip, ix, 0)
        with pytest.raises(ValueError):
            k.tree_log_r(ip, ix, 0)


@pytest.mark.parametrize("d,depth", [(3, 13), (4, 9)])
def test_regular_kernel_matches_finite_ball(d, depth):
    g = regular_tree(d, depth)
    leaves = int(np.sum(g.degrees == 1))
    kernels = [_pykernels] + ([compiled] if compiled is not None else [])
    for k in kernels:
        for seed in range(5):
            order, times, pstep, bsize = k.spread_count_regular(d, 40, UniformStream.from_seed(seed))
            assert order.max() < g.n_nodes - leaves  # leaves never infected, so no truncation
            fo, ft, fp, fb, count = k.spread_count(g.indptr, g.indices, 0, 40, UniformStream.from_seed(seed))
            assert count == 40
            np.testing.assert_array_equal(order, fo)
            np.testing.assert_array_equal(times, ft)
            np.testing.assert_array_equal(order[pstep], fp)
            np.testing.assert_array_equal(bsize, fb)


def test_regular_kernel_overflow_guard():
    # every pick lands on the newest node, so ids grow geometrically
    class Last:
        def block(self):
            return np.full(1024, 0.999999999)
    with pytest.raises(OverflowError):
        _pykernels.spread_count_regular(3, 200, Last())


def test_pure_fallback_selected_by_environment():
    env = dict(os.environ, RUMORSOURCE_PURE="1")
    out = subprocess.run([sys.executable, "-c",
                          "from rumorsource._backend import BACKEND, kernels; print(BACKEND, kernels.__name__)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["python", "rumorsource._pykernels"]


def test_default_backend_reported():
    assert BACKEND == ("compiled" if compiled is not None else "python")
