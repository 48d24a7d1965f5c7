import math

import networkx as nx
import numpy as np
import pytest

from rumorsource.errors import ConfigError, ConstructionError, DomainError
from rumorsource.generators import (
    GeometricTreeSpec,
    build_graph,
    geometric_tree,
    growth_violations,
    line_graph,
    random_recursive_tree,
    random_tree,
    regular_tree,
    regular_tree_size,
    scale_free,
    small_world,
)
from rumorsource.graph import hop_distances


def test_line_graph():
    g = line_graph(5)
    assert g.edges() == [(0, 1), (1, 2), (2, 3), (3, 4)]
    assert line_graph(1).n_nodes == 1
    with pytest.raises(DomainError):
        line_graph(0)


@pytest.mark.parametrize("d,depth", [(3, 0), (3, 1), (3, 2), (3, 5), (4, 3), (2, 4), (6, 2)])
def test_regular_tree_shape(d, depth):
    g = regular_tree(d, depth)
    assert g.n_nodes == regular_tree_size(d, depth)
    assert g.is_tree()
    dist = hop_distances(g, source=0)
    deg = g.degrees
    for v, r in dist.items():
        if r < depth:
            assert deg[v] == d
        assert g.is_truncated(v) == (r == depth)


def test_regular_tree_depth_two_has_ten_nodes():
    assert regular_tree(3, 2).n_nodes == 10


def test_regular_tree_d2_is_centred_path():
    g = regular_tree(2, 3)
    assert nx.is_isomorphic(nx.Graph(g.edges()), nx.path_graph(7))
    assert g.degree(0) == 2


def test_geometric_tree_balls():
    spec = GeometricTreeSpec(alpha=1, b=1, c=1, d_star=3, radius=3)
    g = geometric_tree(spec, seed=1)
    assert g.n_nodes == 1 + 3 * (1 + 2 + 3) and g.is_tree()
    assert growth_violations(g, spec) == []
    assert spec.balanced


@pytest.mark.parametrize("seed", range(5))
def test_geometric_tree_respects_bounds(seed):
    spec = GeometricTreeSpec(alpha=1.5, b=1, c=2, d_star=4, radius=8)
    g = geometric_tree(spec, seed)
    assert g.is_tree()
    assert growth_violations(g, spec) == []
    dist = hop_distances(g, source=0)
    far = [v for v, r in dist.items() if r == spec.radius]
    assert all(g.is_truncated(v) for v in far)
    assert geometric_tree(spec, seed) == g


def test_geometric_alpha_zero_is_star_of_paths():
    g = geometric_tree(GeometricTreeSpec(alpha=0, b=1, c=1, d_star=3, radius=4), seed=0)
    # root of degree 3, three paths of length 4: 9 inner nodes, 3 leaves
    assert np.bincount(g.degrees).tolist() == [0, 3, 9, 1]
    assert g.n_nodes == 13


def test_geometric_spec_validation():
    with pytest.raises((DomainError, ConstructionError, ValueError)):
        GeometricTreeSpec(alpha=1, b=2, c=1, d_star=3, radius=3)
    with pytest.raises((DomainError, ValueError)):
        GeometricTreeSpec(alpha=1, b=1, c=1, d_star=2, radius=3)
    with pytest.raises(ConstructionError):
        # level 1 must hold one node per subtree
        geometric_tree(GeometricTreeSpec(alpha=1, b=2, c=3, d_star=3, radius=3), seed=0)


def test_small_world_is_connected_and_seeded():
    g = small_world(300, 4, 0.1, seed=2)
    assert g.n_nodes == 300 and g.is_connected()
    assert small_world(300, 4, 0.1, seed=2) == g
    assert small_world(300, 4, 0.1, seed=3) != g


def test_scale_free_degrees():
    g = scale_free(500, 2, seed=4)
    assert g.n_nodes == 500 and g.is_connected()
    assert g.n_edges == 3 + 2 * (500 - 3)
    assert max(g.degrees) > 20


def test_random_trees():
    for gen in (random_tree, random_recursive_tree):
        g = gen(50, seed=1)
        assert g.is_tree() and g.n_nodes == 50
        assert gen(50, seed=1) == g


def test_build_graph_by_name():
    assert build_graph("line", {"n": "4"}).n_edges == 3
    assert build_graph("regular_tree", {"d": 3, "depth": 2}).n_nodes == 10
    with pytest.raises(ConfigError, match="missing required key: depth"):
        build_graph("regular-tree", {"d": 3})
    with pytest.raises(ConfigError, match="unknown graph family"):
        build_graph("hypercube", {})
    with pytest.raises(ConfigError, match="seed"):
        build_graph("small-world", {})
