"""Host-graph families: lines, regular trees, geometric trees, small-world
and scale-free graphs, plus edge-list ingestion.

Every stochastic generator is a pure function of its parameters and an
integer seed.  Trees are numbered in BFS order from the root (node 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import networkx as nx
import numpy as np

from .errors import ConfigError, ConstructionError, DomainError
from .graph import Graph, load_edge_list, save_edge_list  # noqa: F401  (re-exported)
from .rng import make_generator

SMALL_WORLD_DEFAULTS = {"n": 5000, "k": 4, "p": 0.1}
SCALE_FREE_DEFAULTS = {"n": 5000, "m": 2}


def _levels_to_graph(parent_blocks: list[np.ndarray], n: int, depth_of_last: int | None) -> Graph:
    """Graph from per-level parent arrays, nodes numbered 1.. in level order."""
    if n == 1:
        return Graph.from_edges(np.empty((0, 2), dtype=np.int64), nodes=[0], truncated=[0])
    parents = np.concatenate(parent_blocks)
    children = np.arange(1, n, dtype=np.int64)
    edges = np.stack([parents, children], axis=1)
    trunc = None
    if depth_of_last is not None:
        trunc = np.arange(n - len(parent_blocks[-1]), n)
    return Graph.from_edges(edges, truncated=trunc)


def line_graph(n: int) -> Graph:
    """Path 0-1-...-(n-1)."""
    if n < 1:
        raise DomainError(f"line_graph needs n >= 1, got {n}")
    if n == 1:
        return Graph.from_edges(np.empty((0, 2), dtype=np.int64), nodes=[0])
    a = np.arange(n - 1, dtype=np.int64)
    return Graph.from_edges(np.stack([a, a + 1], axis=1))


def regular_tree_size(d: int, depth: int) -> int:
    if d == 2:
        return 2 * depth + 1
    return 1 + d * ((d - 1) ** depth - 1) // (d - 2)


def regular_tree(d: int, depth: int) -> Graph:
    """Ball of radius ``depth`` around node 0 in the infinite d-regular tree.

    Nodes at distance ``depth`` are flagged as truncated.  For d = 2 this is a
    path of 2*depth + 1 nodes with node 0 in the middle.
    """
    if d < 2:
        raise DomainError(f"regular_tree needs d >= 2, got {d}")
    if depth < 0:
        raise DomainError(f"regular_tree needs depth >= 0, got {depth}")
    blocks = []
    prev = np.array([0], dtype=np.int64)
    nxt = 1
    for level in range(1, depth + 1):
        fan = d if level == 1 else d - 1
        par = np.repeat(prev, fan)
        blocks.append(par)
        prev = np.arange(nxt, nxt + len(par), dtype=np.int64)
        nxt += len(par)
    return _levels_to_graph(blocks, nxt, depth)


@dataclass(frozen=True)
class GeometricTreeSpec:
    """Polynomial-growth tree: each of the ``d_star`` root subtrees has
    between b*r**alpha and c*r**alpha nodes at distance r from the root."""

    alpha: float
    b: float
    c: float
    d_star: int
    radius: int

    def __post_init__(self):
        if not self.alpha >= 0:
            raise DomainError(f"alpha must be >= 0, got {self.alpha}")
        if not 0 < self.b <= self.c:
            raise DomainError(f"need 0 < b <= c, got b={self.b}, c={self.c}")
        if self.d_star < 3:
            raise DomainError(f"d_star must be >= 3, got {self.d_star}")
        if self.radius < 1:
            raise DomainError(f"radius must be >= 1, got {self.radius}")

    def level_bounds(self, r: int) -> tuple[int, int]:
        """Integer range of admissible level-r sizes per subtree."""
        lo = self.b * r ** self.alpha
        hi = self.c * r ** self.alpha
        return max(1, math.ceil(lo - 1e-9)), math.floor(hi + 1e-9)

    @property
    def balanced(self) -> bool:
        """Whether the root degree satisfies d_star > c/b + 1 (with alpha > 0),
        the hypothesis under which detection tends to certainty."""
        return self.alpha > 0 and self.d_star > self.c / self.b + 1


def geometric_tree(spec: GeometricTreeSpec, seed: int) -> Graph:
    """Random tree meeting ``spec``'s level-size bounds around node 0.

    Level sizes are sampled uniformly from the admissible integers; children
    are spread over the previous level as evenly as possible, with the
    parents that take one extra child chosen at random.  The result is
    checked with :func:`growth_violations` before it is returned.
    """
    rng = make_generator(seed)
    lo1, hi1 = spec.level_bounds(1)
    if not lo1 <= 1 <= hi1:
        raise ConstructionError(
            f"each root subtree starts with exactly 1 node at distance 1, outside [{spec.b}, {spec.c}]")
    # per subtree: list of level sizes
    sizes = np.ones((spec.d_star, spec.radius), dtype=np.int64)
    for r in range(2, spec.radius + 1):
        lo, hi = spec.level_bounds(r)
        if lo > hi:
            raise ConstructionError(f"no integer level size in [{spec.b}*{r}^{spec.alpha}, "
                                    f"{spec.c}*{r}^{spec.alpha}] at distance {r}")
        sizes[:, r - 1] = rng.integers(lo, hi + 1, size=spec.d_star)

    blocks = [np.zeros(spec.d_star, dtype=np.int64)]
    prev = [np.array([1 + i], dtype=np.int64) for i in range(spec.d_star)]
    nxt = 1 + spec.d_star
    for r in range(2, spec.radius + 1):
        level_par = []
        for i in range(spec.d_star):
            parents = prev[i]
            target = int(sizes[i, r - 1])
            q, extra = divmod(target, len(parents))
            fan = np.full(len(parents), q, dtype=np.int64)
            if extra:
                fan[rng.choice(len(parents), size=extra, replace=False)] += 1
            level_par.append(np.repeat(parents, fan))
        par = np.concatenate(level_par)
        blocks.append(par)
        start = nxt
        new_prev = []
        for lp in level_par:
            new_prev.append(np.arange(start, start + len(lp), dtype=np.int64))
            start += len(lp)
        prev = new_prev
        nxt += len(par)
    g = _levels_to_graph(blocks, nxt, spec.radius)
    bad = growth_violations(g, spec)
    if bad:
        raise ConstructionError(f"generated tree violates the growth bounds: {bad[:3]}")
    return g


def _subtree_labels(g: Graph, root: int) -> tuple[np.ndarray, np.ndarray]:
    from ._backend import kernels

    r = g.index(root)
    order, parent, depth = kernels.bfs_layers(g.indptr, g.indices, r)
    label = np.full(g.n_nodes, -1, dtype=np.int64)
    for u in order[1:]:
        p = parent[u]
        label[u] = u if p == r else label[p]
    return label, depth


def growth_violations(g: Graph, spec: GeometricTreeSpec, root: int = 0,
                      all_nodes: bool = False) -> list[tuple]:
    """Level counts breaking b*r**alpha <= n <= c*r**alpha.

    By default counts are taken around the root, per root subtree, for
    r = 1..radius.  With ``all_nodes`` every node v of every root subtree is
    checked for each r whose ball around v stays inside the generated radius
    (counting only nodes of v's own subtree).  Returns
    ``(subtree_root, v, r, count)`` tuples; empty means the tree passes.
    """
    from ._backend import kernels

    label, depth = _subtree_labels(g, root)
    lo = lambda r: spec.b * r ** spec.alpha - 1e-9  # noqa: E731
    hi = lambda r: spec.c * r ** spec.alpha + 1e-9  # noqa: E731
    bad = []
    r0 = g.index(root)
    for s in np.unique(label[label >= 0]):
        members = label == s
        counts = np.bincount(depth[members], minlength=spec.radius + 1)
        for r in range(1, spec.radius + 1):
            if not lo(r) <= counts[r] <= hi(r):
                bad.append((int(g.ids[s]), int(g.ids[r0]), r, int(counts[r])))
        if all_nodes:
            pos = np.flatnonzero(members)
            sub = g.subgraph(g.ids[pos])
            for v in range(sub.n_nodes):
                _, _, dv = kernels.bfs_layers(sub.indptr, sub.indices, v)
                room = spec.radius - int(depth[pos[v]])
                cnt = np.bincount(dv[dv >= 0], minlength=room + 1)
                for r in range(1, room + 1):
                    if not lo(r) <= cnt[r] <= hi(r):
                        bad.append((int(g.ids[s]), int(sub.ids[v]), r, int(cnt[r])))
    return bad


def small_world(n: int = 5000, k: int = 4, p: float = 0.1, seed: int = 0, max_tries: int = 100) -> Graph:
    """Connected Watts-Strogatz graph; retries with seed+1, seed+2, ...
    until the rewired graph is connected."""
    if not (n > k >= 2 and k % 2 == 0):
        raise DomainError(f"small_world needs n > k >= 2 with k even, got n={n}, k={k}")
    if not 0 <= p <= 1:
        raise DomainError(f"rewiring probability must be in [0, 1], got {p}")
    for attempt in range(max_tries):
        nxg = nx.watts_strogatz_graph(n, k, p, seed=seed + attempt)
        if nx.is_connected(nxg):
            return _from_nx(nxg)
    raise ConstructionError(f"no connected small-world graph after {max_tries} tries")


def scale_free(n: int = 5000, m: int = 2, seed: int = 0) -> Graph:
    """Barabasi-Albert preferential attachment grown from a clique on m+1 nodes."""
    if not n > m >= 1:
        raise DomainError(f"scale_free needs n > m >= 1, got n={n}, m={m}")
    nxg = nx.barabasi_albert_graph(n, m, seed=seed, initial_graph=nx.complete_graph(m + 1))
    return _from_nx(nxg)


def random_tree(n: int, seed: int) -> Graph:
    """Uniformly random labelled tree on nodes 0..n-1."""
    if n < 1:
        raise DomainError(f"random_tree needs n >= 1, got {n}")
    if n == 1:
        return Graph.from_edges(np.empty((0, 2), dtype=np.int64), nodes=[0])
    return _from_nx(nx.random_labeled_tree(n, seed=seed))


def random_recursive_tree(n: int, seed: int) -> Graph:
    """Node i attaches to a uniform earlier node; O(n), used for large trees."""
    if n < 1:
        raise DomainError(f"random_recursive_tree needs n >= 1, got {n}")
    if n == 1:
        return Graph.from_edges(np.empty((0, 2), dtype=np.int64), nodes=[0])
    rng = make_generator(seed)
    child = np.arange(1, n, dtype=np.int64)
    par = np.floor(rng.random(n - 1) * child).astype(np.int64)
    return Graph.from_edges(np.stack([par, child], axis=1))


def _from_nx(nxg) -> Graph:
    edges = np.array(list(nxg.edges()), dtype=np.int64).reshape(-1, 2)
    return Graph.from_edges(edges, nodes=list(nxg.nodes()))


# -- families by name -------------------------------------------------------

FAMILIES = ("line", "regular-tree", "geometric-tree", "small-world", "scale-free", "edge-list")


def normalize_family(name: str) -> str:
    key = name.strip().lower().replace("_", "-")
    if key not in FAMILIES:
        raise ConfigError(f"unknown graph family {name!r}; expected one of {', '.join(FAMILIES)}")
    return key


def _get(params: Mapping, key: str, conv, default=None):
    if key in params and params[key] not in (None, ""):
        try:
            return conv(params[key])
        except (TypeError, ValueError):
            raise ConfigError(f"bad value for {key}: {params[key]!r}") from None
    if default is None:
        raise ConfigError(f"missing required key: {key}")
    return default


def geometric_spec_from(params: Mapping) -> GeometricTreeSpec:
    return GeometricTreeSpec(
        alpha=_get(params, "alpha", float),
        b=_get(params, "b", float),
        c=_get(params, "c", float),
        d_star=_get(params, "d_star", int),
        radius=_get(params, "radius", int),
    )


def build_graph(family: str, params: Mapping, seed: int | None = None) -> Graph:
    """Construct a family member from string or typed parameters."""
    fam = normalize_family(family)
    if fam == "line":
        return line_graph(_get(params, "n", int))
    if fam == "regular-tree":
        return regular_tree(_get(params, "d", int), _get(params, "depth", int))
    if fam == "edge-list":
        return load_edge_list(_get(params, "path", str))
    if seed is None:
        raise ConfigError("missing required key: seed")
    if fam == "geometric-tree":
        return geometric_tree(geometric_spec_from(params), seed)
    if fam == "small-world":
        return small_world(_get(params, "n", int, SMALL_WORLD_DEFAULTS["n"]),
                           _get(params, "k", int, SMALL_WORLD_DEFAULTS["k"]),
                           _get(params, "p", float, SMALL_WORLD_DEFAULTS["p"]), seed)
    return scale_free(_get(params, "n", int, SCALE_FREE_DEFAULTS["n"]),
                      _get(params, "m", int, SCALE_FREE_DEFAULTS["m"]), seed)
