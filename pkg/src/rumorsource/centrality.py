"""Rumor centrality, rumor centers, distance centrality and linear extensions.

On a tree with N nodes, R(v) = N! / prod_u T_u^v, where T_u^v is the size of
u's subtree when the tree hangs from v.  Neighbouring nodes satisfy
R(u) = R(v) * T_u^v / (N - T_u^v), so a single upward pass (subtree sizes)
and a single downward pass give every score in O(N).

Scores come in two modes: natural logs (fast, what the estimators use) and
exact Python integers.  Log-domain argmax sets treat two scores as tied
when their ratio is within :func:`tie_tolerance` of 1; small trees escalate
to exact integers whenever a near-tie shows up.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ._backend import kernels
from .errors import DomainError
from .graph import Graph, RootedTree, RumorGraph, _restriction
from .rng import make_generator

LOG_TIE_RTOL = 1e-9
EXACT_ESCALATION_MAX_N = 64
ENUMERATION_CAP = 10


class _LnFactorial:
    """ln k! for k = 0..n, grown on demand and shared per process."""

    def __init__(self):
        self.table = np.zeros(1)

    def __call__(self, n: int) -> float:
        if n >= len(self.table):
            size = max(n + 1, 2 * len(self.table))
            k = np.arange(len(self.table), size, dtype=np.float64)
            ext = self.table[-1] + np.cumsum(np.log(np.maximum(k, 1.0)))
            self.table = np.concatenate([self.table, ext])
        return float(self.table[n])


ln_factorial = _LnFactorial()


def tie_tolerance(n: int) -> float:
    """Absolute tolerance on ln-scores: 1e-9 relative on the score ratio,
    widened to cover float rounding of ln N! - sum ln T (order N ln N terms)."""
    return max(LOG_TIE_RTOL, 64 * np.finfo(float).eps * n * math.log(n + 1))


class ScoreMap(Mapping):
    """Read-only node -> score mapping over sorted id and value arrays.

    Building a million-entry dict costs more than the scoring itself, so
    bulk results are wrapped instead of copied.
    """

    __slots__ = ("_ids", "_vals")

    def __init__(self, ids: np.ndarray, values: np.ndarray):
        self._ids = ids
        self._vals = values

    def __getitem__(self, v):
        i = int(np.searchsorted(self._ids, v))
        if i == len(self._ids) or self._ids[i] != v:
            raise KeyError(v)
        return float(self._vals[i])

    def __iter__(self):
        return iter(self._ids.tolist())

    def __len__(self):
        return len(self._ids)

    def __contains__(self, v):
        i = int(np.searchsorted(self._ids, v))
        return i < len(self._ids) and self._ids[i] == v

    def __repr__(self):
        return f"ScoreMap({len(self)} nodes)"


@dataclass(frozen=True)
class CentralityScores:
    log_score: dict[int, float]
    exact_score: dict[int, int] | None
    argmax_set: frozenset[int]

    def choose(self, seed: int) -> int:
        """Uniformly random member of the argmax set (seeded)."""
        cands = sorted(self.argmax_set)
        if len(cands) == 1:
            return cands[0]
        return cands[int(make_generator(seed).integers(len(cands)))]

    def to_csv(self, header=()) -> str:
        buf = io.StringIO()
        for h in header:
            buf.write(f"# {h}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node", "log_score", "exact_score", "is_argmax"])
        for v in sorted(self.log_score):
            exact = "" if self.exact_score is None else str(self.exact_score[v])
            w.writerow([v, repr(self.log_score[v]), exact, int(v in self.argmax_set)])
        return buf.getvalue()


@dataclass(frozen=True)
class MessageState:
    """Messages of the two-pass algorithm on a rooted tree.

    ``t_up[(u, parent)]`` subtree size, ``p_up[(u, parent)]`` product of the
    subtree sizes inside u's subtree, ``r_down[(parent, u)]`` the parent's
    rumor centrality as sent down to u.  Products and centralities are exact
    integers.
    """

    root: int
    N: int
    t_up: dict[tuple[int, int], int]
    p_up: dict[tuple[int, int], int]
    r_down: dict[tuple[int, int], int]
    centrality: dict[int, int]


def _tree_graph(tree, check: bool = True) -> Graph:
    if isinstance(tree, RumorGraph):
        g = tree.subgraph
    elif isinstance(tree, RootedTree):
        g = tree.as_graph()
    elif isinstance(tree, Graph):
        g = tree
    else:
        raise DomainError(f"expected a Graph, RumorGraph or RootedTree, got {type(tree).__name__}")
    if check and not g.is_tree():
        raise DomainError("rumor centrality in closed form needs a tree")
    return g


def _sizes_from(g: Graph, root_pos: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    order, parent, _ = kernels.bfs_layers(g.indptr, g.indices, root_pos)
    size = np.ones(g.n_nodes, dtype=np.int64)
    par = parent.tolist()
    sz = size.tolist()
    for u in reversed(order.tolist()):
        p = par[u]
        if p != u:
            sz[p] += sz[u]
    return order, parent, np.asarray(sz, dtype=np.int64)


def _exact_from_sizes(sizes) -> int:
    n = len(sizes)
    denom = 1
    for t in sizes:
        denom *= int(t)
    num = math.factorial(n)
    assert num % denom == 0
    return num // denom


def rumor_centrality_exact(tree, v: int) -> int:
    """R(v) = N! / prod_u T_u^v as an exact integer."""
    g = _tree_graph(tree)
    try:
        r = g.index(v)
    except (KeyError, DomainError):
        raise DomainError(f"node {v!r} is not in the tree") from None
    _, _, size = _sizes_from(g, r)
    return _exact_from_sizes(size.tolist())


def rumor_messages(tree, root: int | None = None) -> MessageState:
    """Run the upward/downward message passes with exact integers."""
    g = _tree_graph(tree)
    n = g.n_nodes
    r = 0 if root is None else g.index(root)
    order, parent, _ = kernels.bfs_layers(g.indptr, g.indices, r)
    ids = g.ids.tolist()
    par = parent.tolist()
    children: list[list[int]] = [[] for _ in range(n)]
    for u in order.tolist()[1:]:
        children[par[u]].append(u)
    t_up: dict[tuple[int, int], int] = {}
    p_up: dict[tuple[int, int], int] = {}
    t_of = [1] * n
    p_of = [1] * n
    for u in reversed(order.tolist()):
        if u == r:
            continue
        t = 1 + sum(t_of[j] for j in children[u])
        p = t
        for j in children[u]:
            p *= p_of[j]
        t_of[u], p_of[u] = t, p
        t_up[(ids[u], ids[par[u]])] = t
        p_up[(ids[u], ids[par[u]])] = p
    prod = 1
    for j in children[r]:
        prod *= p_of[j]
    r_root = math.factorial(n) // (n * prod)
    centrality = {ids[r]: r_root}
    r_down: dict[tuple[int, int], int] = {}
    for u in order.tolist():
        if u != r:
            up = r_down[(ids[par[u]], ids[u])]
            t = t_of[u]
            centrality[ids[u]] = up * t // (n - t)
        for c in children[u]:
            r_down[(ids[u], ids[c])] = centrality[ids[u]]
    return MessageState(ids[r], n, t_up, p_up, r_down, centrality)


def _argmax_log(values: np.ndarray, n: int) -> np.ndarray:
    best = values.max()
    return np.flatnonzero(values >= best - tie_tolerance(n))


def rumor_centrality_all(tree, mode: str = "log") -> CentralityScores:
    """Rumor centrality of every node of a tree.

    ``mode="log"`` runs the compiled two-pass kernel; ``mode="exact"`` runs
    the same passes on Python integers and also fills ``log_score``.
    """
    if mode not in ("log", "exact"):
        raise DomainError(f"mode must be 'log' or 'exact', got {mode!r}")
    if mode == "exact":
        g = _tree_graph(tree)
        exact = rumor_messages(g).centrality
        logs = {v: math.log(x) for v, x in exact.items()}
        top = max(exact.values())
        arg = frozenset(v for v, x in exact.items() if x == top)
        return CentralityScores(logs, exact, arg)
    g = _tree_graph(tree, check=False)
    n = g.n_nodes
    if n == 0 or g.n_edges != n - 1:
        raise DomainError("rumor centrality in closed form needs a tree")
    try:
        # connectivity is checked inside the kernel's traversal
        log_r = kernels.tree_log_r(g.indptr, g.indices, 0)
    except ValueError:
        raise DomainError("rumor centrality in closed form needs a tree") from None
    arg_pos = _argmax_log(log_r, n)
    ids = g.ids
    if len(arg_pos) > 1 and n <= EXACT_ESCALATION_MAX_N:
        exact = rumor_messages(g).centrality
        top = max(exact[int(ids[i])] for i in arg_pos)
        arg = frozenset(int(ids[i]) for i in arg_pos if exact[int(ids[i])] == top)
    else:
        arg = frozenset(ids[arg_pos].tolist())
    return CentralityScores(ScoreMap(ids, log_r), None, arg)


def enumerate_permitted_permutations(tree, v: int, cap: int = ENUMERATION_CAP) -> list[tuple[int, ...]]:
    """Every ordering starting at ``v`` in which each node follows one of its
    neighbours (for a tree: follows its parent toward ``v``)."""
    g = tree.subgraph if isinstance(tree, RumorGraph) else (tree.as_graph() if isinstance(tree, RootedTree) else tree)
    if g.n_nodes > cap:
        raise DomainError(f"enumeration limited to {cap} nodes, graph has {g.n_nodes}")
    if v not in g:
        raise DomainError(f"node {v!r} is not in the graph")
    adj = g.adjacency
    return list(_extend((v,), {v}, adj, g.n_nodes))


def _extend(prefix, placed, adj, n) -> Iterator[tuple[int, ...]]:
    if len(prefix) == n:
        yield prefix
        return
    frontier = sorted({w for u in prefix for w in adj[u] if w not in placed})
    for w in frontier:
        placed.add(w)
        yield from _extend(prefix + (w,), placed, adj, n)
        placed.remove(w)


def _centroid_positions(g: Graph) -> list[int]:
    """Positions whose every branch has at most N/2 nodes (exact integers)."""
    n = g.n_nodes
    _, parent, size = _sizes_from(g, 0)
    biggest = np.zeros(n, dtype=np.int64)
    rows = np.arange(n)
    up = n - size
    biggest = np.maximum(biggest, np.where(parent == rows, 0, up))
    child = rows[parent != rows]
    np.maximum.at(biggest, parent[child], size[child])
    return np.flatnonzero(2 * biggest <= n).tolist()


def rumor_center(tree) -> frozenset[int]:
    """Maximizers of rumor centrality (one or two nodes).

    Computed both as the score argmax and as the set of nodes with no branch
    larger than N/2; the two must agree.
    """
    g = _tree_graph(tree)
    by_score = rumor_centrality_all(g).argmax_set
    by_size = frozenset(g.ids[_centroid_positions(g)].tolist())
    if by_score != by_size:
        raise AssertionError(f"rumor center mismatch: scores {sorted(by_score)} vs subtree sizes {sorted(by_size)}")
    return by_size


def _restricted(g: Graph, restrict) -> Graph:
    sub, _ = _restriction(g, restrict)
    if not sub.is_connected():
        raise DomainError("restricted subgraph is not connected")
    return sub


def distance_centrality_all(g: Graph, restrict=None) -> dict[int, int]:
    """D(v) = sum of hop distances from v to every node of the (restricted) graph."""
    sub = _restricted(g, restrict)
    _, dist, _ = kernels.bfs_scores(sub.indptr, sub.indices, np.zeros(sub.n_nodes, dtype=np.int64))
    return dict(zip(sub.ids.tolist(), dist.tolist()))


def distance_center(g: Graph, restrict=None) -> frozenset[int]:
    d = distance_centrality_all(g, restrict)
    best = min(d.values())
    return frozenset(v for v, x in d.items() if x == best)


def bfs_rumor_scores(g: Graph, infected) -> dict[int, float]:
    """ln R(v, T_bfs(v)) for every infected node v."""
    sub = _restricted(g, infected)
    log_r, _, _ = kernels.bfs_scores(sub.indptr, sub.indices, np.zeros(sub.n_nodes, dtype=np.int64))
    return dict(zip(sub.ids.tolist(), log_r.tolist()))


def rumor_center_general(g: Graph, infected) -> frozenset[int]:
    """Nodes maximizing rumor centrality on their own BFS tree."""
    sub = _restricted(g, infected)
    log_r, _, _ = kernels.bfs_scores(sub.indptr, sub.indices, np.zeros(sub.n_nodes, dtype=np.int64))
    arg = _argmax_log(log_r, sub.n_nodes)
    ids = sub.ids
    if len(arg) > 1 and sub.n_nodes <= EXACT_ESCALATION_MAX_N:
        exact = {int(i): _exact_from_sizes(_sizes_from(sub, int(i))[2].tolist()) for i in arg}
        top = max(exact.values())
        arg = [i for i, x in exact.items() if x == top]
    return frozenset(ids[arg].tolist())


def count_linear_extensions(t: RootedTree) -> int:
    """Orderings of the tree poset (parent before child): N! / prod T_u."""
    return _exact_from_sizes(list(t.subtree_size.values()))
