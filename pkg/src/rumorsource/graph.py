"""Undirected graphs, rumor graphs, rooted trees and BFS views.

A :class:`Graph` stores its adjacency in CSR form over dense positions
``0..n-1``; node ids are arbitrary non-negative integers kept in a sorted
array, so position order and id order agree and every adjacency row is
sorted by id.  Breadth-first search is layered: each layer is expanded in
ascending id order and a node hangs off the lowest-id neighbour in the
previous layer.  That rule makes every BFS tree in the package
deterministic.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from ._backend import kernels
from .errors import DomainError, ParseError


def _as_id(v) -> int:
    if isinstance(v, (bool, np.bool_)) or not isinstance(v, (int, np.integer)):
        raise DomainError(f"node ids must be non-negative integers, got {v!r}")
    if v < 0:
        raise DomainError(f"node ids must be non-negative integers, got {v}")
    return int(v)


def _gather_rows(indptr: np.ndarray, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flat indices of the CSR entries of ``rows`` plus per-row lengths."""
    starts = indptr[rows]
    lens = indptr[rows + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64), lens
    offsets = np.repeat(starts - np.cumsum(lens) + lens, lens)
    return offsets + np.arange(total, dtype=np.int64), lens


class Graph:
    """Immutable simple undirected graph.

    Build with :meth:`from_edges`.  ``truncated`` optionally flags nodes on
    the cut boundary of a finite ball standing in for an infinite graph;
    spreading traces report when they reach one.
    """

    __slots__ = ("ids", "indptr", "indices", "truncated", "_dense", "_degree")

    def __init__(self, ids: np.ndarray, indptr: np.ndarray, indices: np.ndarray,
                 truncated: np.ndarray | None = None):
        self.ids = np.ascontiguousarray(ids, dtype=np.int64)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.truncated = truncated
        n = len(self.ids)
        self._dense = n == 0 or (self.ids[0] == 0 and self.ids[-1] == n - 1)
        self._degree = None
        for arr in (self.ids, self.indptr, self.indices):
            arr.flags.writeable = False

    @classmethod
    def from_edges(cls, edges: Iterable, nodes: Iterable = (), truncated: Iterable | None = None) -> "Graph":
        """Graph on the given edges (deduplicated, either orientation) plus
        any extra isolated ``nodes``."""
        if isinstance(edges, np.ndarray):
            arr = edges.astype(np.int64, copy=False).reshape(-1, 2)
            if arr.size and arr.min() < 0:
                raise DomainError("node ids must be non-negative integers")
        else:
            arr = np.array([(_as_id(u), _as_id(v)) for u, v in edges], dtype=np.int64).reshape(-1, 2)
        extra = np.array([_as_id(v) for v in nodes], dtype=np.int64)
        if arr.size and np.any(arr[:, 0] == arr[:, 1]):
            u = int(arr[arr[:, 0] == arr[:, 1]][0, 0])
            raise DomainError(f"self-loop at node {u}")
        ids = np.unique(np.concatenate([arr.ravel(), extra]))
        n = len(ids)
        if n and ids[-1] == n - 1:
            src, dst = arr[:, 0], arr[:, 1]
        else:
            src = np.searchsorted(ids, arr[:, 0])
            dst = np.searchsorted(ids, arr[:, 1])
        rows = np.concatenate([src, dst])
        cols = np.concatenate([dst, src])
        if len(rows):
            key = np.unique(rows * n + cols)
            rows, cols = key // n, key % n
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        trunc = None
        if truncated is not None:
            trunc = np.zeros(n, dtype=bool)
            t = np.array([_as_id(v) for v in truncated], dtype=np.int64)
            if len(t):
                trunc[np.searchsorted(ids, t)] = True
        return cls(ids, indptr, cols, trunc)

    @classmethod
    def from_adjacency(cls, adjacency: Mapping[int, Iterable[int]]) -> "Graph":
        edges = [(u, w) for u, nbrs in adjacency.items() for w in nbrs]
        return cls.from_edges(edges, nodes=adjacency.keys())

    # -- size and lookup -------------------------------------------------

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def n_nodes(self) -> int:
        return len(self.ids)

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    @property
    def nodes(self) -> list[int]:
        return self.ids.tolist()

    def __contains__(self, v) -> bool:
        try:
            self.index(v)
        except (DomainError, KeyError):
            return False
        return True

    def index(self, v) -> int:
        """Dense position of node id ``v``."""
        v = _as_id(v)
        if self._dense:
            if v < len(self.ids):
                return v
        else:
            i = int(np.searchsorted(self.ids, v))
            if i < len(self.ids) and self.ids[i] == v:
                return i
        raise KeyError(v)

    def positions(self, nodes: Iterable) -> np.ndarray:
        arr = np.fromiter((_as_id(v) for v in nodes), dtype=np.int64) if not isinstance(nodes, np.ndarray) \
            else nodes.astype(np.int64, copy=False)
        if self._dense:
            pos = arr
            bad = (arr >= len(self.ids))
        else:
            pos = np.searchsorted(self.ids, arr)
            pos_c = np.minimum(pos, len(self.ids) - 1)
            bad = self.ids[pos_c] != arr if len(self.ids) else np.ones(len(arr), dtype=bool)
        if np.any(bad):
            raise KeyError(int(arr[np.argmax(bad)]))
        return pos

    def neighbors(self, v) -> list[int]:
        i = self.index(v)
        return self.ids[self.indices[self.indptr[i]:self.indptr[i + 1]]].tolist()

    def degree(self, v) -> int:
        i = self.index(v)
        return int(self.indptr[i + 1] - self.indptr[i])

    @property
    def degrees(self) -> np.ndarray:
        if self._degree is None:
            self._degree = np.diff(self.indptr)
        return self._degree

    @property
    def adjacency(self) -> dict[int, list[int]]:
        ids = self.ids.tolist()
        nb = self.ids[self.indices].tolist()
        ip = self.indptr.tolist()
        return {ids[i]: nb[ip[i]:ip[i + 1]] for i in range(len(ids))}

    def has_edge(self, u, v) -> bool:
        try:
            i, j = self.index(u), self.index(v)
        except KeyError:
            return False
        row = self.indices[self.indptr[i]:self.indptr[i + 1]]
        k = np.searchsorted(row, j)
        return bool(k < len(row) and row[k] == j)

    def edges(self) -> list[tuple[int, int]]:
        """Each edge once as ``(u, v)`` with ``u < v``, sorted."""
        rows = np.repeat(np.arange(len(self.ids)), np.diff(self.indptr))
        keep = rows < self.indices
        u = self.ids[rows[keep]].tolist()
        v = self.ids[self.indices[keep]].tolist()
        return list(zip(u, v))

    def is_truncated(self, v) -> bool:
        return self.truncated is not None and bool(self.truncated[self.index(v)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (np.array_equal(self.ids, other.ids) and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    __hash__ = None

    def __repr__(self) -> str:
        return f"Graph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"

    # -- derived views ---------------------------------------------------

    def induced_csr(self, pos: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """CSR of the subgraph induced by sorted unique positions ``pos``,
        relabelled to ``0..len(pos)-1``."""
        flat, lens = _gather_rows(self.indptr, pos)
        nb = self.indices[flat]
        loc = np.searchsorted(pos, nb)
        loc_c = np.minimum(loc, len(pos) - 1)
        keep = pos[loc_c] == nb
        row = np.repeat(np.arange(len(pos)), lens)
        counts = np.bincount(row[keep], minlength=len(pos))
        indptr = np.zeros(len(pos) + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return indptr, loc[keep].astype(np.int64)

    def subgraph(self, nodes: Iterable) -> "Graph":
        pos = np.unique(self.positions(nodes))
        indptr, indices = self.induced_csr(pos)
        trunc = self.truncated[pos] if self.truncated is not None else None
        return Graph(self.ids[pos], indptr, indices, trunc)

    def is_tree(self) -> bool:
        n = self.n_nodes
        if n == 0 or self.n_edges != n - 1:
            return False
        order, _, _ = kernels.bfs_layers(self.indptr, self.indices, 0)
        return len(order) == n

    def is_connected(self) -> bool:
        n = self.n_nodes
        if n == 0:
            return False
        order, _, _ = kernels.bfs_layers(self.indptr, self.indices, 0)
        return len(order) == n


class RumorGraph:
    """The observed infected set inside a host graph.

    ``infected`` keeps the caller's order (an infection order when it comes
    from a simulator); the induced subgraph must be connected.
    """

    __slots__ = ("host", "infected", "_pos", "_sub")

    def __init__(self, host: Graph, infected: Iterable, check: bool = True):
        self.host = host
        self.infected = tuple(_as_id(v) for v in infected)
        if not self.infected:
            raise DomainError("a rumor graph needs at least one infected node")
        try:
            pos = host.positions(self.infected)
        except KeyError as exc:
            raise DomainError(f"infected node {exc.args[0]} is not in the host graph") from None
        upos = np.unique(pos)
        if len(upos) != len(pos):
            raise DomainError("infected nodes must be distinct")
        self._pos = upos
        self._sub = None
        if check and not self.subgraph.is_connected():
            raise DomainError("infected nodes do not induce a connected subgraph")

    @property
    def N(self) -> int:
        return len(self.infected)

    @property
    def nodes(self) -> list[int]:
        """Infected ids in ascending order."""
        return self.host.ids[self._pos].tolist()

    @property
    def host_positions(self) -> np.ndarray:
        return self._pos

    @property
    def subgraph(self) -> Graph:
        if self._sub is None:
            indptr, indices = self.host.induced_csr(self._pos)
            self._sub = Graph(self.host.ids[self._pos], indptr, indices)
        return self._sub

    @property
    def host_degrees(self) -> np.ndarray:
        """Host-graph degree of each infected node, in ascending id order."""
        return self.host.degrees[self._pos]

    def is_tree(self) -> bool:
        return self.subgraph.n_edges == self.N - 1

    def __contains__(self, v) -> bool:
        return v in set(self.infected)

    def __repr__(self) -> str:
        return f"RumorGraph(N={self.N}, host={self.host!r})"


@dataclass(frozen=True)
class RootedTree:
    root: int
    parent: dict[int, int]
    children: dict[int, list[int]]
    subtree_size: dict[int, int]
    order: tuple[int, ...] = field(repr=False, default=())
    depth: dict[int, int] = field(repr=False, default_factory=dict)

    @property
    def N(self) -> int:
        return len(self.parent)

    @classmethod
    def from_parent(cls, root: int, parent: Mapping[int, int]) -> "RootedTree":
        """Rooted tree from a child -> parent map (root maps to itself)."""
        children: dict[int, list[int]] = {u: [] for u in parent}
        for u, p in parent.items():
            if u != p:
                if p not in children:
                    raise DomainError(f"parent {p} of {u} is not a tree node")
                children[p].append(u)
        if parent.get(root) != root:
            raise DomainError("the root must map to itself")
        for kids in children.values():
            kids.sort()
        order = [root]
        depth = {root: 0}
        i = 0
        while i < len(order):
            u = order[i]
            i += 1
            for w in children[u]:
                depth[w] = depth[u] + 1
                order.append(w)
        if len(order) != len(parent):
            raise DomainError("parent map contains a cycle or a second root")
        tree = cls(root, dict(parent), children, {}, tuple(order), depth)
        tree.subtree_size.update(subtree_sizes(tree))
        return tree

    def as_graph(self) -> Graph:
        return Graph.from_edges([(u, p) for u, p in self.parent.items() if u != p], nodes=[self.root])


def subtree_sizes(t: RootedTree) -> dict[int, int]:
    """T_u for every node u of ``t`` (root's is N), in one post-order pass."""
    order = t.order or _preorder(t)
    size = dict.fromkeys(order, 1)
    for u in reversed(order):
        p = t.parent[u]
        if p != u:
            size[p] += size[u]
    return size


def _preorder(t: RootedTree) -> tuple[int, ...]:
    out = [t.root]
    stack = list(reversed(t.children[t.root]))
    while stack:
        u = stack.pop()
        out.append(u)
        stack.extend(reversed(t.children[u]))
    return tuple(out)


def _restriction(g: Graph, infected) -> tuple[Graph, np.ndarray | None]:
    if infected is None:
        return g, None
    if isinstance(infected, RumorGraph):
        if infected.host is not g and infected.host != g:
            raise DomainError("rumor graph belongs to a different host")
        return infected.subgraph, infected.host_positions
    sub = g.subgraph(infected)
    return sub, None


def bfs_tree(g: Graph, infected=None, root: int = 0) -> RootedTree:
    """Deterministic BFS spanning tree of the infected subgraph rooted at ``root``.

    ``infected`` may be a :class:`RumorGraph`, any iterable of node ids, or
    ``None`` for the whole graph.
    """
    sub, _ = _restriction(g, infected)
    try:
        r = sub.index(root)
    except (KeyError, DomainError):
        raise DomainError(f"root {root!r} is not an infected node") from None
    order, parent, depth = kernels.bfs_layers(sub.indptr, sub.indices, r)
    if len(order) != sub.n_nodes:
        raise DomainError("infected nodes do not induce a connected subgraph")
    ids = sub.ids
    oid = ids[order].tolist()
    pid = ids[parent[order]].tolist()
    did = depth[order].tolist()
    par = dict(zip(oid, pid))
    children: dict[int, list[int]] = {u: [] for u in oid}
    for u, p in zip(oid[1:], pid[1:]):
        children[p].append(u)
    for kids in children.values():
        kids.sort()
    tree = RootedTree(int(ids[r]), par, children, {}, tuple(oid), dict(zip(oid, did)))
    tree.subtree_size.update(subtree_sizes(tree))
    return tree


def bfs_order(g: Graph, infected=None, root: int = 0) -> list[int]:
    """Layered BFS order (sigma_v*) of the infected subgraph from ``root``."""
    return list(bfs_tree(g, infected, root).order)


def hop_distances(g: Graph, restrict=None, source: int = 0) -> dict[int, int]:
    """Hop distance from ``source``; inside the subgraph induced by
    ``restrict`` when given (every restricted node must be reachable)."""
    sub, _ = _restriction(g, restrict)
    try:
        s = sub.index(source)
    except (KeyError, DomainError):
        raise DomainError(f"source {source!r} is not in the (restricted) graph") from None
    order, _, depth = kernels.bfs_layers(sub.indptr, sub.indices, s)
    if restrict is not None and len(order) != sub.n_nodes:
        missing = sub.ids[depth < 0][0]
        raise DomainError(f"node {int(missing)} is unreachable from {source} within the restriction")
    return dict(zip(sub.ids[order].tolist(), depth[order].tolist()))


# -- edge-list text format -------------------------------------------------

def parse_edge_list(lines: Iterable[str], path=None) -> Graph:
    edges = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise ParseError(f"expected two non-negative integers 'u v', got {raw.rstrip()!r}",
                             lineno=lineno, path=path)
        u, v = int(parts[0]), int(parts[1])
        if u == v:
            raise ParseError(f"self-loop {u} {v}", lineno=lineno, path=path)
        edges.append((u, v))
    return Graph.from_edges(np.array(edges, dtype=np.int64).reshape(-1, 2))


def load_edge_list(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh, path=os.fspath(path))


def format_edge_list(g: Graph, header: Iterable[str] = ()) -> str:
    out = [f"# {h}\n" for h in header]
    out.extend(f"{u} {v}\n" for u, v in g.edges())
    return "".join(out)


def save_edge_list(g: Graph, path, header: Iterable[str] = ()) -> None:
    """Write ``g`` as sorted ``u v`` lines (u < v).  Isolated nodes are not
    representable in the format and are dropped."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_edge_list(g, header))
