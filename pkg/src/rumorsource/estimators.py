"""Rumor-source estimators and brute-force likelihood oracles.

Estimators score every infected node and return the argmax set plus one
seeded pick from it:

``rumor``
    rumor centrality; on a non-tree rumor graph, rumor centrality of each
    node on its own BFS tree.
``rumor-bfs``
    the BFS heuristic P(sigma_v* | v) * R(v, T_bfs(v)), with P from the
    boundary recursion using host-graph degrees.
``distance``
    minimum total hop distance (scores are -D(v)).
``random``
    uniform guess over the infected nodes.
``exact-oracle``
    exact SI likelihood by enumerating permitted permutations (small trees).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._backend import kernels
from .centrality import (
    EXACT_ESCALATION_MAX_N,
    ENUMERATION_CAP,
    CentralityScores,
    _exact_from_sizes,
    _sizes_from,
    enumerate_permitted_permutations,
    tie_tolerance,
)
from .errors import DomainError
from .graph import Graph, RumorGraph
from .rng import make_generator

ESTIMATORS = ("rumor", "rumor-bfs", "distance", "random", "exact-oracle")


@dataclass(frozen=True)
class PermutationProbability:
    log_p: float
    boundary_sequence: tuple[int, ...]

    @property
    def exact(self) -> Fraction:
        return Fraction(1, math.prod(self.boundary_sequence))


@dataclass(frozen=True)
class EstimateResult:
    estimator_name: str
    scores: CentralityScores
    estimate: int
    argmax_set: frozenset[int]
    seed_used: int

    def to_csv(self, header=()) -> str:
        buf = io.StringIO()
        for h in header:
            buf.write(f"# {h}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["estimator", "node", "log_score", "is_argmax", "chosen"])
        for v in sorted(self.scores.log_score):
            w.writerow([self.estimator_name, v, repr(self.scores.log_score[v]),
                        int(v in self.argmax_set), int(v == self.estimate)])
        return buf.getvalue()


def permutation_probability(g: Graph, sigma) -> PermutationProbability:
    """P(sigma | sigma[0]) = prod_k 1/n_k with n_1 = d_1, n_k = n_{k-1} + d_k - 2.

    Degrees are host-graph degrees.  Exact for SI on a tree host; on other
    hosts it is the heuristic value of the same recursion.
    """
    sigma = list(sigma)
    if not sigma:
        raise DomainError("empty permutation")
    seen: set[int] = set()
    for k, v in enumerate(sigma):
        if v not in g:
            raise DomainError(f"node {v!r} is not in the host graph")
        if v in seen or (k and not any(w in seen for w in g.neighbors(v))):
            raise DomainError(f"not a permitted permutation: {v} at position {k} has no earlier neighbour")
        seen.add(v)
    seq = []
    nk = g.degree(sigma[0])
    for k in range(1, len(sigma)):
        if nk <= 0:
            raise DomainError(f"rumor boundary is empty after {k} infections")
        seq.append(nk)
        nk += g.degree(sigma[k]) - 2
    return PermutationProbability(-sum(math.log(x) for x in seq), tuple(seq))


# -- scoring on positions (shared with the experiment harness) --------------

def _local(g: Graph, infected) -> tuple[Graph, np.ndarray]:
    if isinstance(infected, RumorGraph):
        if infected.host is not g and infected.host != g:
            raise DomainError("rumor graph belongs to a different host")
        sub = infected.subgraph
        pos = infected.host_positions
    else:
        try:
            pos = np.unique(g.positions(list(infected)))
        except KeyError as exc:
            raise DomainError(f"infected node {exc.args[0]} is not in the host graph") from None
        indptr, indices = g.induced_csr(pos)
        sub = Graph(g.ids[pos], indptr, indices)
    if not sub.is_connected():
        raise DomainError("infected nodes do not induce a connected subgraph")
    return sub, pos


def score_local(name: str, indptr, indices, host_deg) -> np.ndarray:
    """Scores (higher is better) of every node of a connected rumor graph in
    local CSR form; ``host_deg`` are the nodes' host degrees."""
    n = len(indptr) - 1
    if name == "rumor":
        if len(indices) == 2 * (n - 1):
            return kernels.tree_log_r(indptr, indices, 0)
        return kernels.bfs_scores(indptr, indices, host_deg)[0]
    if name == "rumor-bfs":
        log_r, _, log_p = kernels.bfs_scores(indptr, indices, host_deg)
        if np.isnan(log_p).any():
            raise DomainError("rumor boundary recursion reached n_k <= 0 (host component exhausted)")
        return log_r + log_p
    if name == "distance":
        return -kernels.bfs_scores(indptr, indices, host_deg)[1].astype(np.float64)
    if name == "random":
        return np.zeros(n)
    raise DomainError(f"unknown estimator {name!r}; expected one of {', '.join(ESTIMATORS)}")


def _exact_value(name: str, sub: Graph, i: int, host_deg) -> Fraction:
    if name == "rumor" and sub.is_tree():
        return Fraction(_exact_from_sizes(_sizes_from(sub, i)[2].tolist()))
    order, parent, _ = kernels.bfs_layers(sub.indptr, sub.indices, i)
    size = np.ones(sub.n_nodes, dtype=np.int64)
    for u in order[::-1]:
        if parent[u] != u:
            size[parent[u]] += size[u]
    r = Fraction(_exact_from_sizes(size.tolist()))
    if name == "rumor":
        return r
    prod, nk = 1, int(host_deg[order[0]])
    for k in range(1, sub.n_nodes):
        prod *= nk
        nk += int(host_deg[order[k]]) - 2
    return r / prod


def argmax_local(name: str, scores: np.ndarray, sub: Graph | None = None, host_deg=None) -> np.ndarray:
    """Positions of the maximal scores; log-domain near-ties on small
    rumor graphs are settled in exact arithmetic."""
    n = len(scores)
    if name in ("distance", "random"):
        return np.flatnonzero(scores == scores.max())
    arg = np.flatnonzero(scores >= scores.max() - tie_tolerance(n))
    if len(arg) > 1 and sub is not None and n <= EXACT_ESCALATION_MAX_N:
        vals = [_exact_value(name, sub, int(i), host_deg) for i in arg]
        top = max(vals)
        arg = np.array([i for i, x in zip(arg, vals) if x == top], dtype=np.int64)
    return arg


def _estimate(name: str, g: Graph, infected, seed: int) -> EstimateResult:
    sub, pos = _local(g, infected)
    host_deg = g.degrees[pos]
    scores = score_local(name, sub.indptr, sub.indices, host_deg)
    arg = argmax_local(name, scores, sub, host_deg)
    ids = sub.ids.tolist()
    amax = frozenset(ids[i] for i in arg)
    cs = CentralityScores(dict(zip(ids, scores.tolist())), None, amax)
    return EstimateResult(name, cs, cs.choose(seed), amax, seed)


def _require_tree(g: Graph, infected) -> None:
    sub, _ = _local(g, infected)
    if not sub.is_tree():
        raise DomainError("this estimator needs the infected subgraph to be a tree")


def estimate_regular_tree(infected, seed: int = 0) -> EstimateResult:
    """ML estimate on a regular-tree host: the rumor center."""
    g = infected.host if isinstance(infected, RumorGraph) else infected
    _require_tree(g, infected if isinstance(infected, RumorGraph) else g.nodes)
    return _estimate("rumor", g, infected if isinstance(infected, RumorGraph) else g.nodes, seed)


def estimate_general_tree(g: Graph, infected, seed: int = 0) -> EstimateResult:
    """BFS-heuristic estimate on a tree rumor graph with heterogeneous degrees."""
    _require_tree(g, infected)
    return _estimate("rumor-bfs", g, infected, seed)


def estimate_general_graph(g: Graph, infected, seed: int = 0, heuristic: bool = True) -> EstimateResult:
    """BFS-tree estimate on a general rumor graph.  With ``heuristic=False``
    the P(sigma_v*|v) factor is dropped (the general-graph rumor center)."""
    return _estimate("rumor-bfs" if heuristic else "rumor", g, infected, seed)


def estimate_distance(g: Graph, infected, seed: int = 0) -> EstimateResult:
    return _estimate("distance", g, infected, seed)


def exact_likelihood(g: Graph, infected, v: int, exact: bool = False, cap: int = ENUMERATION_CAP):
    """P(G_N | v) summed over all permitted permutations from ``v``.

    Returns the natural log, or a :class:`~fractions.Fraction` with
    ``exact=True``.  The true SI likelihood when the host is a tree.
    """
    sub, _ = _local(g, infected)
    if not sub.is_tree():
        raise DomainError("exact likelihood enumeration needs a tree rumor graph")
    if sub.n_nodes > cap:
        raise DomainError(f"enumeration limited to {cap} nodes, rumor graph has {sub.n_nodes}")
    deg = {u: g.degree(u) for u in sub.nodes}
    total = Fraction(0)
    for sigma in enumerate_permitted_permutations(sub, v, cap=cap):
        prod, nk = 1, deg[sigma[0]]
        for k in range(1, len(sigma)):
            if nk <= 0:
                raise DomainError(f"rumor boundary is empty after {k} infections")
            prod *= nk
            nk += deg[sigma[k]] - 2
        total += Fraction(1, prod)
    return total if exact else math.log(total)


def estimate_exact(g: Graph, infected, seed: int = 0, cap: int = ENUMERATION_CAP) -> EstimateResult:
    """Exact ML estimate by enumeration (tree rumor graphs up to ``cap`` nodes)."""
    sub, _ = _local(g, infected)
    lik = {v: exact_likelihood(g, sub.nodes, v, exact=True, cap=cap) for v in sub.nodes}
    top = max(lik.values())
    amax = frozenset(v for v, x in lik.items() if x == top)
    cs = CentralityScores({v: math.log(x) for v, x in lik.items()}, None, amax)
    return EstimateResult("exact-oracle", cs, cs.choose(seed), amax, seed)


def random_guess(infected, seed: int) -> int:
    """Uniformly random infected node."""
    nodes = sorted(infected.infected if isinstance(infected, RumorGraph) else infected)
    if not nodes:
        raise DomainError("random guess over an empty infected set")
    return nodes[int(make_generator(seed).integers(len(nodes)))]


def estimate_random(infected, seed: int) -> EstimateResult:
    nodes = sorted(infected.infected if isinstance(infected, RumorGraph) else infected)
    pick = random_guess(nodes, seed)
    amax = frozenset(nodes)
    cs = CentralityScores(dict.fromkeys(nodes, 0.0), None, amax)
    return EstimateResult("random", cs, pick, amax, seed)


def estimate(name: str, g: Graph, infected, seed: int = 0) -> EstimateResult:
    """Dispatch by estimator name."""
    if name == "random":
        return estimate_random(infected if isinstance(infected, RumorGraph) else list(infected), seed)
    if name == "exact-oracle":
        return estimate_exact(g, infected, seed)
    if name not in ESTIMATORS:
        raise DomainError(f"unknown estimator {name!r}; expected one of {', '.join(ESTIMATORS)}")
    return _estimate(name, g, infected, seed)
