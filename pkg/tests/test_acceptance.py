"""Acceptance criteria, one test each, at the stated trial counts and tolerances.

Each test records a one-line verdict that is printed in the terminal summary.
"""

import math
import time
from collections import deque
from fractions import Fraction

import numpy as np
import pytest

from rumorsource import experiments as ex
from rumorsource.centrality import (
    distance_center,
    enumerate_permitted_permutations,
    rumor_centrality_all,
    rumor_centrality_exact,
    rumor_messages,
)
from rumorsource.estimators import estimate_exact, exact_likelihood, permutation_probability
from rumorsource.generators import GeometricTreeSpec, random_recursive_tree, regular_tree
from rumorsource.spread import spread_by_count

from conftest import ACCEPTANCE_LINES, random_tree_graph

pytestmark = pytest.mark.acceptance

GEO = {"alpha": 1, "b": 1, "c": 1, "d_star": 3}


def verdict(num, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_01_regular_tree_limit_quarter():
    t0 = time.perf_counter()
    c = ex.detection_probability("regular-tree", {"d": 3}, [400], trials=10_000, master_seed=20100)
    p = c.p_detect[0]
    verdict(1, 0.22 <= p <= 0.28,
            f"d=3 N=400 p={p:.4f} (se {c.stderr[0]:.4f}) in [0.22, 0.28], {time.perf_counter() - t0:.1f}s")


def test_02_line_series_and_root_n_decay():
    t0 = time.perf_counter()
    mc = ex.detection_probability_time("line", {}, [10.0], trials=100_000, master_seed=20102)
    exact = ex.line_exact_detection(10.0)
    gap = abs(mc.p_detect[0] - exact)
    series_ok = gap <= 3 * mc.stderr[0]
    c = ex.detection_probability("line", {}, [100, 400], trials=100_000, master_seed=20101)
    ratio = c.p_detect[0] / c.p_detect[1]
    ratio_ok = 1.4 <= ratio <= 2.6
    verdict(2, series_ok and ratio_ok,
            f"t=10 MC {mc.p_detect[0]:.4f} vs series {exact:.4f} (|gap| {gap:.4f} <= 3se {3 * mc.stderr[0]:.4f}); "
            f"p(100)/p(400)={ratio:.3f} in [1.4, 2.6], {time.perf_counter() - t0:.1f}s")


def test_03_regular_tree_half_bound():
    parts, ok = [], True
    for d in (3, 4, 5, 6):
        c = ex.detection_probability("regular-tree", {"d": d}, [400], trials=10_000, master_seed=20103 + d)
        p, se = c.p_detect[0], c.stderr[0]
        ok &= p <= 0.5 + 3 * se
        parts.append(f"d={d}:{p:.4f}")
    verdict(3, ok, "N=400 " + " ".join(parts) + " all <= 0.5 + 3se")


def test_04_geometric_tree_detects():
    t0 = time.perf_counter()
    c = ex.detection_probability_time("geometric-tree", GEO, [40.0], trials=1000, master_seed=20104)
    p = c.p_detect[0]
    verdict(4, p >= 0.9 and c.discarded == (0,),
            f"geometric (1,1,1,3) t=40 p={p:.4f} >= 0.9, {time.perf_counter() - t0:.1f}s")


def test_05_message_passing_equals_enumeration():
    rng = np.random.default_rng(20105)
    failures = checked = 0
    for _ in range(200):
        g = random_tree_graph(rng, int(rng.integers(1, 10)))
        msgs = rumor_messages(g).centrality
        for v in g.nodes:
            checked += 1
            if msgs[v] != len(enumerate_permitted_permutations(g, v)):
                failures += 1
    verdict(5, failures == 0, f"200 trees N<=9, {checked} roots, {failures} mismatches")


def test_06_ml_equals_rumor_center_on_regular_host():
    host = regular_tree(3, 8)
    rng = np.random.default_rng(20106)
    failures = 0
    for i in range(200):
        n = int(rng.integers(1, 9))
        _, rg = spread_by_count(host, 0, n, seed=1000 + i)
        ml = estimate_exact(host, rg.infected).argmax_set
        rc = rumor_centrality_all(rg.subgraph, mode="exact").argmax_set
        failures += ml != rc
    verdict(6, failures == 0, f"200 rumor trees N<=8 in a 3-regular host, {failures} argmax mismatches")


def test_07_fixture_equalities(spider, fork):
    g5, _ = fork
    r1 = rumor_centrality_exact(g5, 1)
    orderings = enumerate_permitted_permutations(g5, 1)
    g2, inf2 = spider
    q = Fraction(1, 4) ** 3
    bfs1 = rumor_centrality_exact(g2.subgraph(inf2), 1) * permutation_probability(g2, [1, 2, 3, 4, 5]).exact
    bfs2 = rumor_centrality_exact(g2.subgraph(inf2), 2) * permutation_probability(g2, [2, 1, 3, 4, 5]).exact
    lik1 = exact_likelihood(g2, inf2, 1, exact=True)
    lik2 = exact_likelihood(g2, inf2, 2, exact=True)
    ratio = Fraction(rumor_centrality_exact(g2.subgraph(inf2), 1), rumor_centrality_exact(g2.subgraph(inf2), 2))
    ok = (r1 == 8 and len(set(orderings)) == 8 and bfs1 == 6 * q == lik1 and bfs2 == 3 * q == lik2
          and ratio == 4)
    verdict(7, ok, f"R(1)={r1}, {len(orderings)} orderings; heuristic {bfs1}, {bfs2} = likelihoods {lik1}, {lik2}; "
                   f"R(1)/R(2)={ratio}")


def _branch_sizes(g):
    """Largest component left after deleting each node (independent BFS)."""
    adj = g.adjacency
    n = g.n_nodes
    root = g.nodes[0]
    parent = {root: None}
    order = []
    dq = deque([root])
    while dq:
        u = dq.popleft()
        order.append(u)
        for w in adj[u]:
            if w not in parent:
                parent[w] = u
                dq.append(w)
    size = dict.fromkeys(order, 1)
    for u in reversed(order):
        if parent[u] is not None:
            size[parent[u]] += size[u]
    biggest = {}
    for u in order:
        kids = [size[w] for w in adj[u] if parent.get(w) == u]
        biggest[u] = max(kids + [n - size[u]])
    return biggest


def test_08_center_property_suite():
    rng = np.random.default_rng(20108)
    problems = []
    for i in range(1000):
        g = random_tree_graph(rng, int(rng.integers(1, 201)))
        n = g.n_nodes
        exact = rumor_centrality_all(g, mode="exact")
        top = exact.argmax_set
        by_size = frozenset(v for v, b in _branch_sizes(g).items() if 2 * b <= n)
        log_top = rumor_centrality_all(g).argmax_set
        if not (top == by_size == log_top) or len(top) > 2:
            problems.append(f"tree {i}: argmax {sorted(top)} vs branch rule {sorted(by_size)}")
        elif len(top) == 1 and distance_center(g) != top:
            problems.append(f"tree {i}: unique rumor center {sorted(top)} vs distance center "
                            f"{sorted(distance_center(g))}")
    verdict(8, not problems, f"1000 trees N<=200, {len(problems)} violations" +
            (f" first: {problems[0]}" if problems else ""))


def test_09_subtree_size_geometric():
    rep = ex.subtree_distribution_check(3, 2.0, trials=100_000, seed=20109)
    verdict(9, rep["tv_distance"] < 0.01,
            f"d=3 t=2 TV={rep['tv_distance']:.4f} < 0.01 over {rep['samples']} subtrees "
            f"(chi2 p={rep['chi2_pvalue']:.3f}, mean {rep['mean']:.4f} vs {rep['expected_mean']:.4f})")


def test_10_shape_and_poisson_tail():
    base = GeometricTreeSpec(alpha=1, b=1, c=1, d_star=3, radius=1)
    spec = GeometricTreeSpec(alpha=1, b=1, c=1, d_star=3, radius=ex.geometric_radius(base, "time", 50.0))
    shape = ex.shape_check(spec, 50.0, 0.05, trials=1000, seed=20110)
    tail = ex.poisson_tail_check(100.0, 0.2, trials=10_000, seed=20111)
    ok = shape["pass_fraction"] >= 0.95 and tail["empirical_tail"] <= tail["bound"]
    verdict(10, ok, f"shape pass fraction {shape['pass_fraction']:.3f} (>= 0.95; inner {shape['inner_fraction']:.3f}, "
                    f"outer {shape['outer_fraction']:.3f}); Poisson tail {tail['empirical_tail']:.4f} "
                    f"<= {tail['bound']:.4f}")


def _per_node(n, repeats):
    g = random_recursive_tree(n, seed=20112)
    rumor_centrality_all(g)
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        rumor_centrality_all(g)
        best = min(best, time.perf_counter() - t0)
    return best / n


def test_11_linear_scaling():
    small = _per_node(1_000, 300)
    large = _per_node(1_000_000, 7)
    ratio = large / small
    verdict(11, ratio <= 2.0,
            f"per-node time {small * 1e9:.0f} ns (N=1e3) vs {large * 1e9:.0f} ns (N=1e6), ratio {ratio:.2f} <= 2")


def test_12_small_world_directional():
    h = ex.error_histogram("small-world", 400, ("rumor", "rumor-bfs", "distance"), trials=500,
                           master_seed=20112)
    rates = {e: h.detection_rate(e) for e in h.estimators}
    directional = rates["rumor"] > rates["distance"]
    dom = {e: h.dominance(e) for e in ("rumor", "rumor-bfs", "distance")}
    dominance = all(r["passed"] for r in dom.values())
    verdict(12, directional and dominance,
            "detection " + " ".join(f"{e}={r:.3f}" for e, r in rates.items())
            + f"; rumor > distance: {directional}; mean hop error "
            + " ".join(f"{e}={r['mean_error']:.2f}" for e, r in dom.items())
            + f" vs random {dom['rumor']['random_mean_error']:.2f}, all below at 3se: {dominance}")
