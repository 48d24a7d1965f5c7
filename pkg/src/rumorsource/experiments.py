"""Monte Carlo harness: detection curves, error histograms, distribution checks.

Every trial draws from its own stream keyed by (master seed, point, trial),
so a trial's outcome does not depend on the trial count or on which worker
ran it.  Results are aggregated in trial order and written as CSV.

Hosts
-----
``line`` and ``regular-tree`` by count run on the infinite d-regular tree
(an implicit host, see ``spread_count_regular``); every other combination
builds a finite host sized so that reaching its edge is a ~1e-4 event, and
trials that do reach it are discarded.  More than 1% discards aborts the run.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats

from ._backend import kernels
from .errors import ConfigError, DomainError, ExperimentAborted, ParseError
from .estimators import ESTIMATORS, argmax_local, score_local
from .generators import (
    GeometricTreeSpec,
    build_graph,
    geometric_spec_from,
    geometric_tree,
    normalize_family,
    regular_tree,
)
from .graph import Graph
from .rng import GUESS, HOST, SOURCE, SPREAD, TIEBREAK, UniformStream, derive_seed, make_generator

BOUNDARY_ABORT_FRACTION = 0.01
BOUNDARY_RISK = 1e-4
TIE_MODES = ("fractional", "sampled")


# -- records ----------------------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    family: str
    params: tuple
    n_infected: int
    true_source: int
    estimator: str
    estimate: int
    tie_size: int
    hop_error: int
    credit: float
    wall_time: float
    touched: bool = False


@dataclass(frozen=True)
class DetectionCurve:
    """One point per size (or time); ``trials`` counts valid trials."""

    family: str
    param: str
    x: tuple
    p_detect: tuple
    stderr: tuple
    trials: tuple
    discarded: tuple = ()
    master_seed: int = 0
    records: tuple = field(default=(), repr=False, compare=False)

    def rows(self):
        for x, p, s, n in zip(self.x, self.p_detect, self.stderr, self.trials):
            yield [self.family, self.param, x, repr(p), repr(s), n]

    def to_csv(self, header=()) -> str:
        return _csv(["family", "param", "x", "p_detect", "stderr", "trials"], self.rows(), header)


def _csv(columns, rows, header=()) -> str:
    buf = io.StringIO()
    for h in header:
        buf.write(f"# {h}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def report_csv(report: dict, header=()) -> str:
    rows = ([k, repr(v) if isinstance(v, float) else v] for k, v in report.items())
    return _csv(["key", "value"], rows, header)


def binomial_stderr(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n) if n else float("nan")


# -- host sizing --------------------------------------------------------------

def regular_depth_for_time(d: int, t: float, risk: float = BOUNDARY_RISK) -> int:
    """Smallest depth k whose level is reached by time ``t`` with expected
    count below ``risk`` (union bound over the d(d-1)^(k-1) paths)."""
    k = 1
    while True:
        paths = d * float(d - 1) ** (k - 1)
        if paths * stats.gamma.cdf(t, k) < risk:
            return k
        k += 1


def geometric_radius(spec: GeometricTreeSpec, mode: str, x: float, risk: float = BOUNDARY_RISK) -> int:
    """Radius for a geometric host.  By count: twice the radius of the
    smallest ball holding N nodes.  By time: at least 2t, and far enough that
    the expected number of infected nodes on the last level is below
    ``risk`` (union bound, at most d* c r^alpha nodes on level r)."""
    if mode == "count":
        r, total = 0, 1
        while total < x:
            r += 1
            total += spec.d_star * spec.level_bounds(r)[0]
        return 2 * r + 2
    k = 1
    while spec.d_star * spec.c * k ** spec.alpha * stats.gamma.cdf(x, k) >= risk:
        k += 1
    return max(math.ceil(2 * x) + 2, k)


@lru_cache(maxsize=8)
def _regular_host(d: int, depth: int) -> Graph:
    return regular_tree(d, depth)


@lru_cache(maxsize=4)
def _family_host(family: str, params: tuple, seed: int) -> Graph:
    return build_graph(family, dict(params), seed)


# -- one detection trial ----------------------------------------------------

@dataclass(frozen=True)
class _Job:
    family: str
    params: tuple
    mode: str
    x: float
    point: int
    estimator: str
    master_seed: int
    tie_mode: str
    depth: int = 0


def _tree_csr(pstep: np.ndarray):
    n = len(pstep)
    k = np.arange(1, n, dtype=np.int64)
    rows = np.concatenate([k, pstep[1:]])
    cols = np.concatenate([pstep[1:], k])
    o = np.lexsort((cols, rows))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return indptr, cols[o]


def _host_for(job: _Job, trial: int) -> tuple[Graph, int]:
    p = dict(job.params)
    if job.family in ("line", "regular-tree"):
        d = 2 if job.family == "line" else int(p["d"])
        return _regular_host(d, job.depth), 0
    if job.family == "geometric-tree":
        spec = geometric_spec_from({**p, "radius": job.depth})
        return geometric_tree(spec, derive_seed(job.master_seed, job.point, trial, HOST)), 0
    g = _family_host(job.family, job.params, derive_seed(job.master_seed, 0, HOST))
    src = int(make_generator(job.master_seed, job.point, trial, SOURCE).integers(g.n_nodes))
    return g, src


def _run_trial(job: _Job, trial: int) -> TrialRecord:
    t0 = time.perf_counter()
    stream = UniformStream(make_generator(job.master_seed, job.point, trial, SPREAD))
    touched = False
    tree_host = job.family in ("line", "regular-tree", "geometric-tree")
    if job.mode == "count" and job.family in ("line", "regular-tree"):
        d = 2 if job.family == "line" else int(dict(job.params)["d"])
        order, _, pstep, _ = kernels.spread_count_regular(d, int(job.x), stream)
        indptr, indices = _tree_csr(pstep)
        host_deg = np.full(len(order), d, dtype=np.int64)
        ids, src_local, host = order, 0, None
    else:
        host, src = _host_for(job, trial)
        if job.mode == "count":
            order, _, _, _, count = kernels.spread_count(host.indptr, host.indices, src, int(job.x), stream)
            if count < job.x:
                raise DomainError(f"host component has {count} nodes; cannot infect {int(job.x)}")
        else:
            order = kernels.spread_time(host.indptr, host.indices, src, float(job.x), stream)[0]
        touched = host.truncated is not None and bool(host.truncated[order].any())
        pos = np.sort(order)
        indptr, indices = host.induced_csr(pos)
        host_deg = host.degrees[pos]
        ids, src_local = host.ids[pos], int(np.searchsorted(pos, src))
    n = len(indptr) - 1
    name = job.estimator
    scores = score_local(name, indptr, indices, host_deg)
    sub = Graph(np.arange(n, dtype=np.int64), indptr, indices) if n <= 64 else None
    arg = argmax_local(name, scores, sub, host_deg)
    tie = len(arg)
    pick = int(arg[0]) if tie == 1 else int(arg[make_generator(job.master_seed, job.point, trial, TIEBREAK).integers(tie)])
    if job.tie_mode == "sampled":
        credit = float(pick == src_local)
    else:
        credit = 1.0 / tie if src_local in arg else 0.0
    if tree_host:
        hop = int(kernels.bfs_layers(indptr, indices, src_local)[2][pick])
    else:
        hop = int(kernels.bfs_layers(host.indptr, host.indices, src)[2][host.index(int(ids[pick]))])
    return TrialRecord(trial, job.family, job.params, n, int(ids[src_local]), name, int(ids[pick]),
                       tie, hop, credit, time.perf_counter() - t0, touched)


def _run_chunk(job: _Job, trials: list[int]) -> list[TrialRecord]:
    return [_run_trial(job, i) for i in trials]


def _map_trials(fn, job, trials: int, workers: int) -> list:
    ids = list(range(trials))
    if workers <= 1 or trials < 2 * workers:
        return fn(job, ids)
    chunks = [ids[k::workers] for k in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(fn, [job] * workers, chunks))
    out = [r for part in parts for r in part]
    out.sort(key=lambda r: r.trial_id)
    return out


# -- detection curves -------------------------------------------------------

def _params_tuple(params) -> tuple:
    return tuple(sorted((str(k), str(v)) for k, v in dict(params or {}).items()))


def _param_label(family: str, params: tuple) -> str:
    keep = {"regular-tree": ("d",), "geometric-tree": ("alpha", "b", "c", "d_star")}.get(family)
    items = [(k, v) for k, v in params if keep is None or k in keep]
    return ";".join(f"{k}={v}" for k, v in items)


def _depth_for(family: str, params: dict, mode: str, x: float) -> int:
    if family in ("line", "regular-tree"):
        if mode == "count":
            return 0
        d = 2 if family == "line" else int(params["d"])
        return regular_depth_for_time(d, x)
    if family == "geometric-tree":
        spec = geometric_spec_from({**params, "radius": 1})
        return geometric_radius(spec, mode, x)
    return 0


def _check_family(family, params) -> tuple[str, tuple]:
    fam = normalize_family(family)
    p = _params_tuple(params)
    d = dict(p)
    if fam == "regular-tree":
        if "d" not in d:
            raise ConfigError("missing required key: d")
        if int(d["d"]) < 2:
            raise DomainError(f"regular tree needs d >= 2, got {d['d']}")
    if fam == "geometric-tree":
        geometric_spec_from({**d, "radius": 1})
    return fam, p


def _curve(family, params, xs, mode, estimator, trials, master_seed, workers, tie_mode) -> DetectionCurve:
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if estimator not in ESTIMATORS or estimator == "exact-oracle":
        raise DomainError(f"estimator {estimator!r} is not available in detection experiments")
    if tie_mode not in TIE_MODES:
        raise DomainError(f"tie_mode must be one of {TIE_MODES}, got {tie_mode!r}")
    fam, p = _check_family(family, params)
    ps, ses, ns, disc, recs = [], [], [], [], []
    for point, x in enumerate(xs):
        if mode == "count" and (int(x) != x or x < 1):
            raise DomainError(f"infection counts must be positive integers, got {x}")
        if mode == "time" and not x >= 0:
            raise DomainError(f"observation times must be >= 0, got {x}")
        job = _Job(fam, p, mode, x, point, estimator, master_seed, tie_mode, _depth_for(fam, dict(p), mode, x))
        records = _map_trials(_run_chunk, job, trials, workers)
        bad = sum(r.touched for r in records)
        if bad > BOUNDARY_ABORT_FRACTION * trials:
            raise ExperimentAborted(
                f"{bad}/{trials} trials reached the host boundary at x={x} "
                f"({fam}, depth/radius {job.depth}); enlarge the host")
        good = [r for r in records if not r.touched]
        pd = float(np.mean([r.credit for r in good]))
        ps.append(pd)
        ses.append(binomial_stderr(pd, len(good)))
        ns.append(len(good))
        disc.append(bad)
        recs.extend(records)
    return DetectionCurve(fam, _param_label(fam, p), tuple(xs), tuple(ps), tuple(ses), tuple(ns),
                          tuple(disc), master_seed, tuple(recs))


def detection_probability(family, params, sizes, estimator="rumor", trials=10_000, master_seed=0,
                          workers=1, tie_mode="fractional") -> DetectionCurve:
    """Detection probability after spreading to each N in ``sizes``."""
    return _curve(family, params, list(sizes), "count", estimator, trials, master_seed, workers, tie_mode)


def detection_probability_time(family, params, times, estimator="rumor", trials=10_000, master_seed=0,
                               workers=1, tie_mode="fractional") -> DetectionCurve:
    """Detection probability when the rumor graph is observed at each time t."""
    return _curve(family, params, [float(t) for t in times], "time", estimator, trials, master_seed,
                  workers, tie_mode)


def line_exact_detection(t: float) -> float:
    """Exact detection probability on the line at time t with fractional tie
    credit: sum_k a_k (1 + t/(k+1)), a_k = (e^-t t^k / k!)^2."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if t == 0:
        return 1.0
    k = np.arange(0, int(t + 20 * math.sqrt(t) + 40))
    a = stats.poisson.pmf(k, t) ** 2
    return float(np.sum(a * (1.0 + t / (k + 1.0))))


# -- error histograms -------------------------------------------------------

@dataclass
class ErrorHistogram:
    estimators: tuple
    records: list
    random_expected: np.ndarray
    n_infected: int
    master_seed: int

    def errors(self, estimator: str) -> np.ndarray:
        return np.array([r.hop_error for r in self.records if r.estimator == estimator])

    def counts(self, estimator: str) -> dict[int, int]:
        vals, cnt = np.unique(self.errors(estimator), return_counts=True)
        return dict(zip(vals.tolist(), cnt.tolist()))

    def detection_rate(self, estimator: str) -> float:
        return float(np.mean([r.credit for r in self.records if r.estimator == estimator]))

    def mean_error(self, estimator: str) -> float:
        return float(self.errors(estimator).mean())

    def dominance(self, estimator: str) -> dict:
        """Paired test of mean hop error against the exact expected error of a
        uniform random guess; passes when the difference is below zero by
        more than three standard errors."""
        diff = self.errors(estimator) - self.random_expected
        se = float(diff.std(ddof=1) / math.sqrt(len(diff))) if len(diff) > 1 else float("inf")
        mean = float(diff.mean())
        return {"estimator": estimator, "mean_error": self.mean_error(estimator),
                "random_mean_error": float(self.random_expected.mean()),
                "diff": mean, "stderr": se, "passed": mean + 3 * se < 0}

    def rows(self):
        for est in self.estimators:
            for hop, c in sorted(self.counts(est).items()):
                yield [est, hop, c]

    def to_csv(self, header=()) -> str:
        return _csv(["estimator", "hop_error", "count"], self.rows(), header)


def _hist_trial(host: Graph, estimators, n_infected: int, master_seed: int, trial: int):
    src = int(make_generator(master_seed, 0, trial, SOURCE).integers(host.n_nodes))
    stream = UniformStream(make_generator(master_seed, 0, trial, SPREAD))
    order, _, _, _, count = kernels.spread_count(host.indptr, host.indices, src, n_infected, stream)
    if count < n_infected:
        raise DomainError(f"host component has {count} nodes; cannot infect {n_infected}")
    pos = np.sort(order)
    indptr, indices = host.induced_csr(pos)
    host_deg = host.degrees[pos]
    src_local = int(np.searchsorted(pos, src))
    dist = kernels.bfs_layers(host.indptr, host.indices, src)[2][pos]
    sub = Graph(np.arange(len(pos), dtype=np.int64), indptr, indices) if len(pos) <= 64 else None
    out = []
    for name in estimators:
        t0 = time.perf_counter()
        if name == "random":
            pick = int(make_generator(master_seed, 0, trial, GUESS).integers(len(pos)))
            tie, credit = 1, float(pick == src_local)
        else:
            scores = score_local(name, indptr, indices, host_deg)
            arg = argmax_local(name, scores, sub, host_deg)
            tie = len(arg)
            pick = int(arg[0]) if tie == 1 else int(arg[make_generator(master_seed, 0, trial, TIEBREAK).integers(tie)])
            credit = 1.0 / tie if src_local in arg else 0.0
        out.append(TrialRecord(trial, "", (), len(pos), int(host.ids[src]), name, int(host.ids[pos[pick]]),
                               tie, int(dist[pick]), credit, time.perf_counter() - t0))
    return out, float(dist.mean())


def _hist_chunk(job, trials):
    host, estimators, n_infected, master_seed = job
    return [(i, *_hist_trial(host, estimators, n_infected, master_seed, i)) for i in trials]


def error_histogram(host, n_infected: int, estimators=("rumor", "rumor-bfs", "distance"), trials: int = 500,
                    master_seed: int = 0, workers: int = 1, params=None) -> ErrorHistogram:
    """Hop-error histograms of each estimator plus a uniform random guess.

    ``host`` is a :class:`Graph` or a family name (built once from
    ``params``).  Each trial picks a uniformly random source, spreads to
    ``n_infected`` nodes and scores every estimator on the same rumor graph.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if not isinstance(host, Graph):
        fam = normalize_family(host)
        host = build_graph(fam, params or {}, derive_seed(master_seed, 0, HOST))
    if host.n_nodes < n_infected:
        raise DomainError(f"host has {host.n_nodes} nodes; cannot infect {n_infected}")
    ests = tuple(e for e in estimators if e != "random")
    for e in ests:
        if e not in ESTIMATORS or e == "exact-oracle":
            raise DomainError(f"estimator {e!r} is not available in histograms")
    ests = ests + ("random",)
    rows = _map_trials(_hist_chunk, (host, ests, n_infected, master_seed), trials, workers)
    rows.sort(key=lambda r: r[0])
    records = [rec for _, recs, _ in rows for rec in recs]
    expected = np.array([m for _, _, m in rows])
    return ErrorHistogram(ests, records, expected, n_infected, master_seed)


# -- distribution and concentration checks ----------------------------------

def _subtree_labels(g: Graph) -> np.ndarray:
    order, parent, _ = kernels.bfs_layers(g.indptr, g.indices, 0)
    label = np.zeros(g.n_nodes, dtype=np.int64)
    par = parent.tolist()
    lab = label.tolist()
    for u in order.tolist()[1:]:
        p = par[u]
        lab[u] = u if p == 0 else lab[p]
    return np.asarray(lab, dtype=np.int64)


def subtree_distribution_check(d: int = 3, t: float = 2.0, trials: int = 100_000, seed: int = 0,
                               pool: bool = True) -> dict:
    """Infected count of a root subtree at time t against Geometric(e^-t).

    With ``pool`` every one of the d root subtrees of a trial contributes a
    sample (they are i.i.d.); otherwise only the first does.
    """
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    if d < 3:
        raise DomainError(f"subtree check needs d >= 3, got {d}")
    depth = regular_depth_for_time(d, t)
    g = _regular_host(d, depth)
    label = _subtree_labels(g)
    samples, bad = [], 0
    for i in range(trials):
        stream = UniformStream(make_generator(seed, 0, i, SPREAD))
        order = kernels.spread_time(g.indptr, g.indices, 0, float(t), stream)[0]
        if g.truncated[order].any():
            bad += 1
            continue
        cnt = np.bincount(label[order[1:]], minlength=d + 1)[1:d + 1]
        samples.append(cnt if pool else cnt[:1])
    if bad > BOUNDARY_ABORT_FRACTION * trials:
        raise ExperimentAborted(f"{bad}/{trials} trials reached depth {depth}")
    x = np.concatenate(samples) if samples else np.zeros(0, dtype=np.int64)
    p = math.exp(-t)
    top = int(x.max()) if len(x) else 0
    emp = np.bincount(x, minlength=top + 1) / len(x)
    k = np.arange(top + 1)
    pmf = p * (1 - p) ** k
    tv = 0.5 * (np.abs(emp - pmf).sum() + (1 - p) ** (top + 1))
    # chi-square on bins with expected count >= 5, tail lumped
    expected = pmf * len(x)
    kmax = int(np.flatnonzero(expected >= 5).max()) if (expected >= 5).any() else 0
    obs = np.append(np.bincount(x, minlength=top + 1)[:kmax + 1], (x > kmax).sum())
    exp = np.append(expected[:kmax + 1], len(x) * (1 - p) ** (kmax + 1))
    chi2, pval = stats.chisquare(obs, exp)
    return {"d": d, "t": float(t), "p": p, "samples": int(len(x)), "trials": trials, "discarded": bad,
            "host_depth": depth, "mean": float(x.mean()), "expected_mean": (1 - p) / p,
            "tv_distance": float(tv), "chi2": float(chi2), "chi2_dof": int(len(obs) - 1),
            "chi2_pvalue": float(pval)}


def shape_check(spec: GeometricTreeSpec, t: float, delta: float, trials: int = 1000, seed: int = 0) -> dict:
    """Fraction of runs where, at time t, every node within t(1-eps) of the
    source is infected and no infected node lies beyond t(1+eps),
    with eps = t^(-1/2 + delta)."""
    if not 0 < delta < 0.1:
        raise DomainError(f"delta must lie in (0, 0.1), got {delta}")
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    eps = t ** (-0.5 + delta)
    if not spec.radius > t * (1 + eps):
        raise DomainError(f"host radius {spec.radius} must exceed t(1+eps) = {t * (1 + eps):.3f}")
    inner_ok = outer_ok = both = 0
    for i in range(trials):
        g = geometric_tree(spec, derive_seed(seed, 0, i, HOST))
        dist = kernels.bfs_layers(g.indptr, g.indices, 0)[2]
        stream = UniformStream(make_generator(seed, 0, i, SPREAD))
        order = kernels.spread_time(g.indptr, g.indices, 0, float(t), stream)[0]
        mask = np.zeros(g.n_nodes, dtype=bool)
        mask[order] = True
        a = bool(mask[dist <= t * (1 - eps)].all())
        b = bool((dist[order] <= t * (1 + eps)).all())
        inner_ok += a
        outer_ok += b
        both += a and b
    frac = both / trials
    return {"t": float(t), "delta": float(delta), "eps": eps, "trials": trials,
            "inner_fraction": inner_ok / trials, "outer_fraction": outer_ok / trials,
            "pass_fraction": frac, "stderr": binomial_stderr(frac, trials)}


def poisson_tail_check(t: float = 100.0, gamma: float = 0.2, trials: int = 10_000, seed: int = 0) -> dict:
    """Empirical P(|N(t) - t| >= gamma t) for the unit-rate arrival process
    along one ray of the line, against the bound 2 exp(-t gamma^2 / 4)."""
    if not t > 0 or not gamma > 0:
        raise DomainError("t and gamma must be > 0")
    depth = regular_depth_for_time(2, t)
    g = _regular_host(2, depth)
    # odd ids lie on one ray of the path numbering
    hits, n, bad = 0, 0, 0
    for i in range(trials):
        stream = UniformStream(make_generator(seed, 0, i, SPREAD))
        order = kernels.spread_time(g.indptr, g.indices, 0, float(t), stream)[0]
        if g.truncated[order].any():
            bad += 1
            continue
        right = int(np.count_nonzero(order % 2 == 1))
        left = len(order) - 1 - right
        for c in (right, left):
            hits += abs(c - t) >= gamma * t
            n += 1
    emp = hits / n
    bound = 2 * math.exp(-t * gamma ** 2 / 4)
    return {"t": float(t), "gamma": float(gamma), "samples": n, "discarded": bad,
            "empirical_tail": emp, "stderr": binomial_stderr(emp, n),
            "poisson_tail": float(stats.poisson.cdf(math.ceil(t - gamma * t) - 1e-9, t)
                                  + stats.poisson.sf(math.ceil(t + gamma * t) - 1, t)),
            "bound": bound, "passed": emp <= bound}


# -- key=value configs --------------------------------------------------------

EXPERIMENTS = ("detection", "detection-time", "histogram", "subtree", "shape", "poisson")
_REQUIRED = {
    "detection": ("family", "sizes", "trials", "seed"),
    "detection-time": ("family", "times", "trials", "seed"),
    "histogram": ("family", "n_infected", "trials", "seed"),
    "subtree": ("t", "trials", "seed"),
    "shape": ("alpha", "b", "c", "d_star", "radius", "t", "delta", "trials", "seed"),
    "poisson": ("t", "gamma", "trials", "seed"),
}
_RUN_KEYS = {"experiment", "family", "sizes", "times", "estimator", "estimators", "trials", "seed",
             "workers", "tie_mode", "n_infected", "t", "delta", "gamma", "out"}


def parse_config(text: str, path=None) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    cfg, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected key = value, got {raw.strip()!r}", lineno=lineno, path=path)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ParseError("empty key", lineno=lineno, path=path)
        if key in cfg:
            raise ParseError(f"duplicate key {key!r} (first set on line {lines[key]})", lineno=lineno, path=path)
        cfg[key], lines[key] = value, lineno
    cfg["__lines__"] = lines
    return cfg


def load_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), path=str(path))


def _conf(cfg: dict, key: str, conv, default=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing required key: {key}")
        return default
    try:
        return conv(cfg[key])
    except ValueError:
        line = cfg.get("__lines__", {}).get(key)
        at = f" (line {line})" if line else ""
        raise ConfigError(f"bad value for {key}{at}: {cfg[key]!r}") from None


def _num_list(s: str) -> list:
    return [float(v) if any(c in v for c in ".eE") else int(v) for v in (x.strip() for x in s.split(",")) if v]


def run_config(cfg: dict, workers: int | None = None) -> str:
    """Run the experiment a parsed config describes and return its CSV text."""
    kind = _conf(cfg, "experiment", str)
    if kind not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {kind!r}; expected one of {', '.join(EXPERIMENTS)}")
    for key in _REQUIRED[kind]:
        _conf(cfg, key, str)
    seed = _conf(cfg, "seed", int)
    trials = _conf(cfg, "trials", int)
    nworkers = workers if workers is not None else _conf(cfg, "workers", int, 1)
    params = {k: v for k, v in cfg.items() if k not in _RUN_KEYS and not k.startswith("__")}
    header = [f"experiment={kind}", f"seed={seed}"] + [
        f"{k}={v}" for k, v in cfg.items() if not k.startswith("__") and k not in ("experiment", "seed")]
    if kind in ("detection", "detection-time"):
        fn = detection_probability if kind == "detection" else detection_probability_time
        xs = _conf(cfg, "sizes" if kind == "detection" else "times", _num_list)
        curve = fn(cfg["family"], params, xs, _conf(cfg, "estimator", str, "rumor"), trials, seed,
                   nworkers, _conf(cfg, "tie_mode", str, "fractional"))
        return curve.to_csv(header)
    if kind == "histogram":
        ests = [e.strip() for e in _conf(cfg, "estimators", str, "rumor,rumor-bfs,distance").split(",")]
        hist = error_histogram(cfg["family"], _conf(cfg, "n_infected", int), ests, trials, seed, nworkers, params)
        return hist.to_csv(header)
    if kind == "subtree":
        rep = subtree_distribution_check(int(params.get("d", 3)), _conf(cfg, "t", float), trials, seed)
    elif kind == "shape":
        spec = geometric_spec_from(params)
        rep = shape_check(spec, _conf(cfg, "t", float), _conf(cfg, "delta", float), trials, seed)
    else:
        rep = poisson_tail_check(_conf(cfg, "t", float), _conf(cfg, "gamma", float), trials, seed)
    return report_csv(rep, header)
