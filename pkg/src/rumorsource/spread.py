"""SI rumor spreading with unit-rate exponential edge delays.

Two observation modes share one law: :func:`spread_by_count` runs the
embedded jump chain (next infection uniform over boundary *edges*) until
``n`` nodes are infected and stamps each step with an Exp(boundary size)
holding time; :func:`spread_by_time` runs the event-driven process with
per-edge clocks drawn when the tail node is infected, and reports the
infected set at time ``t``.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import DomainError, ParseError
from .graph import Graph, RumorGraph
from .rng import UniformStream, make_generator


@dataclass(frozen=True)
class SpreadTrace:
    source: int
    order: tuple[int, ...]
    times: tuple[float, ...]
    mode: tuple[str, float]
    parents: tuple[int, ...] = field(default=(), repr=False)
    boundary_sizes: tuple[int, ...] = field(default=(), repr=False)
    touched_boundary: bool = False

    @property
    def N(self) -> int:
        return len(self.order)

    def rumor_graph(self, host: Graph) -> RumorGraph:
        return RumorGraph(host, self.order, check=False)

    def to_csv(self, header=()) -> str:
        buf = io.StringIO()
        for h in header:
            buf.write(f"# {h}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "node", "time"])
        for k, (v, t) in enumerate(zip(self.order, self.times)):
            w.writerow([k, v, repr(float(t))])
        return buf.getvalue()

    def write_csv(self, path, header=()) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv(header))


def read_trace_csv(path) -> SpreadTrace:
    """Parse a trace written by :meth:`SpreadTrace.write_csv`."""
    order, times = [], []
    with open(path, encoding="utf-8") as fh:
        rows = [(i, line) for i, line in enumerate(fh, start=1)
                if line.strip() and not line.startswith("#")]
    if not rows or rows[0][1].strip().replace(" ", "") != "step,node,time":
        raise ParseError("missing header 'step,node,time'", lineno=rows[0][0] if rows else None,
                         path=os.fspath(path))
    for lineno, line in rows[1:]:
        parts = [p.strip() for p in line.split(",")]
        try:
            step, node, t = int(parts[0]), int(parts[1]), float(parts[2])
        except (ValueError, IndexError):
            raise ParseError(f"malformed trace row {line.rstrip()!r}", lineno=lineno,
                             path=os.fspath(path)) from None
        if step != len(order) or node < 0:
            raise ParseError(f"bad step/node in row {line.rstrip()!r}", lineno=lineno,
                             path=os.fspath(path))
        order.append(node)
        times.append(t)
    if not order:
        raise ParseError("trace has no rows", path=os.fspath(path))
    return SpreadTrace(order[0], tuple(order), tuple(times), ("by_count", len(order)))


@dataclass(frozen=True)
class Boundary:
    edges: tuple[tuple[int, int], ...]

    @property
    def size(self) -> int:
        return len(self.edges)


def boundary(g: Graph, infected) -> Boundary:
    """Host edges with exactly one infected endpoint, as (infected, uninfected)."""
    nodes = list(infected.infected if isinstance(infected, RumorGraph) else infected)
    if not nodes:
        raise DomainError("boundary of an empty infected set")
    pos = np.unique(g.positions(nodes))
    mask = np.zeros(g.n_nodes, dtype=bool)
    mask[pos] = True
    rows = np.repeat(np.arange(g.n_nodes), g.degrees)
    cut = mask[rows] & ~mask[g.indices]
    u = g.ids[rows[cut]].tolist()
    w = g.ids[g.indices[cut]].tolist()
    return Boundary(tuple(zip(u, w)))


def _source_pos(g: Graph, source) -> int:
    try:
        return g.index(source)
    except (KeyError, DomainError):
        raise DomainError(f"source {source!r} is not a node of the host graph") from None


def touched(g: Graph, pos: np.ndarray) -> bool:
    return g.truncated is not None and bool(g.truncated[pos].any())


def run_by_count(g: Graph, src: int, n: int, stream: UniformStream):
    """Kernel call on positions; raises when the component runs out."""
    order, times, parent, bsize, count = kernels.spread_count(g.indptr, g.indices, src, n, stream)
    if count < n:
        raise DomainError(f"only {count} nodes are reachable from the source; cannot infect {n}")
    return order, times, parent, bsize


def spread_by_count(g: Graph, source: int, n: int, seed: int) -> tuple[SpreadTrace, RumorGraph]:
    """Spread from ``source`` until exactly ``n`` nodes are infected."""
    if n < 1:
        raise DomainError(f"need n >= 1 infected nodes, got {n}")
    src = _source_pos(g, source)
    stream = UniformStream(make_generator(seed))
    order, times, parent, bsize = run_by_count(g, src, n, stream)
    ids = g.ids
    trace = SpreadTrace(
        source=int(ids[src]),
        order=tuple(ids[order].tolist()),
        times=tuple(times.tolist()),
        mode=("by_count", n),
        parents=tuple(ids[parent].tolist()),
        boundary_sizes=tuple(bsize.tolist()),
        touched_boundary=touched(g, order),
    )
    return trace, trace.rumor_graph(g)


def spread_by_time(g: Graph, source: int, t: float, seed: int) -> tuple[SpreadTrace, RumorGraph]:
    """Infected set at time ``t`` of SI spreading from ``source``."""
    if not t >= 0:
        raise DomainError(f"observation time must be >= 0, got {t}")
    src = _source_pos(g, source)
    stream = UniformStream(make_generator(seed))
    order, times, parent = kernels.spread_time(g.indptr, g.indices, src, float(t), stream)
    ids = g.ids
    trace = SpreadTrace(
        source=int(ids[src]),
        order=tuple(ids[order].tolist()),
        times=tuple(times.tolist()),
        mode=("by_time", float(t)),
        parents=tuple(ids[parent].tolist()),
        touched_boundary=touched(g, order),
    )
    return trace, trace.rumor_graph(g)


def is_permitted(g: Graph, order) -> bool:
    """Every node after the first has an earlier neighbour; no repeats."""
    seen = set()
    for k, v in enumerate(order):
        if v in seen:
            return False
        if k and not any(w in seen for w in g.neighbors(v)):
            return False
        seen.add(v)
    return True
