"""Command-line frontend.

    rumorsource gen --family regular-tree --d 3 --depth 2 --out tree.edges
    rumorsource simulate --graph tree.edges --source 0 --by-count 20 --seed 7 --out trace.csv
    rumorsource estimate --graph tree.edges --infected trace.csv --estimator rumor --seed 7
    rumorsource experiment thm3.cfg --workers 4 --out thm3.csv

Exit codes: 0 success, 2 user error (bad input, bad config, domain errors),
3 internal failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from importlib import resources

from . import __version__
from .errors import ConfigError, DomainError, ParseError, RumorSourceError
from .estimators import ESTIMATORS, estimate
from .experiments import load_config, run_config
from .generators import build_graph, normalize_family
from .graph import Graph, format_edge_list, load_edge_list
from .spread import read_trace_csv, spread_by_count, spread_by_time

RANDOM_FAMILIES = ("geometric-tree", "small-world", "scale-free")
FAMILY_PARAMS = ("n", "d", "depth", "alpha", "b", "c", "d_star", "radius", "k", "p", "m")


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _family_params(args) -> dict:
    return {k: getattr(args, k) for k in FAMILY_PARAMS if getattr(args, k, None) is not None}


def _host(args) -> tuple[Graph, list[str]]:
    if (args.graph is None) == (args.family is None):
        raise ConfigError("give exactly one graph source: --graph PATH or --family NAME")
    if args.graph is not None:
        return load_edge_list(args.graph), [f"graph={args.graph}"]
    fam = normalize_family(args.family)
    if fam in RANDOM_FAMILIES and args.seed is None:
        raise ConfigError(f"--seed is required for the random family {fam}")
    params = _family_params(args)
    g = build_graph(fam, params, args.seed)
    return g, [f"family={fam}"] + [f"{k}={v}" for k, v in params.items()]


def _read_infected(path: str) -> list[int]:
    with open(path, encoding="utf-8") as fh:
        lines = list(enumerate(fh, start=1))
    body = [(i, s.strip()) for i, s in lines if s.strip() and not s.lstrip().startswith("#")]
    if body and body[0][1].replace(" ", "") == "step,node,time":
        return list(read_trace_csv(path).order)
    nodes = []
    for lineno, s in body:
        if not s.isdigit():
            raise ParseError(f"expected one node id per line, got {s!r}", lineno=lineno, path=path)
        nodes.append(int(s))
    if not nodes:
        raise ParseError("no infected nodes listed", path=path)
    return nodes


def cmd_gen(args) -> int:
    g, desc = _host(args)
    header = ["generated by rumorsource gen", *desc]
    if args.seed is not None:
        header.append(f"seed={args.seed}")
    header.append(f"nodes={g.n_nodes} edges={g.n_edges}")
    _emit(format_edge_list(g, header), args.out)
    return 0


def cmd_simulate(args) -> int:
    g, desc = _host(args)
    source = args.source if args.source is not None else g.nodes[0]
    if args.by_count is not None:
        trace, rg = spread_by_count(g, source, args.by_count, args.seed)
        mode = f"by_count={args.by_count}"
    else:
        trace, rg = spread_by_time(g, source, args.by_time, args.seed)
        mode = f"by_time={args.by_time}"
    header = ["generated by rumorsource simulate", *desc, f"source={trace.source}", mode,
              f"seed={args.seed}", f"touched_boundary={int(trace.touched_boundary)}"]
    _emit(trace.to_csv(header), args.out)
    infected_out = args.infected_out
    if infected_out is None and args.out not in (None, "-"):
        infected_out = os.path.splitext(args.out)[0] + ".infected.edges"
    if infected_out:
        _emit(format_edge_list(rg.subgraph, header), infected_out)
    return 0


def cmd_estimate(args) -> int:
    g = load_edge_list(args.graph)
    infected = _read_infected(args.infected)
    missing = [v for v in infected if v not in g]
    if missing:
        raise DomainError(f"infected node {missing[0]} is not in the host graph")
    res = estimate(args.estimator, g, infected, args.seed)
    header = [f"graph={args.graph}", f"infected={args.infected}", f"estimator={args.estimator}",
              f"seed={args.seed}", f"estimate={res.estimate}"]
    _emit(res.to_csv(header), args.out)
    return 0


def _config_path(name: str) -> str:
    if os.path.exists(name):
        return name
    bundled = resources.files("rumorsource") / "configs" / name
    if bundled.is_file():
        return str(bundled)
    raise ConfigError(f"config file not found: {name}")


def cmd_experiment(args) -> int:
    path = _config_path(args.config)
    cfg = load_config(path)
    if args.seed is not None:
        cfg["seed"] = str(args.seed)
    _emit(run_config(cfg, workers=args.workers), args.out)
    return 0


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _seed(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"seed must be >= 0, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rumorsource", description="Rumor-source inference under SI spreading.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def graph_args(sp, need_seed):
        sp.add_argument("--graph", help="host edge-list file")
        sp.add_argument("--family", help="generated host: line, regular-tree, geometric-tree, small-world, scale-free")
        for name, conv in (("n", int), ("d", int), ("depth", int), ("alpha", float), ("b", float),
                           ("c", float), ("d-star", int), ("radius", int), ("k", int), ("p", float), ("m", int)):
            sp.add_argument(f"--{name}", dest=name.replace("-", "_"), type=conv)
        sp.add_argument("--seed", type=_seed, required=need_seed)
        sp.add_argument("--out", help="output file (default: stdout)")

    g = sub.add_parser("gen", help="write a generated graph as an edge list")
    graph_args(g, need_seed=False)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("simulate", help="spread a rumor and write its trace")
    graph_args(s, need_seed=True)
    s.add_argument("--source", type=int)
    mode = s.add_mutually_exclusive_group(required=True)
    mode.add_argument("--by-count", type=_positive_int, metavar="N")
    mode.add_argument("--by-time", type=float, metavar="T")
    s.add_argument("--infected-out", help="edge list of the rumor graph (default: next to --out)")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("estimate", help="score the infected nodes and pick a source")
    e.add_argument("--graph", required=True)
    e.add_argument("--infected", required=True, help="trace CSV or one node id per line")
    e.add_argument("--estimator", choices=ESTIMATORS, default="rumor")
    e.add_argument("--seed", type=_seed, required=True, help="tie-breaking / random-guess seed")
    e.add_argument("--out")
    e.set_defaults(func=cmd_estimate)

    x = sub.add_parser("experiment", help="run a key=value experiment config")
    x.add_argument("config", help="config path or bundled name (thm3.cfg, fig7-line.cfg)")
    x.add_argument("--workers", type=_positive_int)
    x.add_argument("--seed", type=_seed, help="override the config's seed")
    x.add_argument("--out")
    x.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (RumorSourceError, OSError) as exc:
        print(f"rumorsource: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - anything else is a bug
        print(f"rumorsource: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
