import subprocess
import sys

import pytest

from rumorsource.cli import _config_path, main
from rumorsource.experiments import load_config
from rumorsource.graph import load_edge_list
from rumorsource.spread import read_trace_csv

from conftest import fixture_path


def run(argv, capsys):
    rc = main(argv)
    out, err = capsys.readouterr()
    return rc, out, err


def chosen(csv_text):
    rows = [r.split(",") for r in csv_text.splitlines() if r and not r.startswith("#")]
    assert rows[0] == ["estimator", "node", "log_score", "is_argmax", "chosen"]
    return [int(r[1]) for r in rows[1:] if r[4] == "1"]


def test_gen_deterministic_families(tmp_path, capsys):
    rc, out, _ = run(["gen", "--family", "line", "--n", "5"], capsys)
    assert rc == 0
    assert len([l for l in out.splitlines() if l and not l.startswith("#")]) == 4
    assert "seed=" not in out
    path = tmp_path / "t.edges"
    assert main(["gen", "--family", "regular-tree", "--d", "3", "--depth", "2", "--out", str(path)]) == 0
    g = load_edge_list(path)
    assert (g.n_nodes, g.n_edges) == (10, 9)


def test_gen_random_family_needs_seed_and_is_reproducible(capsys):
    rc, _, err = run(["gen", "--family", "small-world", "--n", "50", "--k", "4", "--p", "0.1"], capsys)
    assert rc == 2 and "--seed is required" in err
    argv = ["gen", "--family", "scale-free", "--n", "60", "--m", "2", "--seed", "5"]
    a = run(argv, capsys)[1]
    b = run(argv, capsys)[1]
    assert a == b and "# seed=5" in a


def test_simulate_then_estimate_round_trip(tmp_path, capsys):
    host = tmp_path / "host.edges"
    trace = tmp_path / "trace.csv"
    main(["gen", "--family", "regular-tree", "--d", "3", "--depth", "8", "--out", str(host)])
    assert main(["simulate", "--graph", str(host), "--source", "0", "--by-count", "25",
                 "--seed", "7", "--out", str(trace)]) == 0
    tr = read_trace_csv(trace)
    assert tr.source == 0 and len(tr.order) == 25
    sub = load_edge_list(tmp_path / "trace.infected.edges")
    assert sub.n_nodes == 25 and sub.is_tree()
    rc, out, _ = run(["estimate", "--graph", str(host), "--infected", str(trace), "--seed", "1"], capsys)
    assert rc == 0 and len(chosen(out)) == 1
    assert rc == 0 and out == run(["estimate", "--graph", str(host), "--infected", str(trace),
                                   "--seed", "1"], capsys)[1]


def test_simulate_by_time_is_reproducible(capsys):
    argv = ["simulate", "--family", "line", "--n", "201", "--source", "100", "--by-time", "5", "--seed", "3"]
    a = run(argv, capsys)[1]
    assert a == run(argv, capsys)[1]
    assert "by_time=5.0" in a


@pytest.mark.parametrize("est,want", [("rumor", 1), ("rumor-bfs", 1), ("distance", 1), ("exact-oracle", 1)])
def test_estimate_on_fixture_spider(est, want, capsys):
    rc, out, _ = run(["estimate", "--graph", fixture_path("spider.edges"),
                      "--infected", fixture_path("spider.infected"), "--estimator", est, "--seed", "0"], capsys)
    assert rc == 0 and chosen(out) == [want]


def test_estimate_on_fixture_fork(capsys):
    rc, out, _ = run(["estimate", "--graph", fixture_path("fork.edges"),
                      "--infected", fixture_path("fork.infected"), "--seed", "0"], capsys)
    assert rc == 0 and chosen(out) == [2]


def test_user_errors_exit_2(tmp_path, capsys):
    rc, _, err = run(["estimate", "--graph", fixture_path("spider.edges"),
                      "--infected", fixture_path("spider.infected")], capsys)
    assert rc == 2 and "--seed" in err
    rc, _, err = run(["simulate", "--family", "line", "--n", "5", "--source", "99",
                      "--by-count", "3", "--seed", "1"], capsys)
    assert rc == 2 and "error" in err
    bad = tmp_path / "bad.infected"
    bad.write_text("1\nx\n")
    rc, _, err = run(["estimate", "--graph", fixture_path("spider.edges"), "--infected", str(bad),
                      "--seed", "0"], capsys)
    assert rc == 2 and ":2" in err
    rc, _, err = run(["estimate", "--graph", str(tmp_path / "nope.edges"),
                      "--infected", str(bad), "--seed", "0"], capsys)
    assert rc == 2
    rc, _, err = run(["gen", "--graph", fixture_path("spider.edges"), "--family", "line"], capsys)
    assert rc == 2 and "exactly one" in err


def test_experiment_config_errors(tmp_path, capsys):
    cfg = tmp_path / "x.cfg"
    cfg.write_text("experiment=detection\nfamily=line\ntrials=5\nseed=1\n")
    rc, _, err = run(["experiment", str(cfg)], capsys)
    assert rc == 2 and "missing required key: sizes" in err
    cfg.write_text("experiment=detection\nthis line is wrong\n")
    rc, _, err = run(["experiment", str(cfg)], capsys)
    assert rc == 2 and "x.cfg:2" in err
    rc, _, err = run(["experiment", "no-such.cfg"], capsys)
    assert rc == 2 and "not found" in err


def test_experiment_bundled_config_with_seed_override(tmp_path, capsys):
    cfg = tmp_path / "small.cfg"
    cfg.write_text("experiment=detection\nfamily=regular-tree\nd=3\nsizes=10,20\ntrials=30\nseed=4\n")
    a = run(["experiment", str(cfg), "--seed", "9"], capsys)[1]
    assert "# seed=9" in a and a == run(["experiment", str(cfg), "--seed", "9", "--workers", "2"], capsys)[1]
    rc, _, err = run(["experiment", str(cfg), "--workers", "0"], capsys)
    assert rc == 2 and "must be >= 1" in err


@pytest.mark.parametrize("name,family", [("thm3.cfg", "regular-tree"), ("fig7-line.cfg", "line")])
def test_bundled_configs_resolve(name, family):
    cfg = load_config(_config_path(name))
    assert cfg["experiment"] == "detection" and cfg["family"] == family
    assert int(cfg["trials"]) == 10000 and int(cfg["seed"]) > 0


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "rumorsource.cli", "gen", "--family", "line", "--n", "3"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "0 1" in out.stdout
    out = subprocess.run([sys.executable, "-m", "rumorsource.cli", "bogus"], capture_output=True, text=True)
    assert out.returncode == 2
