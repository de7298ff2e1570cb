import json
import subprocess
import sys

import pytest

from localsim.bench import COLUMNS, ExperimentConfig, read_csv, run_sweep, to_csv, trial_seed
from localsim.cli import main
from localsim.engine import run_function_mode, run_message_mode
from localsim.graph import Graph, cycle, random_bounded_degree
from localsim.lll import sinkless_to_lll
from localsim.registry import ALGORITHMS, DUAL, run_algorithm
from localsim.round_elim import dsatur_table, constant_table, identity_table


def _gen(tmp_path, *args):
    out = tmp_path / "g.txt"
    assert main(["gen", *args, "--out", str(out)]) == 0
    return out


def test_gen_cycle_file(tmp_path):
    f = _gen(tmp_path, "cycle", "--n", "100")
    g = Graph.from_text(f.read_text())
    assert g.n == 100 and g.m == 100
    assert Graph.from_text(g.to_text()).to_text() == g.to_text()


def test_gen_regular_degree_audit(tmp_path, capsys):
    assert main(["gen", "random_regular", "--n", "40", "--delta", "3", "--seed", "5"]) == 0
    g = Graph.from_text(capsys.readouterr().out)
    assert all(g.degree(u) == 3 for u in range(40))


def test_gen_missing_param(capsys):
    assert main(["gen", "random_regular", "--n", "10"]) == 2


def test_run_linial_and_determinism(tmp_path, capsys):
    f = _gen(tmp_path, "cycle", "--n", "64")
    assert main(["run", "linial", str(f), "--json", "--seed", "3"]) == 0
    a = capsys.readouterr().out
    assert json.loads(a)["valid"] is True
    assert main(["run", "linial", str(f), "--json", "--seed", "3"]) == 0
    assert capsys.readouterr().out == a


def test_run_unknown_algorithm(tmp_path, capsys):
    f = _gen(tmp_path, "cycle", "--n", "8")
    assert main(["run", "nope", str(f)]) == 2
    assert "unknown algorithm" in capsys.readouterr().err


def test_missing_file():
    assert main(["run", "linial", "/nonexistent/graph.txt"]) == 2


def test_check_valid_and_invalid(tmp_path, capsys):
    f = _gen(tmp_path, "cycle", "--n", "4")
    good = tmp_path / "good.json"
    good.write_text(json.dumps([1, 2, 1, 2]))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"labels": [1, 1, 2, 2]}))
    assert main(["check", "proper_coloring", str(f), str(good), "--param", "k=2"]) == 0
    assert main(["check", "proper_coloring", str(f), str(bad), "--param", "k=2", "--json"]) == 1
    rep = json.loads(capsys.readouterr().out.splitlines()[-1])
    assert rep["valid"] is False and len(rep["violations"]) == 4
    assert main(["check", "proper_coloring", str(f), str(bad), "--param", "k=2", "--allow-invalid"]) == 0
    assert main(["check", "nope", str(f), str(good)]) == 2
    assert main(["check", "proper_coloring", str(f), str(good), "--param", "k=1"]) == 2


def test_decompose(tmp_path, capsys):
    f = _gen(tmp_path, "random_regular", "--n", "60", "--delta", "3")
    for method in ("ballcarve", "distdecomp", "mpx"):
        assert main(["decompose", method, str(f), "--json"]) == 0
        d = json.loads(capsys.readouterr().out)
        assert d["valid"] and len(d["color"]) == 60


def test_lll_sinkless_and_instance(tmp_path, capsys):
    f = _gen(tmp_path, "branching_tree", "--delta", "10", "--layers", "3")
    for m in ("fg", "mt"):
        assert main(["lll", str(f), "--sinkless", "--method", m, "--json"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["valid"] and out["violated"] == 0 and out["relaxed"] is True
    inst = tmp_path / "inst.json"
    inst.write_text(sinkless_to_lll(Graph.from_text(f.read_text())).instance.to_json())
    assert main(["lll", str(inst), "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["violated"] == 0
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["lll", str(bad)]) == 2


def test_roundelim(tmp_path, capsys):
    t = tmp_path / "t.json"
    t.write_text(dsatur_table("node", 1, 4, 3).to_json())
    out = tmp_path / "o.json"
    assert main(["roundelim", str(t), "--steps", "2", "--out-table", str(out), "--json"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["valid"] and [c["k"] for c in d["chain"]] == ["3", "8", "256"]
    assert json.loads(out.read_text())["kind"] == "node"
    t.write_text(constant_table("node", 1, 4).to_json())
    assert main(["roundelim", str(t), "--json"]) == 1
    assert json.loads(capsys.readouterr().out)["witness"] is not None
    t.write_text(identity_table("node", 0, 4).to_json())
    assert main(["roundelim", str(t), "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["zero_round"] == "injective"
    t.write_text(dsatur_table("node", 2, 3, 3).to_json())
    assert main(["roundelim", str(t), "--steps", "4"]) == 2


def test_module_entry_point(tmp_path):
    f = _gen(tmp_path, "cycle", "--n", "12")
    r = subprocess.run([sys.executable, "-m", "localsim", "run", "cole_vishkin", str(f)], capture_output=True,
                       text=True)
    assert r.returncode == 0 and "valid=True" in r.stdout


def test_bench_shape_and_determinism(tmp_path, capsys, monkeypatch):
    args = ["bench", "--alg", "linial", "--family", "cycle", "--sizes", "16,64,256", "--trials", "3", "--seed", "1"]
    monkeypatch.setenv("LOCALSIM_THREADS", "1")
    assert main(args) == 0
    one = capsys.readouterr().out
    assert one.startswith("# localsim-bench schema v1\n")
    rows = read_csv(one)
    assert len(rows) == 9 and list(rows[0]) == COLUMNS
    assert all(r["valid"] == "true" and r["wall_ms"] == "" for r in rows)
    med = {}
    for r in rows:
        med.setdefault(int(r["n"]), []).append(int(r["rounds"]))
    ms = [sorted(v)[1] for _, v in sorted(med.items())]
    assert ms == sorted(ms)
    monkeypatch.setenv("LOCALSIM_THREADS", "2")
    assert main(args) == 0
    assert capsys.readouterr().out == one


def test_bench_config_and_timing(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(ExperimentConfig("ballcarve", "random_regular", [32], 2, 0, 3).to_dict()))
    assert main(["bench", "--config", str(cfg), "--timing"]) == 0
    rows = read_csv(capsys.readouterr().out)
    assert all(r["wall_ms"] != "" for r in rows)
    assert main(["bench", "--alg", "linial"]) == 2
    assert main(["bench", "--alg", "nope", "--family", "cycle", "--sizes", "8"]) == 2


def test_trial_seeds_distinct():
    seeds = {trial_seed(0, n, t) for n in (8, 16) for t in range(10)}
    assert len(seeds) == 20
    rows = run_sweep(ExperimentConfig("luby", "random_regular", [20], 2, 7, 3))
    assert to_csv(rows) == to_csv(run_sweep(ExperimentConfig("luby", "random_regular", [20], 2, 7, 3)))


@pytest.mark.parametrize("name", sorted(ALGORITHMS))
def test_every_registered_algorithm_runs(name):
    g = cycle(12)
    if name == "lll:sinkless" or name == "lll:sinkless_mt":
        from localsim.graph import branching_tree
        g = branching_tree(10, layers=3)
    res = run_algorithm(name, g, seed=2)
    assert res.valid is True


@pytest.mark.parametrize("name", sorted(DUAL))
def test_dual_views_agree(name):
    entry = DUAL[name]
    for s in range(3):
        g = cycle(10 + s) if entry.graphs == "cycle" else random_bounded_degree(15 + s, 4, seed=s)
        f, p, labels = entry.build(g, s)
        assert run_function_mode(f, g, labels=labels).labels == run_message_mode(p, g, labels=labels).labels
