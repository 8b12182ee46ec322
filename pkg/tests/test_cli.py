import json
import subprocess
import sys

import pytest

from kcycle import CyclePath, build_graph, parse_edge_list, verify_cycle, write_edge_list
from kcycle.cli import main, run_bench
from tests.conftest import cycle_graph, petersen
from tests.test_schedule import _expected_307


@pytest.fixture
def files(tmp_path):
    def put(name, G):
        path = tmp_path / name
        write_edge_list(G, path)
        return str(path)

    return put


def records(text):
    lines = [json.loads(x) for x in text.splitlines()]
    assert lines[0] == {"format": "kcycle-records", "version": 1, "command": lines[0]["command"]}
    return lines[1:]


def test_find_c5(files, capsys):
    path = files("c5.txt", cycle_graph(5))
    assert main(["find", path, "--k", "5", "--trials", "10000"]) == 0
    labels = [int(x) for x in capsys.readouterr().out.split()]
    assert sorted(labels) == [0, 1, 2, 3, 4]


def test_find_records(files, capsys):
    path = files("c5.txt", cycle_graph(5))
    assert main(["find", path, "--k", "5", "--trials", "10000", "--format", "records"]) == 0
    (rec,) = records(capsys.readouterr().out)
    assert rec["found"] and rec["trials_run"] == rec["trial"] + 1
    assert verify_cycle(cycle_graph(5), CyclePath(tuple(rec["cycle"])), 5)


def test_find_tree_not_found(files, capsys):
    path = files("tree.txt", build_graph(6, [(0, 1), (1, 2), (1, 3), (3, 4), (4, 5)]))
    assert main(["find", path, "--k", "4", "--trials", "500"]) == 1
    assert capsys.readouterr().out.strip() == "NOT-FOUND"


@pytest.mark.parametrize("text", ["3 x 0\n", "3 2\n0 1\n1 2\n", "3 1 0\n0 7\n"])
def test_malformed_input_exits_2(tmp_path, text, capsys):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    assert main(["find", str(path), "--k", "4"]) == 2
    assert "kcycle:" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path):
    assert main(["find", str(tmp_path / "nope.txt"), "--k", "4"]) == 2


def test_schedule(capsys):
    assert main(["schedule", "307"]) == 0
    assert capsys.readouterr().out.splitlines() == _expected_307()
    assert main(["schedule", "4"]) == 0
    assert capsys.readouterr().out.splitlines() == ["4 (4,0)", "3 (3,0)"]
    assert main(["schedule", "3"]) == 2


def test_schedule_records(capsys):
    assert main(["schedule", "5", "--format", "records"]) == 0
    recs = records(capsys.readouterr().out)
    assert [(r["t"], r["h"], r["r"]) for r in recs] == [(5, 4, 1), (4, 3, 1), (3, 3, 0)]


def test_oracle(files, capsys):
    path = files("petersen.txt", petersen())
    assert main(["oracle", path, "--k", "5"]) == 0
    labels = [int(x) for x in capsys.readouterr().out.split()]
    assert len(labels) == 5
    assert main(["oracle", path, "--k", "3"]) == 1
    big = files("big.txt", cycle_graph(1000))
    assert main(["oracle", big, "--k", "5"]) == 2
    assert "refuses" in capsys.readouterr().err


def test_env_overrides(files, capsys, monkeypatch):
    path = files("c4.txt", cycle_graph(4))
    monkeypatch.setenv("KCYCLE_K", "4")
    monkeypatch.setenv("KCYCLE_FORMAT", "records")
    monkeypatch.setenv("KCYCLE_SEED", "3")
    assert main(["find", path, "--trials", "5000"]) == 0
    (rec,) = records(capsys.readouterr().out)
    assert rec["k"] == 4
    # flags win over the environment
    assert main(["find", path, "--trials", "5000", "--format", "text", "--seed", "3"]) == 0
    assert sorted(int(x) for x in capsys.readouterr().out.split()) == [0, 1, 2, 3]
    monkeypatch.setenv("KCYCLE_SEED", "x")
    assert main(["find", path]) == 2


def test_directed_override(files, capsys):
    # a transitive triangle is a cycle only when read as undirected
    path = files("tri.txt", build_graph(3, [(0, 1), (1, 2), (0, 2)], directed=True))
    assert main(["find", path, "--k", "3"]) == 1
    assert main(["find", path, "--k", "3", "--undirected"]) == 0


def test_trace_dir(files, tmp_path, capsys):
    path = files("c4.txt", cycle_graph(4))
    out = tmp_path / "traces"
    assert main(["find", path, "--k", "4", "--trials", "5000", "--trace-dir", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert len(names) == 2 and names[0].endswith(".coins.json") and names[1].endswith(".trace")
    lines = (out / names[1]).read_text().splitlines()
    assert lines[0] == "# kcycle-trace v1 k=4 directed=0"
    assert lines[1].startswith("stage 1 4 4 0 4 4 contract")


def test_gen_command(tmp_path, capsys):
    out, wit = tmp_path / "g.txt", tmp_path / "g.witness"
    args = ["gen", "--n", "50", "--d", "2", "--planted-k", "7", "--seed", "4", "--out", str(out), "--witness", str(wit)]
    assert main(args) == 0
    G = parse_edge_list(out.read_text())
    w = CyclePath(tuple(int(x) for x in wit.read_text().split()))
    assert verify_cycle(G, w, 7)
    first = out.read_text()
    assert main(args) == 0 and out.read_text() == first
    assert main(["gen", "--n", "5", "--planted-k", "9", "--out", str(out)]) == 2


def test_bench_smoke_and_determinism(capsys):
    a = run_bench([400], k=4, d=3, trials=200, seed=2)
    b = run_bench([400], k=4, d=3, trials=200, seed=2)
    assert len(a.rows) == 1 and a.rows[0].trials == 200
    assert a.rows[0].successes == b.rows[0].successes
    assert a.ratios() == []
    assert main(["bench", "--n", "300", "600", "--k", "5", "--trials", "20", "--format", "records"]) == 0
    rows = records(capsys.readouterr().out)
    assert [r["n"] for r in rows] == [300, 600]
    assert all(len(r["stage_seconds"]) == 3 for r in rows)


def test_console_entry_point(files):
    path = files("c4.txt", cycle_graph(4))
    proc = subprocess.run([sys.executable, "-m", "kcycle", "find", path, "--k", "4", "--trials", "5000"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert sorted(int(x) for x in proc.stdout.split()) == [0, 1, 2, 3]
