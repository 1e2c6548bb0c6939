import json

import pytest

from perfectcolor import is_proper, load_graph
from perfectcolor.cli import main

K3_COL = "c triangle\np edge 3 3\ne 1 2\ne 2 3\ne 1 3\n"
C5_EL = "1 2\n2 3\n3 4\n4 5\n5 1\n"


@pytest.fixture
def k3_path(tmp_path):
    p = tmp_path / "k3.col"
    p.write_text(K3_COL)
    return str(p)


@pytest.fixture
def c5_path(tmp_path):
    p = tmp_path / "c5.el"
    p.write_text(C5_EL)
    return str(p)


def _lines(capsys):
    out = capsys.readouterr().out
    return [json.loads(line) for line in out.strip().splitlines()]


def test_sample_basic(k3_path, capsys):
    assert main(["sample", "--graph", k3_path, "--k", "7", "--seed", "42"]) == 0
    rows = _lines(capsys)
    assert len(rows) == 1
    row = rows[0]
    assert row["k"] == 7 and row["n"] == 3 and row["seed"] == 42
    assert row["blocks_used"] >= 1
    assert "graph_hash" in row and "version" in row
    g = load_graph(K3_COL, "dimacs")
    assert is_proper(g, row["coloring"])


def test_sample_rerun_identical(k3_path, capsys):
    main(["sample", "--graph", k3_path, "--k", "7", "--seed", "42"])
    first = capsys.readouterr().out
    main(["sample", "--graph", k3_path, "--k", "7", "--seed", "42"])
    second = capsys.readouterr().out
    assert first == second


def test_sample_many_with_derived_seeds(k3_path, capsys):
    assert main(["sample", "--graph", k3_path, "--k", "7", "--seed", "1", "--n", "3"]) == 0
    rows = _lines(capsys)
    assert len(rows) == 3
    assert [r["sample_index"] for r in rows] == [0, 1, 2]
    assert len({r["sample_seed"] for r in rows}) == 3


def test_sample_jobs_do_not_change_output(k3_path, capsys):
    main(["sample", "--graph", k3_path, "--k", "7", "--seed", "5", "--n", "4", "--jobs", "1"])
    serial = capsys.readouterr().out
    main(["sample", "--graph", k3_path, "--k", "7", "--seed", "5", "--n", "4", "--jobs", "2"])
    parallel = capsys.readouterr().out
    assert serial == parallel


def test_sample_hex_seed(k3_path, capsys):
    main(["sample", "--graph", k3_path, "--k", "7", "--seed", "0x2A"])
    rows = _lines(capsys)
    assert rows[0]["seed"] == 42


def test_seed_echoed_when_missing(k3_path, capsys):
    assert main(["sample", "--graph", k3_path, "--k", "7"]) == 0
    err = capsys.readouterr().err
    assert "OS entropy seed" in err


def test_trace_emits_records(k3_path, capsys):
    main(["sample", "--graph", k3_path, "--k", "7", "--seed", "3", "--trace"])
    captured = capsys.readouterr()
    trace = [json.loads(x) for x in captured.err.strip().splitlines()
             if x.startswith("{")]
    assert trace, "expected trace records on stderr"
    assert {"step", "kind", "vertex", "list_sizes", "singletons"} <= set(trace[0])


def test_enumerate_c5(c5_path, capsys):
    assert main(["enumerate", "--graph", c5_path, "--k", "7", "--seed", "1"]) == 0
    rows = _lines(capsys)
    assert rows[0]["count"] == 7770


def test_instance_rejected_exit_code(k3_path, capsys):
    assert main(["sample", "--graph", k3_path, "--k", "6", "--seed", "1"]) == 2
    err = capsys.readouterr().err
    assert "k=6" in err and "3" in err


def test_missing_file_exit_code(capsys):
    assert main(["sample", "--graph", "/nonexistent.col", "--k", "7", "--seed", "1"]) == 2


def test_malformed_graph_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.col"
    p.write_text("p edge 2 1\ne 1 1\n")
    assert main(["sample", "--graph", str(p), "--k", "7", "--seed", "1"]) == 2
    assert "self-loop" in capsys.readouterr().err


def test_oracle_check(k3_path, capsys):
    assert main(["oracle-check", "--graph", k3_path, "--k", "7", "--seed", "11",
                 "--updates", "12"]) == 0
    rows = _lines(capsys)
    assert rows[0]["name"] == "exact-marginal-trace"
    assert rows[0]["pass"] is True
    assert rows[0]["triples"] > 0


def test_verify_small(k3_path, capsys, tmp_path):
    csv_path = tmp_path / "drift.csv"
    code = main(["verify", "--graph", k3_path, "--k", "7", "--seed", "8",
                 "--samples", "3000", "--trials", "40", "--jobs", "2",
                 "--drift-csv", str(csv_path)])
    rows = _lines(capsys)
    names = {r["name"] for r in rows}
    assert {"chi-square-uniformity", "single-block-phi-rate",
            "mean-blocks-used", "coalescence-drift"} <= names
    for r in rows:
        assert {"statistic", "threshold", "pass"} <= set(r)
    assert code == 0
    assert csv_path.read_text().startswith("x,count,mean_increment")


def test_bench_tiny(capsys):
    assert main(["bench", "--sizes", "24", "--degrees", "2", "--seeds-per-cell", "2",
                 "--seed", "4"]) == 0
    rows = _lines(capsys)
    assert all(r["name"] == "bench-cell" for r in rows)
    assert {r["k"] for r in rows} == {7, 8}
    assert all(r["median_wall_s"] >= 0 for r in rows)


def test_format_flag_and_sniffing(tmp_path, capsys):
    p = tmp_path / "tri.txt"
    p.write_text("1 2\n2 3\n3 1\n")
    assert main(["enumerate", "--graph", str(p), "--k", "7", "--seed", "1"]) == 0
    assert _lines(capsys)[0]["count"] == 210
    assert main(["enumerate", "--graph", str(p), "--format", "edgelist",
                 "--k", "7", "--seed", "1"]) == 0
