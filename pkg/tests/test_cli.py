import csv
import io
import json

import pytest

from treecvrp.cli import COLUMNS, main
from treecvrp.instance import parse_solution, serialize_instance

from conftest import two_chain_instance


@pytest.fixture
def fixture_file(tmp_path):
    p = tmp_path / "two_chain.json"
    p.write_text(serialize_instance(two_chain_instance()))
    return p


def test_solve_and_verify(fixture_file, tmp_path, capsys):
    out = tmp_path / "sol.json"
    trace = tmp_path / "trace.jsonl"
    oplog = tmp_path / "ops.jsonl"
    assert main(["solve", str(fixture_file), "--out", str(out), "--trace", str(trace),
                 "--oplog", str(oplog)]) == 0
    doc = json.loads(out.read_text())
    assert doc["cost"] == 18 and doc["lower_bound"] == 16 and doc["certified"] is True
    rows = [json.loads(line) for line in trace.read_text().splitlines()]
    assert rows and {"strategy", "cost", "delta_lb", "margin"} <= set(rows[0])
    assert oplog.exists()
    assert main(["verify", str(fixture_file), str(out)]) == 0


def test_verify_rejects_bad_solution(fixture_file, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"tours": [{"a": 6}], "cost": 8, "lower_bound": 16}))
    assert main(["verify", str(fixture_file), str(bad)]) == 1


def test_malformed_input(tmp_path, capsys):
    p = tmp_path / "x.json"
    p.write_text("{nope")
    assert main(["solve", str(p)]) == 1
    assert "error" in capsys.readouterr().err


def test_lb(fixture_file, capsys):
    assert main(["lb", str(fixture_file)]) == 0
    assert capsys.readouterr().out.strip() == "16"


def test_gen_is_deterministic(capsys):
    main(["gen", "--seed", "1", "--n", "30"])
    first = capsys.readouterr().out
    main(["gen", "--seed", "1", "--n", "30"])
    assert capsys.readouterr().out == first
    main(["gen", "--n", "1"])
    assert json.loads(capsys.readouterr().out)["edges"] == []


def test_oracle_and_baseline(tmp_path, capsys):
    inst = two_chain_instance()
    small = tmp_path / "small.json"
    doc = json.loads(serialize_instance(inst))
    doc["capacity"], doc["demands"] = 2, {"a": 1, "b": 1, "c": 1}
    small.write_text(json.dumps(doc))
    assert main(["oracle", str(small)]) == 0
    out = capsys.readouterr()
    assert parse_solution(out.out).cost >= 8 and "oracle cost=" in out.err
    assert main(["baseline", str(small)]) == 0
    assert "baseline cost=" in capsys.readouterr().err
    assert main(["oracle", str(small), "--limit", "2"]) == 1


def test_batch_directory(tmp_path, capsys):
    for k in range(3):
        (tmp_path / f"i{k}.json").write_text(serialize_instance(two_chain_instance()))
    (tmp_path / "broken.json").write_text("[")
    assert main(["batch", str(tmp_path)]) == 1
    out = capsys.readouterr()
    rows = list(csv.DictReader(io.StringIO(out.out)))
    assert len(rows) == 4 and list(rows[0]) == COLUMNS
    good = [r for r in rows if r["status"] == "ok"]
    assert len(good) == 3 and all(r["ratio"] == "18/16" for r in good)
    assert "max_ratio=9/8" in out.err and "unreadable: broken.json" in out.err


def test_batch_generated_with_oracle(tmp_path, capsys):
    out = tmp_path / "rows.csv"
    argv = ["batch", "--gen", "30", "--seed", "5", "--n", "6", "--q", "3", "--max-demand", "2",
            "--with-oracle", "--out", str(out)]
    assert main(argv) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 30
    with_opt = [r for r in rows if r["oracle_cost"]]
    assert with_opt
    for r in with_opt:
        assert int(r["lb"]) <= int(r["oracle_cost"]) <= int(r["cost"])
    # same seed, same rows apart from timing
    assert main(argv[:-1] + [str(tmp_path / "again.csv")]) == 0
    strip = lambda p: [{k: v for k, v in r.items() if k != "wall_ms"} for r in csv.DictReader(p.open())]
    assert strip(out) == strip(tmp_path / "again.csv")


def test_batch_jobs(capsys):
    assert main(["batch", "--gen", "6", "--shape", "chain-stack", "--jobs", "2"]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 7
