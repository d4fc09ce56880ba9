import csv
import io
import json

import pytest

from satlab import cli
from satlab.generators import gen_clique, gen_subsets


def _run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def class_file(tmp_path):
    p = tmp_path / "ex15.json"
    p.write_text(json.dumps(gen_subsets(4, 2).to_json()))
    return p


def test_dims_csv(class_file, capsys):
    code, out, _ = _run(["dims", "--input", str(class_file)], capsys)
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert row["vc"] == "2" and row["ldim"] == "2" and row["functions"] == "6"


def test_dims_witness_json(class_file, capsys):
    code, out, _ = _run(["dims", "--input", str(class_file), "--format", "json", "--witness"], capsys)
    assert code == 0
    row = json.loads(out)[0]
    assert json.loads(row["mistake_tree"])["height"] == 2


def test_saturate_writes_trace(class_file, tmp_path, capsys):
    trace_path = tmp_path / "trace.json"
    code, out, _ = _run(["saturate", "--input", str(class_file), "--eps", "2/5", "--out", str(trace_path)], capsys)
    assert code == 0
    sizes = [int(r["size"]) for r in csv.DictReader(io.StringIO(out))]
    assert sizes == [6, 14, 16, 16]
    trace = json.loads(trace_path.read_text())
    assert trace["epsilon"] == "2/5" and trace["reached_fixpoint"]
    added = trace["levels"][1]["added"]
    assert len(added) == 8 and all(a["witness"] for a in added)


def test_saturate_graph(tmp_path, capsys):
    p = tmp_path / "clique.json"
    p.write_text(json.dumps(gen_clique(5).to_json()))
    code, out, _ = _run(["saturate", "--input", str(p), "--eps", "1/4"], capsys)
    assert code == 0
    assert [int(r["size"]) for r in csv.DictReader(io.StringIO(out))] == [5, 6, 6]


@pytest.mark.parametrize("argv", [
    ["saturate", "--input", "missing.json", "--eps", "1/3"],
    ["saturate", "--input", "{}", "--eps", "0.3"],
])
def test_input_errors_exit_2(argv, capsys, class_file):
    argv = [str(class_file) if a == "{}" else a for a in argv]
    code, _, err = _run(argv, capsys)
    assert code == 2 and "error" in err


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "--suite", "nonsense"])
    assert exc.value.code == 2


@pytest.mark.parametrize("suite", cli.SUITES)
def test_verify_suites_small(suite, capsys):
    code, out, err = _run(["verify", "--suite", suite, "--trials", "2", "--seed", "7"], capsys)
    assert code == 0, err
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and list(rows[0]) == cli.COLUMNS[suite]


def test_reports_deterministic_and_formats_agree(capsys):
    _, first, _ = _run(["verify", "--suite", "duality", "--trials", "3", "--seed", "5"], capsys)
    _, second, _ = _run(["verify", "--suite", "duality", "--trials", "3", "--seed", "5"], capsys)
    assert first == second
    _, as_json, _ = _run(["verify", "--suite", "duality", "--trials", "3", "--seed", "5", "--format", "json"], capsys)
    csv_rows = list(csv.DictReader(io.StringIO(first)))
    json_rows = json.loads(as_json)
    assert [{k: str(v) for k, v in r.items()} for r in json_rows] == csv_rows


def test_pool_keeps_trial_order():
    serial = cli.run_suite("backtrack", seed=3, trials=4, jobs=1)
    pooled = cli.run_suite("backtrack", seed=3, trials=4, jobs=2)
    assert serial == pooled


def test_violations_exit_1(monkeypatch, capsys):
    monkeypatch.setitem(cli.TRIALS, "regimes", lambda seed, i: [{"trial": i, "ok": False}])
    code, _, err = _run(["verify", "--suite", "regimes", "--trials", "1"], capsys)
    assert code == 1 and "1 violations" in err


def test_example_command(tmp_path, capsys):
    out_path = tmp_path / "hg.json"
    code, _, err = _run(["example", "--name", "halfgraph", "--out", str(out_path)], capsys)
    assert code == 0 and "1/6" in err
    assert len(json.loads(out_path.read_text())["vertices"]) == 16
