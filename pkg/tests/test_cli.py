import json
import subprocess
import sys
from pathlib import Path

import pytest

from lmcanon.cli import main
from lmcanon.linalg import matrix, matrix_from_json, matrix_to_json
from lmcanon.problems import problem_from_json

GOLDEN = Path(__file__).parent / "golden"


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", ["j4_j2", "j4x2_j2x3"])
def test_weyr_golden(name, capsys):
    code, out, _ = run(["weyr", GOLDEN / f"{name}.json"], capsys)
    assert code == 0
    assert out == (GOLDEN / f"weyr_{name}.out.json").read_text()


def test_weyr_golden_layout():
    data = json.loads((GOLDEN / "weyr_j4x2_j2x3.out.json").read_text())
    assert data["standard_partition"] == {"sizes": [2, 3, 2, 3, 2, 2], "classes": [0, 1, 0, 1, 0, 0]}
    assert data["characteristics"] == [[5, 5, 2, 2]]


def test_canon_golden(capsys):
    code, out, _ = run(["canon", GOLDEN / "pair_problem.json", GOLDEN / "pair_matrix.json", "--witness"], capsys)
    assert code == 0
    assert out == (GOLDEN / "canon_pair.out.json").read_text()
    data = json.loads(out)
    assert data["matrix"]["entries"] == json.loads((GOLDEN / "pair_matrix.json").read_text())["entries"]
    assert [b["kind"] for b in data["boxes"]].count("empty") == 2


def test_byte_determinism_across_processes():
    cmd = [sys.executable, "-m", "lmcanon", "canon", str(GOLDEN / "pair_problem.json"),
           str(GOLDEN / "pair_matrix.json"), "--trace", "--witness"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second and first


def test_equiv_and_decompose(tmp_path, capsys):
    code, out, _ = run(["problem", "new", "--kronecker"], capsys)
    assert code == 0
    problem = tmp_path / "kron.json"
    problem.write_text(out)
    a = matrix([[0, 0, 0, 0, 0, 0], [0, 0, 0, 0, 0, 0], [1, 2, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0],
                [2, 1, 0, 0, 0, 0], [0, 2, 0, 0, 0, 0]])
    s = matrix([[1, 1, 0, 0, 0, 0], [0, 2, 0, 0, 0, 0], [0, 0, 1, 0, 0, 0], [0, 0, 1, 1, 0, 0],
                [0, 0, 0, 0, 1, 0], [0, 0, 0, 0, 1, 1]])
    b = s.inverse() @ a @ s
    for name, m in (("a.json", a), ("b.json", b)):
        d = matrix_to_json(m)
        d["dims"] = [2, 2]
        (tmp_path / name).write_text(json.dumps(d))
    code, out, _ = run(["equiv", problem, tmp_path / "a.json", tmp_path / "b.json"], capsys)
    assert code == 0 and json.loads(out) == {"equivalent": True}
    code, out, _ = run(["decompose", problem, tmp_path / "a.json"], capsys)
    assert code == 0
    assert sum(s["multiplicity"] for s in json.loads(out)["summands"]) >= 1


def test_problem_new_round_trip(tmp_path, capsys):
    for flags in (["--simsim", 2], ["--upper-triangular", 3], ["--wasow", 3], ["--kronecker"]):
        code, out, _ = run(["problem", "new", *flags], capsys)
        assert code == 0
        spec = problem_from_json(json.loads(out))
        path = tmp_path / "p.json"
        path.write_text(out)
        code, again, _ = run(["problem", "new", "--spec", path], capsys)
        assert again == out and spec.to_json() == json.loads(out)
    quiver = tmp_path / "q.json"
    quiver.write_text(json.dumps({"vertices": ["1", "2"], "arrows": [["a", "1", "2"], ["b", "1", "2"]]}))
    code, out, _ = run(["problem", "new", "--quiver", quiver], capsys)
    assert code == 0 and json.loads(out)["source"] == "quiver"


def test_enumerate(tmp_path, capsys):
    code, out, _ = run(["problem", "new", "--kronecker", "--field", "F3"], capsys)
    problem = tmp_path / "kron.json"
    problem.write_text(out)
    code, out, _ = run(["enumerate", problem, "--dims", "1,1"], capsys)
    assert code == 0
    found = json.loads(out)
    assert len(found) == 5
    assert all(matrix_from_json(c["matrix"]).nrows == 3 for c in found)


def test_errors(tmp_path, capsys):
    rot = tmp_path / "rot.json"
    rot.write_text(json.dumps(matrix_to_json(matrix([[0, -1], [1, 0]]))))
    code, _, err = run(["weyr", rot], capsys)
    assert code == 1 and json.loads(err)["error"]["code"] == "FIELD_NOT_SPLITTING"
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(["weyr", bad], capsys)
    assert code == 1 and json.loads(err)["error"]["code"] == "PARSE"
    code, _, err = run(["weyr", tmp_path / "missing.json"], capsys)
    assert code == 1 and json.loads(err)["error"]["code"] == "PARSE"
    code, out, _ = run(["problem", "new", "--kronecker", "--field", "F2"], capsys)
    problem = tmp_path / "kron.json"
    problem.write_text(out)
    code, _, err = run(["enumerate", problem, "--dims", "3,3", "--budget", "10"], capsys)
    assert code == 1 and json.loads(err)["error"]["code"] == "BUDGET_EXCEEDED"
    with pytest.raises(SystemExit) as info:
        main(["canon"])
    assert info.value.code == 2
    assert json.loads(capsys.readouterr().err.splitlines()[-1])["error"]["code"] == "USAGE"
