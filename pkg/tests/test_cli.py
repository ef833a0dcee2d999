import json
import shutil
import subprocess

import pytest

from khlambda.cli import EXIT_BUDGET, EXIT_INVARIANT, EXIT_OK, EXIT_USAGE, main
from khlambda.diagram import table_lookup
from khlambda.homology import InvariantViolation

TREFOIL_PD = table_lookup("3_1").to_pd()


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_kh_on_a_pd_file(tmp_path, capsys):
    p = tmp_path / "trefoil.pd"
    p.write_text(TREFOIL_PD)
    code, out, _ = run(capsys, "kh", "--pd", str(p))
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["free_rank"] == 2 and data["name"] == "trefoil"
    assert "mirror" in data["convention"]


def test_kh_csv(capsys):
    code, out, _ = run(capsys, "kh", "--pd", "PD[Loop[1]]", "--format", "csv")
    assert code == EXIT_OK
    assert out.splitlines() == ["h,q,free,torsion", "0,-1,1,", "0,1,1,"]


def test_s_table_csv(tmp_path, capsys):
    p = tmp_path / "knots.csv"
    p.write_text(f'name,pd\nunknot,PD[Loop[1]]\ntrefoil,"{TREFOIL_PD}"\n')
    code, out, _ = run(capsys, "s", "--table", str(p), "--format", "csv")
    assert code == EXIT_OK
    assert out.splitlines() == ["name,s", "unknot,0", "trefoil,2"]


def test_s_json_single(capsys):
    code, out, _ = run(capsys, "s", "--knot", "left-trefoil")
    assert code == EXIT_OK
    assert json.loads(out)["s"] == -2


def test_movie_report(capsys):
    code, out, _ = run(capsys, "movie", "--movie", "trefoil_seifert")
    assert code == EXIT_OK
    data = json.loads(out)
    assert (data["s"], data["genus"], data["parity"], data["m_plus"], data["m_minus"]) == (2, 1, "odd", 0, 0)


def test_movie_file(tmp_path, capsys):
    from khlambda.movies import builtin_movies
    p = tmp_path / "tube.json"
    p.write_text(json.dumps(builtin_movies()["torus_tube"].to_json()))
    code, out, _ = run(capsys, "movie", "--movie", str(p), "--format", "csv")
    assert code == EXIT_OK
    header, row = out.splitlines()
    rec = dict(zip(header.split(","), row.split(",")))
    assert rec["genus"] == "1" and rec["s"] == "0"


def test_mirror_check(capsys):
    code, out, _ = run(capsys, "mirror-check", "--knot", "5_2", "--format", "csv")
    assert code == EXIT_OK
    assert out.splitlines()[1] == "5_2,2,-2,True"


def test_perturb_suite_small(capsys, tmp_path):
    out_path = tmp_path / "suite.json"
    code, _, _ = run(capsys, "perturb-suite", "--seeds", "3", "--knot", "trefoil", "--out", str(out_path))
    assert code == EXIT_OK
    data = json.loads(out_path.read_text())
    assert data["seeds"] == data["passed"] == 3
    assert [r["seed"] for r in data["runs"]] == [0, 1, 2]


def test_outputs_are_deterministic(capsys, monkeypatch):
    first = run(capsys, "perturb-suite", "--seeds", "4", "--seed", "7")[1]
    monkeypatch.setenv("KHLAMBDA_WORKERS", "2")
    second = run(capsys, "perturb-suite", "--seeds", "4", "--seed", "7")[1]
    assert first == second


@pytest.mark.parametrize("argv", [
    ["kh", "--pd", "PD[X[1,2,3]]"],
    ["kh", "--pd", "missing.pd"],
    ["s", "--knot", "no-such-knot"],
    ["movie", "--movie", "nowhere.json"],
    ["perturb-suite", "--knot", "4_1"],
])
def test_user_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_bad_worker_count(capsys, monkeypatch):
    monkeypatch.setenv("KHLAMBDA_WORKERS", "zero")
    assert run(capsys, "s", "--knot", "3_1")[0] == EXIT_USAGE


def test_budget_exit_code(capsys):
    assert run(capsys, "kh", "--knot", "8_19", "--budget-generators", "64")[0] == EXIT_BUDGET


def test_invariant_violation_exit_code(capsys, monkeypatch):
    import khlambda.cli as cli

    def broken(*a, **k):
        raise InvariantViolation("d^2 != 0")
    monkeypatch.setattr(cli, "s_invariant", broken)
    assert run(capsys, "s", "--knot", "3_1")[0] == EXIT_INVARIANT


def test_argparse_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as e:
        main(["kh", "--format", "xml"])
    assert e.value.code == 2


@pytest.mark.skipif(shutil.which("khlambda") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["khlambda", "s", "--knot", "trefoil", "--format", "csv"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines() == ["name,s", "trefoil,2"]
