import json
import subprocess
import sys

import pytest

from gasearch.cli import main


def test_list_prints_manifest(capsys):
    assert main(["bench", "list"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data) == 31


def test_solve_prints_result(capsys):
    assert main(["solve", "--algo", "gas", "--function", "sphere", "--budget", "1e4",
                 "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "status     solved" in out
    assert "best value 0.0" in out


def test_run_then_curves(tmp_path, capsys):
    out = tmp_path / "run"
    args = ["bench", "run", "--algos", "gas,bh", "--functions", "booth,matyas",
            "--budget", "2000", "--runs", "2", "--seed", "3", "--out", str(out)]
    assert main(args) == 0
    for name in ("traces.csv", "summary.json", "curves.svg"):
        assert (out / name).exists()
    assert main(["bench", "curves", "--in", str(out), "--out", str(tmp_path / "c")]) == 0
    assert (tmp_path / "c" / "curves.svg").exists()
    assert "gas  T=2" in capsys.readouterr().out


@pytest.mark.parametrize("args", [
    ["solve", "--function", "nope"],
    ["solve", "--algo", "anneal", "--function", "sphere"],
    ["bench", "run", "--functions", "nope", "--out", "x"],
    ["bench", "run", "--algos", "gas,xx", "--out", "x"],
    ["bench", "run", "--runs", "0", "--out", "x"],
    ["bench", "curves", "--in", "/nonexistent/dir", "--out", "x"],
])
def test_configuration_errors_exit_2(args, capsys):
    assert main(args) == 2
    assert "error" in capsys.readouterr().err


@pytest.mark.parametrize("budget", ["abc", "1.5", "0", "-3"])
def test_bad_budget_rejected_by_parser(budget):
    with pytest.raises(SystemExit) as err:
        main(["solve", "--function", "sphere", "--budget", budget])
    assert err.value.code == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "gasearch", "solve", "--function", "booth",
                           "--budget", "5000"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "booth" in proc.stdout
