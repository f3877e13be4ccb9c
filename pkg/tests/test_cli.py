from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from sumprod.cli import RunConfig, main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_verify_e4_example():
    code, text = run("verify", "--thm", "e4", "--p", "rational", "--A", "1,2,4", "--C", "1,2,4", "--D", "1,2,4")
    assert code == 0
    data = json.loads(text)
    assert (data["lhs"], data["rhs"]) == (115, 729)


def test_corollary_example():
    code, text = run("corollary", "--p", "rational", "--A", "1,2,4")
    assert code == 0
    first = json.loads(text)[0]
    assert round(first["ratio"], 2) == 2.35


def test_energy_example():
    code, text = run("energy", "--n", "2", "--op", "ratio", "--A", "1", "--D", "1", "--format", "text")
    assert code == 0 and text.strip() == "1"
    code, text = run("energy", "--n", "2", "--op", "ratio", "--A", "1", "--D", "1")
    assert json.loads(text)["value"] == 1


def test_sets_default_to_A():
    _, a = run("verify", "--thm", "shift", "--A", "1,2,4")
    _, b = run("verify", "--thm", "shift", "--A", "1,2,4", "--B", "1,2,4", "--C", "1,2,4", "--D", "1,2,4")
    assert a == b


@pytest.mark.parametrize(
    "argv",
    [
        ("verify", "--thm", "e9", "--A", "1"),
        ("verify", "--thm", "e4", "--p", "100", "--A", "1"),
        ("refine", "--A", "1,2,4"),
        ("energy", "--A", "1", "--D", "0"),
        ("energy",),
        ("bogus",),
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    code, _ = run(*argv)
    assert code == 2
    assert capsys.readouterr().err


def test_all_subcommands_run():
    cases = [
        ("decompose", "--A", "1,2,4"),
        ("refine", "--A", "1,2,4", "--force"),
        ("incidence", "--A", "1,2,4", "--all-buckets"),
        ("trace", "--A", "1,2,4", "--force"),
        ("search", "--p", "13", "--n", "3"),
        ("search", "--p", "101", "--n", "5", "--mode", "hill", "--seed", "4", "--steps", "200"),
        ("corollary", "--p", "4294967311", "--orders", "10,30"),
        ("energy", "--A", "1,2,4", "--n", "4/3", "--buckets"),
    ]
    for argv in cases:
        code, text = run(*argv)
        assert code == 0, argv
        json.loads(text)


def test_csv_rows_match_steps():
    _, js = run("trace", "--A", "1,2,4", "--force")
    steps = json.loads(js)["steps"]
    _, text = run("trace", "--A", "1,2,4", "--force", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == len(steps)
    _, text = run("corollary", "--A", "1,2,4", "--format", "csv")
    assert len(list(csv.DictReader(io.StringIO(text)))) == 2


def test_run_config_round_trip(tmp_path):
    cfg = RunConfig(
        command="verify",
        p="101",
        sets={"A": "subgroup(6,10)", "D": "1,2,3"},
        format="json",
        seed=7,
        force=True,
        jobs=2,
        options={"thm": "e2"},
    )
    assert RunConfig.from_text(cfg.to_text()) == cfg
    path = tmp_path / "run.json"
    path.write_text(cfg.to_text())
    code, via_config = run("--config", str(path))
    code2, direct = run(*cfg.to_argv())
    assert code == code2 == 0 and via_config == direct
    assert json.loads(via_config)["theorem_id"] == "e2"


def test_ledger_flag(tmp_path):
    path = tmp_path / "l.csv"
    run("search", "--p", "7", "--n", "2", "--ledger", str(path))
    run("search", "--p", "13", "--n", "3", "--ledger", str(path))
    assert len(path.read_text().strip().splitlines()) == 3


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "sumprod", "energy", "--A", "1,2,4", "--n", "4", "--format", "text"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and proc.stdout.strip() == "115"
