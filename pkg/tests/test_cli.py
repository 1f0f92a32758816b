import csv
import json
import math

import pytest

from sswmlab import cli
from sswmlab.verify import Check


def invoke(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def echoed(err):
    return json.loads(err.splitlines()[0])


def test_run_writes_csv(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code, _, err = invoke(
        capsys, "run", "--algo", "sswm", "--fitness", "onemax", "--n", "32", "--beta", "1",
        "--nbeta", "auto", "--mutation", "global", "--trials", "12", "--budget", "50*n*ln(n)",
        "--seed", "7", "--out", str(out), "--workers", "1",
    )
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 12
    assert float(rows[0]["N"]) * 1.0 == pytest.approx(0.5 * math.log(11 * 32))
    assert echoed(err)["command"] == "run"
    summary = json.loads(err.splitlines()[1])
    assert summary["summary"]["trials"] == 12


def test_round_trip(tmp_path, capsys):
    args = ["run", "--fitness", "cliff", "--d", "3", "--n", "12", "--trials", "5", "--budget", "2000", "--seed", "4"]
    code, out1, err = invoke(capsys, *args)
    assert code == 0
    cfg = tmp_path / "c.json"
    cfg.write_text(err.splitlines()[0])
    code, out2, err2 = invoke(capsys, "run", "--config", str(cfg))
    assert code == 0 and out2 == out1
    assert echoed(err2) == echoed(err)


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 8, "trials": 3, "budget": 100, "algo": "ea"}))
    code, out, err = invoke(capsys, "run", "--config", str(cfg), "--trials", "2")
    assert code == 0
    assert echoed(err)["trials"] == 2 and echoed(err)["algo"] == "ea"
    assert len(out.strip().splitlines()) == 3


def test_env_seed(capsys, monkeypatch):
    monkeypatch.setenv("EVOSIM_SEED", "123")
    code, out, err = invoke(capsys, "run", "--n", "8", "--trials", "2", "--budget", "100")
    assert code == 0 and echoed(err)["seed"] == 123


def test_exact_cliff(capsys):
    code, out, err = invoke(capsys, "exact", "--fitness", "cliff", "--d", "3", "--n", "10", "--algo", "ea", "--mutation", "global")
    assert code == 0
    rows = list(csv.DictReader(out.splitlines()))
    assert len(rows) == 11 and list(rows[0]) == list(cli.CHAIN_COLUMNS)
    t = [float(r["hitting_time"]) for r in rows]
    assert t[10] == 0.0
    # from the peak the only way on is the direct jump to all-ones
    assert t[7] == pytest.approx(1 / 0.1**3 / 0.9**7, rel=1e-12)


def test_drift_report(tmp_path, capsys):
    rep = tmp_path / "rep.json"
    code, out, _ = invoke(
        capsys, "drift", "--n", "100", "--nbeta", "0.25*ln(100)", "--negative", "1", "3", "0.01", "1", "0.1",
        "--report", str(rep),
    )
    assert code == 0
    data = json.loads(rep.read_text())
    assert data["negative_drift"]["holds"] is True
    assert data["drift_bounds"]["applicable"] is True


def test_verify_selection(capsys):
    code, out, _ = invoke(capsys, "verify", "--suite", "selection")
    assert code == 0 and out.count("[PASS]") == 3


def test_verify_failure_exit(capsys, monkeypatch):
    monkeypatch.setitem(cli.SUITES, "selection", (lambda: Check("forced", False),))
    code, out, _ = invoke(capsys, "verify", "--suite", "selection")
    assert code == 2 and "[FAIL] forced" in out


def test_sweep(tmp_path, capsys):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"grid": {"n": [8, 16], "algo": ["ea"]}, "trials": 4, "budget": "50*n*log(n)"}))
    code, out, err = invoke(capsys, "sweep", "--config", str(cfg), "--workers", "1")
    assert code == 0
    data = json.loads(out)
    assert [c["budget"] for c in data] == [832, 2219]


@pytest.mark.parametrize(
    "argv,flag",
    [
        (["run", "--n", "8", "--fitness", "twomax"], "--fitness"),
        (["run", "--n", "8", "--algo", "ga"], "--algo"),
        (["run", "--n", "9", "--fitness", "balance"], "--n"),
        (["run", "--n", "8", "--budget", "n+"], "--budget"),
        (["run", "--n", "10", "--fitness", "cliff", "--d", "9"], "--d"),
        (["run", "--n", "8", "--beta", "-1"], "--beta"),
        (["exact", "--n", "8", "--fitness", "balance"], "--fitness"),
        (["run", "--fitness", "onemax"], "--n"),
        (["drift", "--n", "8", "--negative", "0", "3", "0.1", "1", "0.1"], "--negative"),
    ],
)
def test_usage_errors_name_flag(capsys, argv, flag):
    code, _, err = invoke(capsys, *argv)
    assert code == 1
    assert flag in err.splitlines()[-1]


def test_unknown_verb(capsys):
    code, _, _ = invoke(capsys, "dance")
    assert code == 1


def test_runtime_error_exit(capsys):
    # local EA on a cliff can never leave the peak: no finite hitting time
    code, _, err = invoke(capsys, "exact", "--fitness", "cliff", "--d", "3", "--n", "10", "--algo", "ea", "--mutation", "local")
    assert code == 3 and "unreachable" in err
