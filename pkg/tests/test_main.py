import json

import pytest

import main
from base.experiment import Experiment
from base.experiment_config import ExperimentConfig
from base.payload import Payload
from exceptions import ConfigError


class _FailingPayload(Payload):
    csv_header = ("value",)

    def to_dict(self):
        return {"value": 1}

    def csv_rows(self):
        yield (1,)

    def findings(self):
        return ["value is wrong"]


class _FailingExperiment(Experiment):
    name = "always-fails"
    help = "Always reports a finding."

    def run(self):
        return _FailingPayload()


def _run(tmp_path, *argv, name="report.json"):
    target = tmp_path / name
    status = main.main([*argv, "--output", str(target)])
    return status, target.read_bytes() if target.exists() else None


def test_experiments_are_discovered():
    assert list(main.discover_experiments()) == [
        "counterexample",
        "infinite-demo",
        "sandwich-scan",
        "scan-bound",
        "verify-bounds",
        "verify-divergence",
    ]


def test_counterexample(tmp_path):
    status, data = _run(tmp_path, "counterexample")
    assert status == main.EXIT_OK
    out = json.loads(data)
    assert out["subcommand"] == "counterexample"
    assert out["payload"]["lhs"] == "1/2"
    assert "wall_clock_seconds" not in out


def test_verify_divergence(tmp_path):
    status, data = _run(tmp_path, "verify-divergence", "--n", "3", "--p", "5", "--reps", "100", "--master-seed", "42")
    assert status == main.EXIT_OK
    reports = json.loads(data)["payload"]["reports"]
    assert len(reports) == 100
    assert sum(r["rel_err"] < 1e-5 for r in reports) >= 95


def test_infinite_demo_is_reproducible(tmp_path):
    argv = ("infinite-demo", "--reps", "10000", "--master-seed", "7")
    first = _run(tmp_path, *argv, name="a.json")
    second = _run(tmp_path, *argv, name="b.json")
    assert first[0] == main.EXIT_OK
    assert first == second
    threaded = _run(tmp_path, *argv, "--workers", "3", name="c.json")
    assert json.loads(threaded[1])["payload"] == json.loads(first[1])["payload"]


@pytest.mark.parametrize(
    "argv",
    [
        ("infinite-demo", "--reps", "0"),
        ("infinite-demo", "--reps", "100"),
        ("verify-bounds", "--n", "2"),
        ("verify-divergence", "--sigma", "diag:1,2"),
        ("verify-divergence", "--h", "-1"),
    ],
)
def test_usage_errors_exit_2(tmp_path, argv):
    status, data = _run(tmp_path, *argv)
    assert status == main.EXIT_USAGE
    assert data is None


def test_unknown_subcommand_is_rejected_by_the_parser():
    with pytest.raises(SystemExit) as info:
        main.main(["no-such-experiment"])
    assert info.value.code == 2


def test_findings_exit_1(tmp_path, monkeypatch):
    monkeypatch.setattr(main, "discover_experiments", lambda: {"always-fails": _FailingExperiment})
    status, data = _run(tmp_path, "always-fails")
    assert status == main.EXIT_FINDINGS
    out = json.loads(data)
    assert out["passed"] is False
    assert out["findings"] == ["value is wrong"]


def test_timing(tmp_path):
    status, data = _run(tmp_path, "counterexample", "--timing")
    assert status == main.EXIT_OK
    assert json.loads(data)["wall_clock_seconds"] >= 0


def test_csv_output(tmp_path):
    status, data = _run(tmp_path, "scan-bound", "--p", "4", "--trials", "10", "--format", "csv", name="scan.csv")
    assert status == main.EXIT_OK
    lines = data.decode("utf-8").splitlines()
    assert lines[0] == "trial,rank_t,lhs,rhs,holds"
    assert len(lines) == 11


def test_stdout_output(capsysbinary):
    assert main.main(["counterexample", "--format", "csv"]) == main.EXIT_OK
    assert capsysbinary.readouterr().out == b"lhs,rhs,holds\n1/2,1/4,false\n"


def test_run_rejects_unknown_subcommand():
    with pytest.raises(ConfigError):
        main.run(ExperimentConfig(subcommand="nothing"), experiments={})
