import json
from fractions import Fraction

import numpy as np
import pytest

from base.experiment_config import ExperimentConfig
from exceptions import InvalidInputError, ReportWriteError
from experiments.counterexample import bound
from experiments.counterexample.experiment import CounterexampleResult
from experiments.divergence.divergence import DivergenceStudy
from experiments.divergence.shrinkage import make_shrinkage_default
from report.report_helper import ReportHelper
from report.run_report import RunReport, emit_report, write_report
from sampling import ModelSpec


def _counterexample_report(**kwargs) -> RunReport:
    payload = CounterexampleResult(
        bound.verify_counterexample(), bound.exact_intermediates(), bound.printed_intermediates()
    )
    config = ExperimentConfig(subcommand="counterexample")
    return RunReport("counterexample", config.to_dict(), config.master_seed, payload, **kwargs)


def test_format_values():
    assert ReportHelper.format(Fraction(-3, 4)) == "-3/4"
    assert ReportHelper.format(float("inf")) == "inf"
    assert ReportHelper.format(-np.inf) == "-inf"
    assert ReportHelper.format(np.nan) == "nan"
    assert ReportHelper.format(np.float64(0.1)) == 0.1
    assert ReportHelper.format(np.array([1, 2])) == [1, 2]
    assert ReportHelper.format((np.bool_(True), None)) == [True, None]
    with pytest.raises(TypeError):
        ReportHelper.format(object())


def test_cell_values():
    assert ReportHelper.cell(False) == "false"
    assert ReportHelper.cell(0.1) == "0.1"
    assert ReportHelper.cell(Fraction(1, 2)) == "1/2"
    assert ReportHelper.cell(None) == ""


def test_json_key_order_and_exact_values():
    out = json.loads(emit_report(_counterexample_report()))
    assert list(out) == ["artifact", "version", "subcommand", "config", "seed", "passed", "findings", "payload"]
    assert out["artifact"] == "SingularSteinLab"
    assert out["passed"] is True
    assert out["findings"] == []
    assert out["payload"]["lhs"] == "1/2"
    assert out["payload"]["rhs"] == "1/4"
    assert out["payload"]["holds"] is False
    assert out["seed"]["master_seed"] == out["config"]["master_seed"]


def test_timing_goes_after_seed():
    out = json.loads(emit_report(_counterexample_report(wall_clock_seconds=0.25)))
    assert list(out)[4:7] == ["seed", "wall_clock_seconds", "passed"]


def test_csv_layout():
    text = emit_report(_counterexample_report(), "csv").decode("utf-8")
    assert text == "lhs,rhs,holds\n1/2,1/4,false\n"


def test_empty_study_serialises():
    study = DivergenceStudy(ModelSpec.identity(3, 5), make_shrinkage_default(1.0), None, [], 0, 0)
    report = RunReport("verify-divergence", {}, 1, study)
    out = json.loads(emit_report(report))
    assert out["payload"]["reports"] == []
    assert out["payload"]["h"] == "auto"
    assert emit_report(report, "csv").decode("utf-8").count("\n") == 1


def test_unknown_format():
    with pytest.raises(InvalidInputError):
        emit_report(_counterexample_report(), "xml")


def test_write_report(tmp_path):
    target = tmp_path / "report.json"
    write_report(b"{}\n", str(target))
    assert target.read_bytes() == b"{}\n"
    with pytest.raises(ReportWriteError):
        write_report(b"{}\n", str(tmp_path / "missing" / "report.json"))
