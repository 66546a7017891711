from fractions import Fraction

import numpy as np
import pytest

from base.experiment_config import ExperimentConfig
from exceptions import DomainError
from experiments.counterexample import bound
from experiments.counterexample.experiment import CounterexampleExperiment, ScanBoundExperiment


def test_lhs_and_rhs_are_exact():
    check = bound.verify_counterexample()
    assert check.lhs == Fraction(1, 2)
    assert check.rhs == Fraction(1, 4)
    assert check.holds is False


def test_intermediates_match_the_printed_matrices():
    computed = bound.exact_intermediates()
    for name, printed in bound.printed_intermediates().items():
        assert computed[name] == printed, name


def test_projector_is_symmetric_idempotent_with_trace_two():
    projector = bound.exact_intermediates()["(T+TA)+(T+TA)"]
    assert projector == projector.T
    assert projector @ projector == projector
    assert projector.trace() == 2


def test_numeric_check_agrees_on_the_counterexample():
    rng = np.random.default_rng(0)
    check = bound.bound_check(*bound.counterexample_case(rng, 4))
    assert check.lhs == pytest.approx(0.5, abs=1e-12)
    assert check.rhs == pytest.approx(0.25, abs=1e-12)
    assert not check.holds


@pytest.mark.parametrize("scale, holds", [(0.5, False), (2.0, True)])
def test_full_rank_t_with_identity_a(scale, holds):
    rng = np.random.default_rng(1)
    t = np.diag(rng.uniform(0.5, 2.0, size=4))
    x = scale * np.array([1.0, 0.0, 0.0, 0.0])
    check = bound.bound_check(t, np.eye(4), x)
    assert check.lhs == pytest.approx(x @ x)
    assert check.rhs == pytest.approx((x @ x) ** 2)
    assert check.holds is holds


def test_scan_with_the_counterexample_injected():
    result = bound.scan_cw_bound(1, 4, seed=99, sampler=bound.counterexample_case)
    assert result.violation_fraction == 1.0
    assert result.worst.rank_t == 2


def test_random_scan_finds_violations():
    result = bound.scan_cw_bound(500, 4, seed=20240718)
    assert 0.0 < result.violation_fraction < 1.0
    assert all(1 <= r.rank_t < 4 for r in result.records)
    assert result.worst.check.margin == max(r.check.margin for r in result.records)


def test_scan_is_identical_across_worker_counts():
    serial = bound.scan_cw_bound(2500, 3, seed=5)
    threaded = bound.scan_cw_bound(2500, 3, seed=5, workers=3)
    assert [r.check for r in serial.records] == [r.check for r in threaded.records]


def test_scan_preconditions():
    with pytest.raises(DomainError):
        bound.scan_cw_bound(10, 1, seed=0)
    with pytest.raises(DomainError):
        bound.scan_cw_bound(0, 4, seed=0)


def test_counterexample_experiment_passes():
    result = CounterexampleExperiment(ExperimentConfig(subcommand="counterexample")).run()
    assert result.passed
    out = result.to_dict()
    assert list(out)[:3] == ["lhs", "rhs", "holds"]
    assert out["intermediates_match"] is True
    assert out["intermediates"]["T+"][0] == ["7/4", "7/4", "-1/4", "-1/4"]


def test_scan_bound_experiment_is_not_a_failure():
    config = ExperimentConfig(subcommand="scan-bound", p=4, trials=200, master_seed=1)
    result = ScanBoundExperiment(config).run()
    assert result.passed
    assert len(list(result.csv_rows())) == 200
