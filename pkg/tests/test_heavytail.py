import numpy as np
import pytest

from exceptions import DegenerateInputError, DomainError, InvalidInputError
from experiments.heavytail import constants
from experiments.heavytail.tail import (
    HillEstimate,
    hill_estimator,
    rank_one_diagnostics,
    run_finite_contrast,
    run_infinite_demo,
    verdict,
)
from sampling import ModelSpec
from sampling.model import draw_batch


@pytest.mark.parametrize("alpha", [0.5, 1.5])
def test_hill_recovers_pareto_index(alpha):
    x = np.random.default_rng(0).pareto(alpha, size=200_000) + 1.0
    hill = hill_estimator(x)
    assert hill.k == 447
    assert abs(hill.alpha - alpha) < 4 * hill.se
    assert hill.se == pytest.approx(hill.alpha / np.sqrt(447))


def test_hill_errors():
    with pytest.raises(InvalidInputError):
        hill_estimator([1.0])
    with pytest.raises(InvalidInputError):
        hill_estimator([1.0, 0.0, 2.0])
    with pytest.raises(InvalidInputError):
        hill_estimator([1.0, np.inf, 2.0])
    with pytest.raises(InvalidInputError):
        hill_estimator([1.0, 2.0, 3.0], k=3)
    with pytest.raises(DegenerateInputError):
        hill_estimator(np.ones(100))


@pytest.mark.parametrize(
    "alpha, se, stabilized, expected",
    [
        (0.5, 0.05, False, constants.VERDICT_INFINITE),
        (0.5, 0.05, True, constants.VERDICT_INCONCLUSIVE),
        (1.5, 0.1, True, constants.VERDICT_FINITE),
        (1.5, 0.1, False, constants.VERDICT_INCONCLUSIVE),
        (0.9, 0.1, True, constants.VERDICT_FINITE),
        (0.9, 0.1, False, constants.VERDICT_INCONCLUSIVE),
        (0.7, 0.1, False, constants.VERDICT_INFINITE),
        (0.7, 0.1, True, constants.VERDICT_INCONCLUSIVE),
    ],
)
def test_verdict_rule(alpha, se, stabilized, expected):
    assert verdict(HillEstimate(alpha, se, 100), stabilized) == expected


def test_rank_one_closed_forms():
    spec = ModelSpec.identity(1, 2, theta=np.array([1.0, 1.0]))
    diagnostics = rank_one_diagnostics(draw_batch(spec, 3, size=5000), spec.theta)
    assert diagnostics.ok
    assert diagnostics.draws == 5000
    assert np.all((diagnostics.pit >= 0) & (diagnostics.pit <= 1))


def test_rank_one_diagnostics_need_a_one_by_two_y():
    batch = draw_batch(ModelSpec.identity(3, 5), 3, size=10)
    with pytest.raises(DomainError):
        rank_one_diagnostics(batch, np.zeros(5))


def test_infinite_demo():
    report = run_infinite_demo(20_000, seed=20240718)
    assert 0.35 < report.hill_alpha < 0.65
    assert report.verdict == verdict(HillEstimate(report.hill_alpha, report.hill_se, report.hill_k), report.stabilized)
    assert report.verdict != constants.VERDICT_FINITE
    assert report.sample.diagnostics.ok
    assert report.conditional_ks < 0.02
    assert report.passed, report.findings()
    out = report.to_dict()
    assert out["rank_counts"] == {"1": 20_000}
    assert [n for n, _ in out["running_means"]] == [10_000, 20_000]


def test_finite_contrast():
    report = run_finite_contrast(20_000, seed=20240718)
    assert report.verdict == constants.VERDICT_FINITE
    assert report.hill_alpha > 1.0
    assert report.mean < 180.0
    assert report.passed, report.findings()
    assert "rank_one" not in report.to_dict()


def test_demo_is_identical_across_worker_counts():
    serial = run_infinite_demo(12_000, seed=5)
    threaded = run_infinite_demo(12_000, seed=5, workers=4)
    np.testing.assert_array_equal(serial.sample.inv_f, threaded.sample.inv_f)
    assert serial.hill_alpha == threaded.hill_alpha


def test_too_few_reps():
    with pytest.raises(DomainError):
        run_infinite_demo(9_999, seed=1)
    with pytest.raises(DomainError):
        run_finite_contrast(100, seed=1)


@pytest.mark.slow
def test_full_size_demo():
    report = run_infinite_demo(1_000_000, seed=20240718)
    assert 0.4 <= report.hill_alpha <= 0.6
    assert report.verdict == constants.VERDICT_INFINITE
    assert report.conditional_ks < 0.02


@pytest.mark.slow
def test_running_mean_keeps_growing_across_seeds():
    growing = 0
    for seed in range(10):
        means = [m for _, m in run_infinite_demo(1_000_000, seed=seed).running_means]
        growing += means[-1] == max(means)
    assert growing >= 8


def test_single_running_mean_leaves_the_demo_inconclusive():
    report = run_infinite_demo(10_000, seed=20240718)
    assert [n for n, _ in report.running_means] == [10_000]
    assert report.stabilized
    assert report.hill_alpha + 2 * report.hill_se < 1
    assert report.verdict == constants.VERDICT_INCONCLUSIVE
    assert report.passed, report.findings()
    assert "otherwise inconclusive" in report.to_dict()["verdict_policy"]


def test_contradicting_verdict_is_a_finding():
    report = run_finite_contrast(10_000, seed=3)
    assert report.verdict == constants.VERDICT_FINITE
    report.expected_verdict = constants.VERDICT_INFINITE
    assert f"verdict is {constants.VERDICT_FINITE}, expected {constants.VERDICT_INFINITE}" in report.findings()
