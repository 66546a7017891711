import numpy as np
import pytest

from exceptions import DomainError, InvalidInputError
from experiments.counterexample import constants
from linalg import RationalMatrix
from sampling import (
    ModelSpec,
    as_generator,
    block_bounds,
    compute_F,
    decade_grid,
    draw,
    is_stable,
    map_blocks,
    mean_and_se,
    running_means,
    sample_matrix_normal,
    sample_mvn,
    whiten,
)
from sampling.model import draw_batch


def test_model_spec_validation():
    with pytest.raises(DomainError):
        ModelSpec(n=2, p=2, theta=np.zeros(2), sigma=np.diag([1.0, -1.0]))
    with pytest.raises(DomainError):
        ModelSpec(n=2, p=2, theta=np.zeros(3), sigma=np.eye(2))
    with pytest.raises(DomainError):
        ModelSpec(n=0, p=2, theta=np.zeros(2), sigma=np.eye(2))
    with pytest.raises(InvalidInputError):
        ModelSpec(n=1, p=2, theta=np.array([np.nan, 0.0]), sigma=np.eye(2))


def test_model_spec_is_read_only():
    spec = ModelSpec.identity(2, 3)
    with pytest.raises(ValueError):
        spec.theta[0] = 1.0


def test_draws_are_deterministic():
    spec = ModelSpec.identity(3, 5, theta=np.ones(5))
    np.testing.assert_array_equal(sample_mvn(spec, 17), sample_mvn(spec, 17))
    a = draw(spec, as_generator(17))
    b = draw(spec, as_generator(17))
    np.testing.assert_array_equal(a.x, b.x)
    np.testing.assert_array_equal(a.y, b.y)
    assert a.rank_s == 3


def test_mvn_mean_and_variance():
    rng = np.random.default_rng(8)
    spec = ModelSpec(n=1, p=2, theta=np.zeros(2), sigma=np.diag([4.0, 1.0]))
    x = sample_mvn(spec, rng, size=100_000)
    mean, se = mean_and_se(x[:, 1])
    assert abs(mean) < 4 * se
    assert np.var(x[:, 0]) == pytest.approx(4.0, rel=0.05)


def test_matrix_normal_row_covariance_and_whitening():
    sigma = np.array([[2.0, 0.5], [0.5, 1.0]])
    spec = ModelSpec(n=2, p=2, theta=np.zeros(2), sigma=sigma)
    y = sample_matrix_normal(spec, 3, size=50_000)
    rows = y.reshape(-1, 2)
    np.testing.assert_allclose(rows.T @ rows / rows.shape[0], sigma, rtol=0.05)
    white = whiten(rows, spec)
    np.testing.assert_allclose(white.T @ white / white.shape[0], np.eye(2), atol=0.05)


def test_rank_one_model_shape():
    y = sample_matrix_normal(ModelSpec.identity(1, 2), 4)
    assert y.shape == (1, 2)


def test_compute_f():
    assert compute_F(np.array([1.0, 0, 0]), np.eye(3)) == pytest.approx(1.0)
    assert compute_F(np.zeros(3), np.eye(3)) == 0.0
    t = RationalMatrix.from_rows(constants.T_ROWS, constants.T_SCALE).to_numpy()
    assert compute_F(np.array([1.0, 0, 0, 0]), t) == pytest.approx(7 / 4, rel=1e-12)
    with pytest.raises(InvalidInputError):
        compute_F(np.ones(2), np.eye(3))


@pytest.mark.parametrize("n, p", [(1, 2), (3, 5), (5, 3)])
def test_trace_of_s_s_pinv_is_min_n_p(n, p):
    batch = draw_batch(ModelSpec.identity(n, p), 12, size=10_000)
    traces = np.einsum("bij,bji->b", batch.s, batch.s_pinv)
    np.testing.assert_allclose(traces, min(n, p), atol=1e-8)
    assert np.all(batch.rank_s == min(n, p))


def test_block_bounds():
    assert block_bounds(2500, 1024) == [(0, 0, 1024), (1, 1024, 2048), (2, 2048, 2500)]
    assert block_bounds(0) == []


def test_map_blocks_order_and_parallel_equality():
    def fn(b, start, stop, rng):
        return b, start, stop, rng.standard_normal(stop - start)

    serial = map_blocks(fn, 5000, master_seed=42)
    threaded = map_blocks(fn, 5000, master_seed=42, workers=4)
    assert [r[0] for r in serial] == list(range(5))
    for a, b in zip(serial, threaded):
        assert a[:3] == b[:3]
        np.testing.assert_array_equal(a[3], b[3])


def test_as_generator_rejects_other_types():
    with pytest.raises(InvalidInputError):
        as_generator("seed")


def test_estimators():
    assert decade_grid(10**6) == [10_000, 100_000, 1_000_000]
    assert decade_grid(25_000) == [10_000, 25_000]
    assert decade_grid(500) == [500]
    assert running_means([1.0, 3.0, 5.0], [1, 3]) == [(1, 1.0), (3, 3.0)]
    assert mean_and_se([2.0]) == (2.0, float("inf"))
    steady = np.random.default_rng(0).standard_normal(20_000)
    assert is_stable(steady, [10_000, 20_000], 5)
