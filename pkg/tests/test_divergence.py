import numpy as np
import pytest

from exceptions import DegenerateInputError, InvalidInputError, UnstablePointError
from experiments.divergence.divergence import (
    build_G_H,
    divergence_bound,
    divergence_closed_form,
    divergence_finite_difference,
    divergence_report,
    finite_difference_divergence,
    run_divergence_study,
)
from experiments.divergence.shrinkage import ShrinkageFn, make_shrinkage_const, make_shrinkage_default
from linalg import sym_sqrt_pd
from sampling import ModelSpec, draw, gram, whiten

DIAG_SIGMA = np.diag([1.0, 2.0, 3.0, 4.0, 5.0])


def _sample(n=3, p=5, seed=7):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(p), rng.standard_normal((n, p))


def test_identity_field_has_divergence_n_times_p():
    y = np.random.default_rng(0).standard_normal((3, 4))
    assert finite_difference_divergence(lambda m: m, y) == pytest.approx(12.0, rel=1e-8)


def test_linear_field_has_divergence_n_times_trace():
    m = np.random.default_rng(1).standard_normal((4, 4))
    y = np.ones((2, 4))
    assert finite_difference_divergence(lambda v: v @ m, y, h=1e-3) == pytest.approx(2 * np.trace(m), rel=1e-8)


@pytest.mark.parametrize("h", [0.0, -1e-4])
def test_non_positive_step_is_rejected(h):
    with pytest.raises(InvalidInputError):
        finite_difference_divergence(lambda m: m, np.eye(2), h=h)
    x, y = _sample()
    with pytest.raises(InvalidInputError):
        divergence_finite_difference(x, y, np.eye(5), make_shrinkage_default(1.0), 3, h=h)


def test_g_has_trace_r_squared_over_f():
    x, y = _sample()
    s = gram(y)
    r = make_shrinkage_default(1.5)
    g, h = build_G_H(x, s, np.eye(5), r)
    f = float(x @ np.linalg.pinv(s) @ x)
    assert np.trace(g) == pytest.approx(float(r.eval(f)) ** 2 / f, rel=1e-10)
    np.testing.assert_allclose(h, g, atol=1e-12)


def test_h_is_similar_to_g():
    x, y = _sample()
    s = gram(y)
    g, h = build_G_H(x, s, DIAG_SIGMA, make_shrinkage_default(1.0))
    a = sym_sqrt_pd(DIAG_SIGMA)
    np.testing.assert_allclose(h @ a, a @ g, atol=1e-10)
    assert np.trace(h) == pytest.approx(np.trace(g))


def test_zero_x_is_degenerate():
    _, y = _sample()
    with pytest.raises(DegenerateInputError):
        build_G_H(np.zeros(5), gram(y), np.eye(5), make_shrinkage_default(1.0))
    with pytest.raises(DegenerateInputError):
        divergence_closed_form(np.zeros(5), gram(y), np.eye(5), make_shrinkage_default(1.0), 3)


def test_closed_form_with_constant_shrinkage():
    x, y = _sample()
    s = gram(y)
    f = float(x @ np.linalg.pinv(s) @ x)
    value = divergence_closed_form(x, s, np.eye(5), make_shrinkage_const(2.0), 3)
    # rank(S) = 3, so n + p − 2·tr(SS⁺) + 3 = 5
    assert value == pytest.approx(4.0 / f * 5, rel=1e-10)


def test_closed_form_checks_sigma_shape():
    x, y = _sample()
    with pytest.raises(InvalidInputError):
        divergence_closed_form(x, gram(y), np.eye(4), make_shrinkage_default(1.0), 3)


def test_finite_difference_checks_y_shape():
    x, y = _sample()
    with pytest.raises(InvalidInputError):
        divergence_finite_difference(x, y.T, np.eye(5), make_shrinkage_default(1.0), 3)


@pytest.mark.parametrize("shrinkage", [make_shrinkage_default(1.0), make_shrinkage_const(1.0)])
def test_single_report_agrees(shrinkage):
    spec = ModelSpec(n=3, p=5, theta=np.ones(5), sigma=DIAG_SIGMA)
    sample = draw(spec, 11)
    report = divergence_report(sample.x, whiten(sample.y, spec), spec, shrinkage)
    assert report.rank_s == 3
    assert report.coeff == pytest.approx(5.0)
    assert report.rel_err < 1e-5


@pytest.mark.parametrize("n, p", [(3, 5), (4, 7)])
@pytest.mark.parametrize("sigma", ["identity", "diag"])
@pytest.mark.parametrize("factory", [make_shrinkage_default, make_shrinkage_const])
def test_closed_form_agrees_with_oracle(n, p, sigma, factory):
    cov = np.eye(p) if sigma == "identity" else np.diag(np.arange(1.0, p + 1))
    spec = ModelSpec(n=n, p=p, theta=np.zeros(p), sigma=cov)
    study = run_divergence_study(spec, factory(1.0), reps=40, seed=42)
    assert len(study.reports) == 40
    assert study.agreement_fraction >= 0.95
    assert study.bound_violations == 0
    assert study.passed


def test_sign_mismatch_is_reported():
    r = make_shrinkage_default(1.0)
    flipped = ShrinkageFn("flipped", r.c1, r.c2, eval=r.eval, deriv=lambda t: -r.deriv(t))
    study = run_divergence_study(ModelSpec.identity(3, 5), flipped, reps=30, seed=3)
    assert study.agreement_fraction < 0.95
    assert study.mean_signed_residual > 0
    assert any("mean signed residual" in f for f in study.findings())


def test_study_is_identical_across_worker_counts():
    spec = ModelSpec.identity(3, 5)
    r = make_shrinkage_default(1.0)
    serial = run_divergence_study(spec, r, reps=30, seed=9, workers=1)
    threaded = run_divergence_study(spec, r, reps=30, seed=9, workers=2)
    assert serial.to_dict() == threaded.to_dict()


def test_rank_change_under_perturbation_is_unstable():
    x, y = _sample()
    y[1] = y[0]
    with pytest.raises(UnstablePointError) as info:
        divergence_finite_difference(x, y, np.eye(5), make_shrinkage_default(1.0), 3)
    assert info.value.entry == (0, 0)


def test_triangle_bound():
    x, y = _sample()
    s = gram(y)
    r = make_shrinkage_default(1.0)
    f = float(x @ np.linalg.pinv(s) @ x)
    value = divergence_closed_form(x, s, np.eye(5), r, 3)
    assert abs(value) <= divergence_bound(f, 5.0, r)
    with pytest.raises(DegenerateInputError):
        divergence_bound(0.0, 5.0, r)


@pytest.mark.slow
@pytest.mark.parametrize("n, p", [(3, 5), (4, 7)])
@pytest.mark.parametrize("sigma", ["identity", "diag"])
@pytest.mark.parametrize("factory", [make_shrinkage_default, make_shrinkage_const])
def test_full_size_agreement(n, p, sigma, factory):
    cov = np.eye(p) if sigma == "identity" else np.diag(np.arange(1.0, p + 1))
    spec = ModelSpec(n=n, p=p, theta=np.zeros(p), sigma=cov)
    study = run_divergence_study(spec, factory(1.0), reps=1000, seed=20240718)
    assert len(study.reports) == 1000
    assert study.agreement_fraction >= 0.95
    assert study.passed, study.findings()
