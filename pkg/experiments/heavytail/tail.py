"""
Heavy tails of 1/F.

When rank(S) = 1 the conditional law of F is a scaled χ²₁, whose density does
not vanish at 0, so P(1/F > t) decays like t^(-1/2) and E[1/F] = +∞. When
rank(S) = 3 the tail index is 3/2 and the mean is finite. Both regimes are
sampled here and told apart by running means and a Hill estimate.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np
from scipy import stats

import config
from base.payload import Payload
from exceptions import DegenerateInputError, DomainError, InvalidInputError
from experiments.divergence.bounds import bound_final
from sampling import ModelSpec, decade_grid, is_stable, mean_and_se, running_means
from sampling.model import DrawBatch, draw_batch
from sampling.streams import map_blocks

from . import constants

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HillEstimate:
    alpha: float
    se: float
    k: int


def hill_estimator(values, k: Optional[int] = None) -> HillEstimate:
    """
    Hill estimate of the tail index from the k largest values.

    alpha = k / Σ_{i<k} (ln x₍ᵢ₎ − ln x₍ₖ₎) with x₍₀₎ ≥ x₍₁₎ ≥ ..., and SE = alpha/√k.

    Args:
        values (array_like): Positive finite sample.
        k (int, optional): Upper order statistics used. Defaults to floor(sqrt(N)).

    Raises:
        InvalidInputError: If a value is not positive and finite, or k is not in 1..N-1.
        DegenerateInputError: If the k + 1 largest values are all equal.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size < 2 or not np.all(np.isfinite(x) & (x > 0)):
        raise InvalidInputError("The Hill estimator needs at least two positive finite values.")
    if k is None:
        k = math.isqrt(x.size)
    if not 1 <= k < x.size:
        raise InvalidInputError(f"k must be in 1..{x.size - 1}, got {k}.")
    top = np.sort(x)[::-1][: k + 1]
    spacing = float(np.sum(np.log(top[:k]) - np.log(top[k])))
    if spacing == 0:
        raise DegenerateInputError("The largest order statistics are tied; the tail index is undefined.")
    alpha = k / spacing
    return HillEstimate(alpha=alpha, se=alpha / math.sqrt(k), k=int(k))


def verdict(hill: HillEstimate, stabilized: bool) -> str:
    """
    Classify a sample of 1/F by its tail index and its running means.

    Infinite-mean-consistent needs hill_alpha + VERDICT_SE·SE < 1 and running means that
    did not stabilize; finite-mean-consistent needs hill_alpha + VERDICT_SE·SE > 1 and
    running means that did. Anything else is inconclusive.
    """
    upper = hill.alpha + config.VERDICT_SE * hill.se
    if upper < 1 and not stabilized:
        return constants.VERDICT_INFINITE
    if upper > 1 and stabilized:
        return constants.VERDICT_FINITE
    return constants.VERDICT_INCONCLUSIVE


@dataclass(frozen=True)
class RankOneDiagnostics:
    """
    Per-draw checks of the rank-one closed forms, merged over a run.

    Attributes:
        draws (int): Number of draws checked.
        rank_ok (bool): numeric_rank(S) = 1 on every draw.
        max_pinv_error (float): Largest relative gap between S⁺ and S/(tr S)².
        max_f_error (float): Largest relative gap between F and (UX₁ + VX₂)²/(U² + V²)².
        pit (np.ndarray): CDF of χ²₁(δ₀) at F·(U² + V²) per draw; uniform under the conditional law.
    """

    draws: int
    rank_ok: bool
    max_pinv_error: float
    max_f_error: float
    pit: np.ndarray

    @property
    def ok(self) -> bool:
        return self.rank_ok and self.max_pinv_error <= constants.RANK_ONE_TOL and self.max_f_error <= constants.RANK_ONE_TOL

    @classmethod
    def merge(cls, parts: List["RankOneDiagnostics"]) -> "RankOneDiagnostics":
        return cls(
            draws=sum(p.draws for p in parts),
            rank_ok=all(p.rank_ok for p in parts),
            max_pinv_error=max(p.max_pinv_error for p in parts),
            max_f_error=max(p.max_f_error for p in parts),
            pit=np.concatenate([p.pit for p in parts]),
        )


def rank_one_diagnostics(batch: DrawBatch, theta) -> RankOneDiagnostics:
    """
    Check S⁺ = S/(U² + V²)² and F = (UX₁ + VX₂)²/(U² + V²)² for n = 1, p = 2 draws.

    δ₀ = (θ·ŷ)² with ŷ = (U, V)/‖(U, V)‖, the eigenvector of S⁺ for its nonzero eigenvalue.
    """
    if batch.y.shape[1:] != (1, 2):
        raise DomainError(f"Rank-one diagnostics need n = 1, p = 2 draws, got Y of shape {batch.y.shape[1:]}.")
    u, v = batch.y[:, 0, 0], batch.y[:, 0, 1]
    q = u**2 + v**2
    closed_pinv = batch.s / (q**2)[:, None, None]
    pinv_scale = np.maximum(1.0, np.max(np.abs(closed_pinv), axis=(1, 2)))
    pinv_error = np.max(np.abs(batch.s_pinv - closed_pinv), axis=(1, 2)) / pinv_scale

    closed_f = (u * batch.x[:, 0] + v * batch.x[:, 1]) ** 2 / q**2
    f_error = np.abs(batch.f - closed_f) / np.maximum(1.0, closed_f)

    theta = np.asarray(theta, dtype=np.float64)
    delta0 = (theta[0] * u + theta[1] * v) ** 2 / q
    pit = stats.ncx2.cdf(batch.f * q, 1, delta0)
    return RankOneDiagnostics(
        draws=len(batch),
        rank_ok=bool(np.all(batch.rank_s == 1)),
        max_pinv_error=float(np.max(pinv_error)),
        max_f_error=float(np.max(f_error)),
        pit=pit,
    )


def conditional_law_ks(pit) -> float:
    """KS statistic of the PIT values against U(0, 1)."""
    return float(stats.kstest(np.asarray(pit), "uniform").statistic)


@dataclass(frozen=True)
class InverseFSample:
    inv_f: np.ndarray
    rank_s: np.ndarray
    non_finite: int
    diagnostics: Optional[RankOneDiagnostics] = None


def sample_inverse_f(
    spec: ModelSpec,
    reps: int,
    seed: int,
    rank_tol: float = 0.0,
    workers: int = 1,
    progress: bool = False,
    diagnose_rank_one: bool = False,
) -> InverseFSample:
    """
    1/F for `reps` draws in replication order, one stacked batch per block.

    Draws are not rejected for small F; non-finite 1/F (F = 0 exactly) is dropped and counted.
    """

    def block(_b: int, start: int, stop: int, rng: np.random.Generator):
        batch = draw_batch(spec, rng, stop - start, rank_tol)
        with np.errstate(divide="ignore"):
            inv_f = 1.0 / batch.f
        diagnostics = rank_one_diagnostics(batch, spec.theta) if diagnose_rank_one else None
        return inv_f, batch.rank_s, diagnostics

    results = map_blocks(block, reps, seed, workers, progress)
    inv_f = np.concatenate([r[0] for r in results])
    ranks = np.concatenate([r[1] for r in results])
    finite = np.isfinite(inv_f)
    diagnostics = RankOneDiagnostics.merge([r[2] for r in results]) if diagnose_rank_one else None
    return InverseFSample(inv_f[finite], ranks[finite], int(np.sum(~finite)), diagnostics)


class TailReport(Payload):
    """
    Running means, Hill estimate and verdict for 1/F.

    Attributes:
        running_means (list): (N, mean of 1/F over the first N draws), N strictly increasing.
        hill_alpha (float): Estimated tail index of 1/F.
        hill_se (float): Its standard error.
        hill_k (int): Order statistics used, below the sample size.
        stabilized (bool): Last running mean within STABILITY_SE SE of the first.
        verdict (str): "finite-mean-consistent", "infinite-mean-consistent" or "inconclusive".
    """

    csv_header = constants.TAIL_HEADER

    def __init__(
        self,
        spec: ModelSpec,
        sample: InverseFSample,
        expected_verdict: str,
        bound_final: Optional[float] = None,
    ) -> None:
        self.spec = spec
        self.sample = sample
        self.expected_verdict = expected_verdict
        self.bound_final = bound_final
        grid = decade_grid(sample.inv_f.size, start=constants.MIN_REPS)
        self.running_means = running_means(sample.inv_f, grid)
        self.stabilized = is_stable(sample.inv_f, grid, config.STABILITY_SE)
        hill = hill_estimator(sample.inv_f)
        self.hill_alpha, self.hill_se, self.hill_k = hill.alpha, hill.se, hill.k
        self.verdict = verdict(hill, self.stabilized)
        if self.verdict == constants.VERDICT_INCONCLUSIVE:
            logger.warning(
                "Verdict is inconclusive: hill_alpha + %s SE = %.3f but stabilized = %s.",
                config.VERDICT_SE, hill.alpha + config.VERDICT_SE * hill.se, self.stabilized,
            )
        self.mean, self.mean_se = mean_and_se(sample.inv_f)
        self.conditional_ks = None if sample.diagnostics is None else conditional_law_ks(sample.diagnostics.pit)

    def findings(self) -> List[str]:
        found = []
        if self.verdict not in (self.expected_verdict, constants.VERDICT_INCONCLUSIVE):
            found.append(f"verdict is {self.verdict}, expected {self.expected_verdict}")
        diagnostics = self.sample.diagnostics
        if diagnostics is not None:
            if not diagnostics.ok:
                found.append(
                    f"rank-one closed forms failed: rank_ok={diagnostics.rank_ok}, "
                    f"pinv error {diagnostics.max_pinv_error:.3g}, F error {diagnostics.max_f_error:.3g}"
                )
            if self.conditional_ks >= 0.02:
                found.append(f"conditional chi-squared law rejected: KS statistic {self.conditional_ks:.4f}")
        if self.bound_final is not None and not self.mean < self.bound_final:
            found.append(f"E[1/F] estimate {self.mean:.6g} is not below {self.bound_final:.6g}")
        return found

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "n": self.spec.n,
            "p": self.spec.p,
            "theta": self.spec.theta,
            "reps": int(self.sample.inv_f.size + self.sample.non_finite),
            "non_finite_dropped": self.sample.non_finite,
            "rank_counts": {str(r): int(c) for r, c in zip(*np.unique(self.sample.rank_s, return_counts=True))},
            "running_means": self.running_means,
            "mean_inv_f": self.mean,
            "mean_inv_f_se": self.mean_se,
            "hill_alpha": self.hill_alpha,
            "hill_se": self.hill_se,
            "hill_k": self.hill_k,
            "stabilized": self.stabilized,
            "verdict": self.verdict,
            "verdict_policy": constants.VERDICT_POLICY.format(se=config.VERDICT_SE, stable=config.STABILITY_SE),
        }
        diagnostics = self.sample.diagnostics
        if diagnostics is not None:
            out["rank_one"] = {
                "rank_ok": diagnostics.rank_ok,
                "max_pinv_error": diagnostics.max_pinv_error,
                "max_f_error": diagnostics.max_f_error,
                "conditional_ks": self.conditional_ks,
            }
        if self.bound_final is not None:
            out["bound_final"] = self.bound_final
        return out

    def csv_rows(self):
        for i, (value, rank) in enumerate(zip(self.sample.inv_f, self.sample.rank_s)):
            yield i, float(value), int(rank)


def _check_reps(reps: int) -> None:
    if reps < constants.MIN_REPS:
        raise DomainError(f"reps must be >= {constants.MIN_REPS}, got {reps}.")


def run_infinite_demo(
    reps: int,
    seed: int,
    rank_tol: float = 0.0,
    workers: int = 1,
    progress: bool = False,
) -> TailReport:
    """1/F under n = 1, p = 2, θ = (1, 1), Σ = I, where rank(S) = 1 and E[1/F] = +∞."""
    _check_reps(reps)
    spec = ModelSpec.identity(constants.DEMO_N, constants.DEMO_P, theta=np.array(constants.DEMO_THETA))
    sample = sample_inverse_f(spec, reps, seed, rank_tol, workers, progress, diagnose_rank_one=True)
    report = TailReport(spec, sample, constants.VERDICT_INFINITE)
    logger.info("Rank-one demo: hill_alpha = %.3f +- %.3f, %s.", report.hill_alpha, report.hill_se, report.verdict)
    return report


def run_finite_contrast(
    reps: int,
    seed: int,
    rank_tol: float = 0.0,
    workers: int = 1,
    progress: bool = False,
) -> TailReport:
    """The same pipeline at n = 3, p = 5, θ = 0, Σ = I, where E[1/F] is finite."""
    _check_reps(reps)
    spec = ModelSpec.identity(constants.CONTRAST_N, constants.CONTRAST_P)
    sample = sample_inverse_f(spec, reps, seed, rank_tol, workers, progress)
    report = TailReport(spec, sample, constants.VERDICT_FINITE, bound_final(spec.sigma, spec.n, spec.p))
    logger.info("Contrast: hill_alpha = %.3f +- %.3f, %s.", report.hill_alpha, report.hill_se, report.verdict)
    return report
