"""
The shrinkage matrices G and H and the divergence of Ỹ ↦ ỸH.

With S = YᵀY, F = XᵀS⁺X and A the symmetric root of Σ:

    G = r²(F)/F² · S⁺XXᵀS⁺S,   H = A·G·A⁻¹,   Ỹ = Y·A⁻¹,

and the divergence of vec(ỸH) with respect to vec(Ỹ) has the closed form

    r²(F)/F · (n + p − 2·tr(SS⁺) + 3) − 4·r(F)·r′(F).

`divergence_finite_difference` evaluates the same quantity by central
differences so the closed form can be checked draw by draw.
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg as sla

import config
from base.payload import Payload
from exceptions import DegenerateInputError, DomainError, InvalidInputError, UnstablePointError
from linalg import as_dense, pinv_with_rank, sym_sqrt_pd
from sampling import ModelSpec, draw, gram, mean_and_se, whiten
from sampling.streams import map_blocks

from . import constants
from .shrinkage import ShrinkageFn

logger = logging.getLogger(__name__)

EPS = np.finfo(np.float64).eps


def _check_pair(x, s) -> Tuple[np.ndarray, np.ndarray]:
    x = as_dense(x, "x", ndim=1)
    s = as_dense(s, "S")
    if x.ndim != 1 or s.shape != (x.size, x.size):
        raise InvalidInputError(f"x of shape {x.shape} does not match S of shape {s.shape}.")
    return x, s


def _f_value(x: np.ndarray, s_pinv: np.ndarray) -> float:
    f = max(0.0, float(x @ s_pinv @ x))
    if f <= config.F_FLOOR:
        raise DegenerateInputError(f"F = {f!r} is not above the floor {config.F_FLOOR}; G is undefined.")
    return f


def _g_h(x: np.ndarray, s: np.ndarray, a: np.ndarray, r: ShrinkageFn, rank_tol: float):
    s_pinv, rank = pinv_with_rank(s, rank_tol)
    f = _f_value(x, s_pinv)
    u = s_pinv @ x
    g = float(r.eval(f)) ** 2 / f**2 * np.outer(u, u @ s)
    # H = A G A⁻¹, i.e. Hᵀ = A⁻¹ Gᵀ A
    h = sla.solve(a, g.T @ a, assume_a="pos").T
    return g, h, rank


def build_G_H(x, s, sigma, r: ShrinkageFn, rank_tol: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """
    G = r²(F)/F²·S⁺XXᵀS⁺S and H = A·G·A⁻¹ with A = sym_sqrt_pd(sigma).

    Raises:
        DegenerateInputError: If F is not above F_FLOOR (x = 0 or x ⟂ range(S⁺)).
        DomainError: If sigma is not SPD.
    """
    x, s = _check_pair(x, s)
    g, h, _ = _g_h(x, s, sym_sqrt_pd(sigma), r, rank_tol)
    return g, h


def _closed_form(x: np.ndarray, s: np.ndarray, r: ShrinkageFn, n: int, rank_tol: float):
    s_pinv, rank = pinv_with_rank(s, rank_tol)
    f = _f_value(x, s_pinv)
    coeff = n + x.size - 2.0 * float(np.trace(s @ s_pinv)) + 3.0
    rf = float(r.eval(f))
    value = rf**2 / f * coeff - 4.0 * rf * float(r.deriv(f))
    return value, f, rank, coeff


def divergence_closed_form(x, s, sigma, r: ShrinkageFn, n: int, rank_tol: float = 0.0) -> float:
    """
    r²(F)/F·(n + p − 2·tr(SS⁺) + 3) − 4·r(F)·r′(F).

    Σ does not enter the formula; it is only checked to be p × p.

    Raises:
        DegenerateInputError: If F is not above F_FLOOR.
    """
    x, s = _check_pair(x, s)
    if np.shape(sigma) != s.shape:
        raise InvalidInputError(f"sigma must be {s.shape[0]} x {s.shape[0]}, got shape {np.shape(sigma)}.")
    return _closed_form(x, s, r, n, rank_tol)[0]


def default_step(y_tilde: np.ndarray) -> np.ndarray:
    """cbrt(eps)·max(1, |Ỹᵢⱼ|) per entry."""
    return np.cbrt(EPS) * np.maximum(1.0, np.abs(y_tilde))


def finite_difference_divergence(
    field: Callable[[np.ndarray], np.ndarray],
    y_tilde,
    h: Optional[float] = None,
) -> float:
    """
    Σᵢⱼ ∂field(Ỹ)ᵢⱼ/∂Ỹᵢⱼ by central differences.

    Args:
        field: Map from an n × p matrix to an n × p matrix.
        y_tilde (array_like): Evaluation point.
        h (float, optional): Step for every entry. Defaults to `default_step`.

    Raises:
        InvalidInputError: If h <= 0.
        UnstablePointError: Re-raised from `field` with the perturbed entry attached.
    """
    y_tilde = as_dense(y_tilde, "y_tilde")
    if h is not None and not h > 0:
        raise InvalidInputError(f"The finite-difference step must be > 0, got {h!r}.")
    steps = default_step(y_tilde) if h is None else np.full(y_tilde.shape, float(h))

    total = 0.0
    for (i, j), step in np.ndenumerate(steps):
        plus = y_tilde.copy()
        minus = y_tilde.copy()
        plus[i, j] += step
        minus[i, j] -= step
        try:
            total += (field(plus)[i, j] - field(minus)[i, j]) / (2.0 * step)
        except UnstablePointError as e:
            if e.entry is not None:
                raise
            raise UnstablePointError(e.message, entry=(i, j)) from e
    return float(total)


def divergence_finite_difference(
    x,
    y_tilde,
    sigma,
    r: ShrinkageFn,
    n: int,
    h: Optional[float] = None,
    rank_tol: float = 0.0,
) -> float:
    """
    Central-difference divergence of Ỹ ↦ ỸH, rebuilding Y = ỸA, S and H at every perturbed point.

    Raises:
        InvalidInputError: If h <= 0 or Ỹ is not n × p.
        UnstablePointError: If the rank of S changes under a perturbation.
        DegenerateInputError: If F drops to the floor at a perturbed point.
    """
    x = as_dense(x, "x", ndim=1)
    y_tilde = as_dense(y_tilde, "y_tilde")
    if y_tilde.shape != (n, x.size):
        raise InvalidInputError(f"y_tilde must be {n} x {x.size}, got shape {y_tilde.shape}.")
    a = sym_sqrt_pd(sigma)
    _, _, base_rank = _g_h(x, gram(y_tilde @ a), a, r, rank_tol)

    def field(point: np.ndarray) -> np.ndarray:
        _, h_mat, rank = _g_h(x, gram(point @ a), a, r, rank_tol)
        if rank != base_rank:
            raise UnstablePointError(f"rank of S moved from {base_rank} to {rank} under perturbation.")
        return point @ h_mat

    return finite_difference_divergence(field, y_tilde, h)


@dataclass(frozen=True)
class DivergenceReport:
    """
    Closed form against the finite-difference oracle at one draw.

    Attributes:
        closed_form (float): The closed-form divergence.
        finite_diff (float): The finite-difference divergence.
        rel_err (float): |closed_form − finite_diff| / max(1, |closed_form|).
        f_value (float): F at the draw.
        rank_s (int): Numeric rank of S.
        coeff (float): n + p − 2·tr(SS⁺) + 3.
    """

    closed_form: float
    finite_diff: float
    rel_err: float
    f_value: float
    rank_s: int
    coeff: float

    @classmethod
    def build(cls, closed_form, finite_diff, f_value, rank_s, coeff) -> "DivergenceReport":
        rel_err = abs(closed_form - finite_diff) / max(1.0, abs(closed_form))
        return cls(float(closed_form), float(finite_diff), float(rel_err), float(f_value), int(rank_s), float(coeff))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "f_value": self.f_value,
            "rank_s": self.rank_s,
            "coeff": self.coeff,
            "closed_form": self.closed_form,
            "finite_diff": self.finite_diff,
            "rel_err": self.rel_err,
        }


def divergence_report(
    x,
    y_tilde,
    spec: ModelSpec,
    r: ShrinkageFn,
    h: Optional[float] = None,
    rank_tol: float = 0.0,
) -> DivergenceReport:
    x = as_dense(x, "x", ndim=1)
    y_tilde = as_dense(y_tilde, "y_tilde")
    s = gram(y_tilde @ spec.sigma_sqrt)
    closed, f, rank, coeff = _closed_form(x, s, r, spec.n, rank_tol)
    finite = divergence_finite_difference(x, y_tilde, spec.sigma, r, spec.n, h, rank_tol)
    return DivergenceReport.build(closed, finite, f, rank, coeff)


def divergence_bound(f_value: float, coeff: float, r: ShrinkageFn) -> float:
    """Triangle-inequality bound C₁²/F·|n + p − 2tr(SS⁺) + 3| + 4·C₁·C₂ on |divergence|."""
    if not f_value > 0:
        raise DegenerateInputError(f"F must be > 0, got {f_value!r}.")
    return r.c1**2 / f_value * abs(coeff) + 4.0 * r.c1 * r.c2


class DivergenceStudy(Payload):
    """
    Closed form against the oracle over many draws.

    Draws where the rank moved under perturbation, or F fell to the floor, are
    resampled from the same block stream and counted. A finding is raised when
    fewer than AGREEMENT_FRACTION of the draws agree within AGREEMENT_TOL,
    together with the mean signed residual closed_form − finite_diff as
    evidence of a sign or coefficient mismatch, or when the triangle bound
    fails on some draw.
    """

    csv_header = constants.DIVERGENCE_HEADER

    def __init__(
        self,
        spec: ModelSpec,
        r: ShrinkageFn,
        h: Optional[float],
        reports: List[DivergenceReport],
        rejected_unstable: int,
        rejected_f_floor: int,
    ) -> None:
        self.spec = spec
        self.r = r
        self.h = h
        self.reports = reports
        self.rejected_unstable = rejected_unstable
        self.rejected_f_floor = rejected_f_floor
        agree = [rep.rel_err < config.AGREEMENT_TOL for rep in reports]
        self.agreement_fraction = sum(agree) / len(reports) if reports else 1.0
        residuals = [rep.closed_form - rep.finite_diff for rep in reports]
        self.mean_signed_residual, self.residual_se = mean_and_se(residuals) if reports else (0.0, 0.0)
        self.bound_violations = sum(
            1 for rep in reports if abs(rep.closed_form) > divergence_bound(rep.f_value, rep.coeff, r) * (1 + 1e-12)
        )

    def findings(self) -> List[str]:
        found = []
        if self.agreement_fraction < config.AGREEMENT_FRACTION:
            found.append(
                f"closed form agrees with the finite-difference oracle on {self.agreement_fraction:.1%} of draws; "
                f"mean signed residual {self.mean_signed_residual:.6g} (SE {self.residual_se:.3g})"
            )
        if self.bound_violations:
            found.append(f"|divergence| exceeds the triangle bound on {self.bound_violations} draws")
        return found

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.spec.n,
            "p": self.spec.p,
            "shrinkage": {"name": self.r.name, "c1": self.r.c1, "c2": self.r.c2},
            "h": "auto" if self.h is None else self.h,
            "reps": len(self.reports),
            "agreement_tol": config.AGREEMENT_TOL,
            "agreement_fraction": self.agreement_fraction,
            "mean_signed_residual": self.mean_signed_residual,
            "mean_signed_residual_se": self.residual_se,
            "rejected_unstable": self.rejected_unstable,
            "rejected_f_floor": self.rejected_f_floor,
            "bound_violations": self.bound_violations,
            "reports": [rep.to_dict() for rep in self.reports],
        }

    def csv_rows(self):
        for i, rep in enumerate(self.reports):
            yield (i, rep.f_value, rep.rank_s, rep.coeff, rep.closed_form, rep.finite_diff, rep.rel_err)


def run_divergence_study(
    spec: ModelSpec,
    r: ShrinkageFn,
    reps: int,
    seed: int,
    h: Optional[float] = None,
    rank_tol: float = 0.0,
    workers: int = 1,
    progress: bool = False,
) -> DivergenceStudy:
    """
    Draw (X, Y) `reps` times, whiten Y and compare the closed form with the oracle.

    Raises:
        DomainError: If reps < 1.
    """
    if reps < 1:
        raise DomainError(f"reps must be >= 1, got {reps}.")
    if h is not None and not h > 0:
        raise InvalidInputError(f"The finite-difference step must be > 0, got {h!r}.")

    def block(b: int, start: int, stop: int, rng: np.random.Generator):
        reports, unstable, floor = [], 0, 0
        for rep in range(start, stop):
            for _ in range(constants.MAX_RESAMPLES):
                sample = draw(spec, rng, seed_path=(seed, b, rep), rank_tol=rank_tol)
                try:
                    reports.append(divergence_report(sample.x, whiten(sample.y, spec), spec, r, h, rank_tol))
                    break
                except UnstablePointError as e:
                    logger.debug("Replication %d: unstable at entry %s, resampling.", rep, e.entry)
                    unstable += 1
                except DegenerateInputError:
                    logger.debug("Replication %d: F below floor, resampling.", rep)
                    floor += 1
            else:
                raise DegenerateInputError(f"Replication {rep} was rejected {constants.MAX_RESAMPLES} times.")
        return reports, unstable, floor

    results = map_blocks(block, reps, seed, workers, progress)
    reports = [rep for chunk, _, _ in results for rep in chunk]
    study = DivergenceStudy(
        spec,
        r,
        h,
        reports,
        rejected_unstable=sum(u for _, u, _ in results),
        rejected_f_floor=sum(f for _, _, f in results),
    )
    logger.info("Closed form agrees on %.1f%% of %d draws.", 100 * study.agreement_fraction, reps)
    return study
