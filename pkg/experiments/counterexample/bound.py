"""
The claimed bound  Xᵀ(T⁺TA)⁺(T⁺TA)X ≤ Xᵀ(T⁺TA)⁺(AT⁺T)⁺X · Xᵀ(AT⁺T)(T⁺TA)X,
its exact refutation and a randomised scan for further violations.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np

import config
from base.payload import Payload
from exceptions import DomainError
from linalg import RationalMatrix, as_dense, numeric_rank, pinv_exact, pinv_numeric, symmetrize
from sampling.streams import map_blocks

from . import constants

logger = logging.getLogger(__name__)

Number = Union[Fraction, float]
Case = Tuple[np.ndarray, np.ndarray, np.ndarray]
Sampler = Callable[[np.random.Generator, int], Case]


@dataclass(frozen=True)
class BoundCheck:
    """
    Both sides of the claimed bound.

    Attributes:
        lhs (Fraction | float): Xᵀ(T⁺TA)⁺(T⁺TA)X.
        rhs (Fraction | float): Xᵀ(T⁺TA)⁺(AT⁺T)⁺X · Xᵀ(AT⁺T)(T⁺TA)X.
        holds (bool): Whether lhs ≤ rhs (numerically: up to SCAN_VIOLATION_TOL·max(1, |rhs|)).
    """

    lhs: Number
    rhs: Number
    holds: bool

    @property
    def margin(self) -> float:
        return float(self.lhs - self.rhs)

    def to_dict(self) -> Dict[str, Any]:
        return {"lhs": self.lhs, "rhs": self.rhs, "holds": self.holds}


def counterexample_matrices() -> Tuple[RationalMatrix, RationalMatrix, RationalMatrix]:
    """(T, A = I₄, X = e₁) of the counter-example, exactly."""
    t = RationalMatrix.from_rows(constants.T_ROWS, constants.T_SCALE)
    return t, RationalMatrix.identity(4), RationalMatrix.column(constants.X_VECTOR)


def _products(t, a, pinv):
    """The projector products of the bound, for any matrix type with @ and a pinv function."""
    t_pinv = pinv(t)
    ttp = t_pinv @ t
    left = ttp @ a
    right = a @ ttp
    left_pinv = pinv(left)
    right_pinv = pinv(right)
    return {
        "T+": t_pinv,
        "T+T": ttp,
        "T+TA": left,
        "AT+T": right,
        "(T+TA)+": left_pinv,
        "(AT+T)+": right_pinv,
        "(T+TA)+(AT+T)+": left_pinv @ right_pinv,
        "(T+TA)+(T+TA)": left_pinv @ left,
        "(AT+T)(T+TA)": right @ left,
    }


def exact_intermediates() -> Dict[str, RationalMatrix]:
    t, a, _ = counterexample_matrices()
    return _products(t, a, pinv_exact)


def printed_intermediates() -> Dict[str, RationalMatrix]:
    """The matrices as printed in the counter-example."""
    half = RationalMatrix.from_rows(constants.HALF_BLOCKS, constants.HALF_BLOCKS_SCALE)
    printed = {name: half for name in exact_intermediates()}
    printed["T+"] = RationalMatrix.from_rows(constants.T_PINV_ROWS, constants.T_PINV_SCALE)
    return printed


def exact_bound_check(t: RationalMatrix, a: RationalMatrix, x: RationalMatrix) -> BoundCheck:
    """Evaluate both sides in exact rational arithmetic; x is a column matrix."""
    m = _products(t, a, pinv_exact)
    lhs = (x.T @ m["(T+TA)+(T+TA)"] @ x)[0, 0]
    rhs = (x.T @ m["(T+TA)+(AT+T)+"] @ x)[0, 0] * (x.T @ m["(AT+T)(T+TA)"] @ x)[0, 0]
    return BoundCheck(lhs=lhs, rhs=rhs, holds=lhs <= rhs)


def verify_counterexample() -> BoundCheck:
    """lhs = 1/2 and rhs = 1/4 for the counter-example matrices, with zero error."""
    return exact_bound_check(*counterexample_matrices())


def bound_check(t, a, x, rank_tol: float = 0.0) -> BoundCheck:
    """Floating-point BoundCheck for arbitrary T (symmetric), A (SPD) and vector X."""
    t = as_dense(t, "T")
    a = as_dense(a, "A")
    x = as_dense(x, "X", ndim=1)
    m = _products(t, a, lambda mat: pinv_numeric(mat, rank_tol))
    lhs = float(x @ m["(T+TA)+(T+TA)"] @ x)
    rhs = float(x @ m["(T+TA)+(AT+T)+"] @ x) * float(x @ m["(AT+T)(T+TA)"] @ x)
    holds = not lhs > rhs + config.SCAN_VIOLATION_TOL * max(1.0, abs(rhs))
    return BoundCheck(lhs=lhs, rhs=rhs, holds=holds)


def _random_orthogonal(rng: np.random.Generator, p: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((p, p)))
    return q * np.sign(np.diag(r))


def random_case(rng: np.random.Generator, p: int) -> Case:
    """
    T = QΛQᵀ with 1..p−1 zero eigenvalues (uniformly many), a random SPD A and a Gaussian X.
    """
    zeros = int(rng.integers(1, p))
    spectrum = rng.uniform(constants.EIGEN_LOW, constants.EIGEN_HIGH, size=p)
    spectrum[p - zeros:] = 0.0
    q = _random_orthogonal(rng, p)
    t = symmetrize((q * spectrum) @ q.T, "T")
    q = _random_orthogonal(rng, p)
    a = symmetrize((q * rng.uniform(constants.EIGEN_LOW, constants.EIGEN_HIGH, size=p)) @ q.T, "A")
    x = rng.standard_normal(p)
    return t, a, x


def counterexample_case(rng: np.random.Generator, p: int) -> Case:
    """The counter-example matrices as floats, for injection into the scan (p must be 4)."""
    if p != 4:
        raise DomainError(f"The counter-example is 4-dimensional, got p = {p}.")
    t, a, x = counterexample_matrices()
    return t.to_numpy(), a.to_numpy(), x.to_numpy()[:, 0]


@dataclass(frozen=True)
class ScanTrial:
    trial: int
    rank_t: int
    check: BoundCheck


class ScanResult(Payload):
    """
    Outcome of `scan_cw_bound`.

    Attributes:
        p (int): Dimension of the scanned matrices.
        master_seed (int): Seed of the scan.
        records (List[ScanTrial]): One record per trial, in trial order.
        violations (int): Trials where the bound fails.
        violation_fraction (float): violations / trials.
        worst (ScanTrial | None): The trial with the largest lhs − rhs.
    """

    csv_header = constants.SCAN_HEADER

    def __init__(self, p: int, master_seed: int, records: List[ScanTrial]) -> None:
        self.p = p
        self.master_seed = master_seed
        self.records = records
        self.violations = sum(1 for r in records if not r.check.holds)
        self.violation_fraction = self.violations / len(records) if records else 0.0
        self.worst: Optional[ScanTrial] = None
        for record in records:
            if self.worst is None or record.check.margin > self.worst.check.margin:
                self.worst = record

    def to_dict(self) -> Dict[str, Any]:
        worst = None
        if self.worst is not None:
            worst = {"trial": self.worst.trial, "rank_t": self.worst.rank_t, **self.worst.check.to_dict()}
        return {
            "p": self.p,
            "trials": len(self.records),
            "violations": self.violations,
            "violation_fraction": self.violation_fraction,
            "worst_trial": worst,
        }

    def csv_rows(self):
        for r in self.records:
            yield r.trial, r.rank_t, r.check.lhs, r.check.rhs, r.check.holds


def scan_cw_bound(
    trials: int,
    p: int,
    seed: int,
    sampler: Optional[Sampler] = None,
    workers: int = 1,
    progress: bool = False,
) -> ScanResult:
    """
    Evaluate the claimed bound on random (T, A, X) and collect violations.

    Args:
        trials (int): Number of trials, >= 1.
        p (int): Dimension, >= 2.
        seed (int): Master seed; trial t draws from the stream of its block.
        sampler (callable, optional): `sampler(rng, p) -> (T, A, X)`. Defaults to `random_case`.

    Raises:
        DomainError: If p < 2 or trials < 1.
    """
    if p < 2:
        raise DomainError(f"p must be >= 2, got {p}.")
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}.")
    sampler = sampler or random_case

    def block(_b: int, start: int, stop: int, rng: np.random.Generator) -> List[ScanTrial]:
        out = []
        for trial in range(start, stop):
            t, a, x = sampler(rng, p)
            out.append(ScanTrial(trial=trial, rank_t=numeric_rank(t), check=bound_check(t, a, x)))
        return out

    records = [r for chunk in map_blocks(block, trials, seed, workers, progress) for r in chunk]
    result = ScanResult(p, seed, records)
    logger.info("Bound violated in %d of %d trials.", result.violations, trials)
    return result
