"""
Monte Carlo checks of the bound chain behind E[1/F] < ∞.

With R = rank(S), X₍₁₎ the first R coordinates of X, A²(j) the leading j × j
block of Σ and U = A⁻¹(R)X₍₁₎, the chain uses

    λ†min(S⁺)·X₍₁₎ᵀX₍₁₎ ≤ XᵀS⁺X ≤ λ†max(S⁺)·X₍₁₎ᵀX₍₁₎               (spectral sandwich)
    λmin(A²(R))·UᵀU ≤ UᵀA²(R)U ≤ λmax(A²(R))·UᵀU                     (Rayleigh sandwich)
    1/F ≤ λ†max(S)·λmax(A⁻²(R))/UᵀU                                   (low sides of both)
    UᵀU | R ~ χ²_R(δ_R),  E[1/(UᵀU) | R] ≤ 1 for R ≥ 3
    E[λ†max(S)] ≤ λmax(Σ)·n·p
    E[1/F] ≤ n·p·λmax(Σ)·Σ_{j=3..p} tr(A⁻²(j))

The Rayleigh sandwich is an algebraic fact and is checked on every draw. The
spectral sandwich, and the bound on 1/F built from its low side, are only
measured per draw; the bound on 1/F is checked in expectation.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import numpy as np
from scipy import linalg as sla
from scipy import stats

import config
from base.payload import Payload
from exceptions import DegenerateInputError, DomainError
from linalg import as_dense, spectral_summary, sym_sqrt_pd, symmetrize
from sampling import ModelSpec, compute_F, decade_grid, is_stable, mean_and_se, running_means
from sampling.model import DrawBatch, draw_batch
from sampling.streams import map_blocks

from . import constants

logger = logging.getLogger(__name__)


def principal_block(sigma, j: int) -> np.ndarray:
    """A²(j) = C(j)·Σ·C(j)ᵀ, the leading j × j block of Σ."""
    sigma = symmetrize(sigma, "sigma")
    if not 1 <= j <= sigma.shape[0]:
        raise DomainError(f"j must be in 1..{sigma.shape[0]}, got {j}.")
    return sigma[:j, :j]


def bound_lambda(sigma, n: int, p: int) -> float:
    """λmax(Σ)·n·p."""
    return float(sla.eigh(symmetrize(sigma, "sigma"), eigvals_only=True)[-1]) * n * p


def bound_final(sigma, n: int, p: int) -> float:
    """n·p·λmax(Σ)·Σ_{j=3..p} tr(A⁻²(j)); tr(A⁻²(j)) is the trace of the inverse leading block."""
    if p < constants.FIRST_SUMMED_BLOCK:
        raise DomainError(f"The final bound needs p >= {constants.FIRST_SUMMED_BLOCK}, got {p}.")
    traces = 0.0
    for j in range(constants.FIRST_SUMMED_BLOCK, p + 1):
        block = principal_block(sigma, j)
        traces += float(np.trace(sla.inv(block, check_finite=False)))
    return bound_lambda(sigma, n, p) * traces


def _le(a: float, b: float) -> bool:
    return a <= b + config.SANDWICH_TOL * max(abs(a), abs(b))


class _BlockRoots:
    """A²(j), A(j) and the eigenvalue range of A²(j), computed once per j."""

    def __init__(self, sigma: np.ndarray) -> None:
        self.sigma = sigma
        self._cache: Dict[int, Tuple[np.ndarray, np.ndarray, float, float]] = {}

    def __call__(self, j: int) -> Tuple[np.ndarray, np.ndarray, float, float]:
        if j not in self._cache:
            block = principal_block(self.sigma, j)
            w = sla.eigh(block, eigvals_only=True)
            self._cache[j] = (block, sym_sqrt_pd(block), float(w[0]), float(w[-1]))
        return self._cache[j]

    def u_vector(self, x: np.ndarray, rank: int) -> np.ndarray:
        root = self(rank)[1]
        return sla.solve(root, x[:rank], assume_a="pos")


@dataclass(frozen=True)
class SandwichCheck:
    """
    Both sandwich chains at one draw.

    Attributes:
        rank_s (int): R.
        f_value (float): XᵀS⁺X, the middle of the first chain.
        spectral_low, spectral_high (float): λ†min(S⁺)·X₍₁₎ᵀX₍₁₎ and λ†max(S⁺)·X₍₁₎ᵀX₍₁₎.
        spectral_ok (bool): spectral_low ≤ f_value ≤ spectral_high within 1e-9 relative.
        rayleigh_low, rayleigh_mid, rayleigh_high (float): λmin(A²(R))·UᵀU, UᵀA²(R)U, λmax(A²(R))·UᵀU.
        rayleigh_ok (bool): rayleigh_low ≤ rayleigh_mid ≤ rayleigh_high within 1e-9 relative.
        u_norm (float): UᵀU.
        inv_f_bound (float): λ†max(S)·λmax(A⁻²(R))/UᵀU.
        inv_f_ok (bool): 1/f_value ≤ inv_f_bound within 1e-9 relative.
    """

    rank_s: int
    f_value: float
    spectral_low: float
    spectral_high: float
    spectral_ok: bool
    rayleigh_low: float
    rayleigh_mid: float
    rayleigh_high: float
    rayleigh_ok: bool
    u_norm: float
    inv_f_bound: float
    inv_f_ok: bool


def _sandwich(x, f_value, s_eigenvalues, rank, roots: _BlockRoots) -> SandwichCheck:
    if rank == 0:
        raise DegenerateInputError("S has rank 0; the sandwich chains are undefined.")
    # nonzero eigenvalues of S⁺ are the reciprocals of the top R eigenvalues of S
    top = np.sort(s_eigenvalues)[::-1][:rank]
    x1 = x[:rank]
    head = float(x1 @ x1)
    spectral_low, spectral_high = head / top[0], head / top[-1]

    block, _, w_min, w_max = roots(rank)
    u = roots.u_vector(x, rank)
    u_norm = float(u @ u)
    rayleigh_mid = float(u @ block @ u)
    # λmax(A⁻²(R)) = 1/λmin(A²(R))
    inv_f_bound = float(top[0]) / (w_min * u_norm)
    return SandwichCheck(
        rank_s=int(rank),
        f_value=float(f_value),
        spectral_low=spectral_low,
        spectral_high=spectral_high,
        spectral_ok=_le(spectral_low, f_value) and _le(f_value, spectral_high),
        rayleigh_low=w_min * u_norm,
        rayleigh_mid=rayleigh_mid,
        rayleigh_high=w_max * u_norm,
        rayleigh_ok=_le(w_min * u_norm, rayleigh_mid) and _le(rayleigh_mid, w_max * u_norm),
        u_norm=u_norm,
        inv_f_bound=inv_f_bound,
        inv_f_ok=_le(1.0 / float(f_value), inv_f_bound),
    )


def check_sandwich_ineq(x, s, sigma, rank_tol: float = 0.0) -> SandwichCheck:
    """
    Evaluate both sandwich chains for one (x, S).

    Raises:
        DegenerateInputError: If S has rank 0.
        DomainError: If S is not symmetric or sigma is not SPD.
    """
    x = as_dense(x, "x", ndim=1)
    try:
        summary = spectral_summary(s, rank_tol)
    except DegenerateInputError:
        raise DegenerateInputError("S has rank 0; the sandwich chains are undefined.") from None
    f_value = compute_F(x, s, rank_tol)
    return _sandwich(x, f_value, np.asarray(summary.eigenvalues), summary.rank, _BlockRoots(symmetrize(sigma, "sigma")))


def delta_r(spec: ModelSpec, rank: int) -> float:
    """δ_R = ‖A⁻¹(R)·C(R)θ‖²."""
    root = sym_sqrt_pd(principal_block(spec.sigma, rank))
    v = sla.solve(root, spec.theta[:rank], assume_a="pos")
    return float(v @ v)


def _u_norm_law(rank: int, delta: float):
    return stats.ncx2(rank, delta) if delta > 0 else stats.chi2(rank)


def _sample_blocks(spec: ModelSpec, reps: int, seed: int, rank_tol: float, workers: int, progress: bool, per_draw):
    """Run `per_draw(batch, eigenvalues of S, i)` on every draw, resampling F ≤ F_FLOOR, and count the rejections."""

    def block(b: int, start: int, stop: int, rng: np.random.Generator):
        batch = draw_batch(spec, rng, stop - start, rank_tol)
        s_eigenvalues = np.linalg.eigvalsh(batch.s)
        out, rejected = [], 0
        for i in range(len(batch)):
            one, w, k = batch, s_eigenvalues, i
            tries = 0
            while not one.f[k] > config.F_FLOOR:
                tries += 1
                if tries > constants.MAX_RESAMPLES:
                    raise DegenerateInputError(
                        f"Replication {start + i} was rejected {constants.MAX_RESAMPLES} times."
                    )
                one = draw_batch(spec, rng, 1, rank_tol)
                w, k = np.linalg.eigvalsh(one.s), 0
            rejected += tries
            out.append(per_draw(one, w[k], k))
        return out, rejected

    results = map_blocks(block, reps, seed, workers, progress)
    return [item for chunk, _ in results for item in chunk], sum(r for _, r in results)


@dataclass(frozen=True)
class LedgerRecord:
    rank_s: int
    inv_f: float
    lambda_max: float
    trace_ss_pinv: float
    sandwich: SandwichCheck


class BoundLedger(Payload):
    """
    Monte Carlo estimates set against their analytic bounds.

    Attributes:
        e_inv_f_hat, e_inv_f_se (float): Estimate of E[1/F] and its standard error.
        bound_final (float): n·p·λmax(Σ)·Σ_{j=3..p} tr(A⁻²(j)).
        e_lambda_max_hat, e_lambda_max_se (float): Estimate of E[λ†max(S)] and its standard error.
        bound_lambda (float): λmax(Σ)·n·p.
        per_draw_sandwich_ok (bool): The spectral sandwich held on every draw.
        spectral_pass_fraction (float): Fraction of draws where it held.
        rayleigh_ok (bool): The Rayleigh sandwich held on every draw.
        per_draw_inv_f_ok (bool): 1/F ≤ λ†max(S)·λmax(A⁻²(R))/UᵀU held on every draw.
        inv_f_pass_fraction (float): Fraction of draws where it held.
        e_inv_f_bound_hat, e_inv_f_bound_se (float): Estimate of E[λ†max(S)·λmax(A⁻²(R))/UᵀU].
        inv_f_link_ok (bool): E[1/F] ≤ E[λ†max(S)·λmax(A⁻²(R))/UᵀU], unless the paired
            difference sits more than SE_MARGIN standard errors below zero.
        trace_ok (bool): tr(SS⁺) = min(n, p) within 1e-8 on every draw.
        e_inv_u_norm_hat, e_inv_u_norm_se (float): Estimate of E[1/(UᵀU)].
        u_norm_ks (float): KS statistic of UᵀU against χ²_R(δ_R) at the modal rank.
        running_means (list): (N, mean of 1/F over the first N draws).
        stabilized (bool): Last running mean within STABILITY_SE standard errors of the first.
    """

    csv_header = constants.LEDGER_HEADER

    def __init__(self, spec: ModelSpec, master_seed: int, records: List[LedgerRecord], rejected_f_floor: int) -> None:
        self.spec = spec
        self.master_seed = master_seed
        self.records = records
        self.rejected_f_floor = rejected_f_floor
        inv_f = np.array([r.inv_f for r in records])
        lam = np.array([r.lambda_max for r in records])
        u_norm = np.array([r.sandwich.u_norm for r in records])

        self.e_inv_f_hat, self.e_inv_f_se = mean_and_se(inv_f)
        self.e_lambda_max_hat, self.e_lambda_max_se = mean_and_se(lam)
        self.e_inv_u_norm_hat, self.e_inv_u_norm_se = mean_and_se(1.0 / u_norm)
        self.bound_final = bound_final(spec.sigma, spec.n, spec.p)
        self.bound_lambda = bound_lambda(spec.sigma, spec.n, spec.p)

        spectral = [r.sandwich.spectral_ok for r in records]
        self.per_draw_sandwich_ok = all(spectral)
        self.spectral_pass_fraction = sum(spectral) / len(records)
        self.rayleigh_ok = all(r.sandwich.rayleigh_ok for r in records)
        inv_f_ok = [r.sandwich.inv_f_ok for r in records]
        self.per_draw_inv_f_ok = all(inv_f_ok)
        self.inv_f_pass_fraction = sum(inv_f_ok) / len(records)
        inv_f_bound = np.array([r.sandwich.inv_f_bound for r in records])
        self.e_inv_f_bound_hat, self.e_inv_f_bound_se = mean_and_se(inv_f_bound)
        gap, gap_se = mean_and_se(inv_f_bound - inv_f)
        self.inv_f_link_ok = gap + config.SE_MARGIN * gap_se >= 0
        expected_rank = min(spec.n, spec.p)
        self.trace_ok = all(abs(r.trace_ss_pinv - expected_rank) <= 1e-8 for r in records)

        ranks = np.array([r.rank_s for r in records])
        self.modal_rank = int(np.bincount(ranks).argmax())
        self.delta_r = delta_r(spec, self.modal_rank)
        self.u_norm_ks = float(
            stats.kstest(u_norm[ranks == self.modal_rank], _u_norm_law(self.modal_rank, self.delta_r).cdf).statistic
        )

        grid = decade_grid(len(records), start=min(10_000, len(records)))
        self.running_means = running_means(inv_f, grid)
        self.stabilized = is_stable(inv_f, grid, config.STABILITY_SE)

    def findings(self) -> List[str]:
        found = []
        margin = config.SE_MARGIN
        if not self.e_lambda_max_hat + margin * self.e_lambda_max_se < self.bound_lambda:
            found.append(
                f"E[lambda_max(S)] estimate {self.e_lambda_max_hat:.6g} + {margin} SE is not below {self.bound_lambda:.6g}"
            )
        if not self.e_inv_f_hat + margin * self.e_inv_f_se < self.bound_final:
            found.append(f"E[1/F] estimate {self.e_inv_f_hat:.6g} + {margin} SE is not below {self.bound_final:.6g}")
        if not self.inv_f_link_ok:
            found.append(
                f"E[1/F] estimate {self.e_inv_f_hat:.6g} exceeds E[lambda_max(S) lambda_max(A^-2(R)) / U^T U] "
                f"estimate {self.e_inv_f_bound_hat:.6g} by more than {margin} SE"
            )
        if not self.stabilized:
            first, last = self.running_means[0], self.running_means[-1]
            found.append(
                f"running mean of 1/F moved from {first[1]:.6g} at N = {first[0]} to {last[1]:.6g} at N = {last[0]}, "
                f"more than {config.STABILITY_SE} SE"
            )
        if not self.trace_ok:
            found.append("tr(S S+) differs from min(n, p) on some draw")
        if not self.rayleigh_ok:
            found.append("the Rayleigh sandwich failed on some draw")
        if self.modal_rank >= constants.MIN_CHAIN_RANK and not self.e_inv_u_norm_hat <= 1 + 3 * self.e_inv_u_norm_se:
            found.append(f"E[1/(U^T U)] estimate {self.e_inv_u_norm_hat:.6g} exceeds 1 by more than 3 SE")
        return found

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.spec.n,
            "p": self.spec.p,
            "reps": len(self.records),
            "e_inv_f_hat": self.e_inv_f_hat,
            "e_inv_f_se": self.e_inv_f_se,
            "bound_final": self.bound_final,
            "e_lambda_max_hat": self.e_lambda_max_hat,
            "e_lambda_max_se": self.e_lambda_max_se,
            "bound_lambda": self.bound_lambda,
            "se_margin": config.SE_MARGIN,
            "per_draw_sandwich_ok": self.per_draw_sandwich_ok,
            "spectral_pass_fraction": self.spectral_pass_fraction,
            "rayleigh_ok": self.rayleigh_ok,
            "per_draw_inv_f_ok": self.per_draw_inv_f_ok,
            "inv_f_pass_fraction": self.inv_f_pass_fraction,
            "e_inv_f_bound_hat": self.e_inv_f_bound_hat,
            "e_inv_f_bound_se": self.e_inv_f_bound_se,
            "inv_f_link_ok": self.inv_f_link_ok,
            "trace_ok": self.trace_ok,
            "e_inv_u_norm_hat": self.e_inv_u_norm_hat,
            "e_inv_u_norm_se": self.e_inv_u_norm_se,
            "modal_rank": self.modal_rank,
            "delta_r": self.delta_r,
            "u_norm_ks": self.u_norm_ks,
            "running_means": self.running_means,
            "stabilized": self.stabilized,
            "stability_se": config.STABILITY_SE,
            "rejected_f_floor": self.rejected_f_floor,
        }

    def csv_rows(self):
        for i, r in enumerate(self.records):
            s = r.sandwich
            yield (i, r.rank_s, r.inv_f, r.lambda_max, 1.0 / s.u_norm, r.trace_ss_pinv, s.spectral_ok, s.rayleigh_ok, s.inv_f_bound, s.inv_f_ok)


def _ledger_record(roots: _BlockRoots):
    def per_draw(batch: DrawBatch, s_eigenvalues: np.ndarray, i: int) -> LedgerRecord:
        rank = int(batch.rank_s[i])
        return LedgerRecord(
            rank_s=rank,
            inv_f=1.0 / float(batch.f[i]),
            lambda_max=float(s_eigenvalues[-1]),
            trace_ss_pinv=float(np.trace(batch.s[i] @ batch.s_pinv[i])),
            sandwich=_sandwich(batch.x[i], batch.f[i], s_eigenvalues, rank, roots),
        )

    return per_draw


def verify_bound_chain(
    spec: ModelSpec,
    reps: int,
    seed: int,
    rank_tol: float = 0.0,
    workers: int = 1,
    progress: bool = False,
) -> BoundLedger:
    """
    Estimate E[1/F] and E[λ†max(S)] and walk every link of the bound chain.

    Raises:
        DomainError: If min(n, p) < 3 or reps < 100.
    """
    if min(spec.n, spec.p) < constants.MIN_CHAIN_RANK:
        raise DomainError(
            f"The bound chain needs min(n, p) >= {constants.MIN_CHAIN_RANK}, got n = {spec.n}, p = {spec.p}."
        )
    if reps < constants.MIN_CHAIN_REPS:
        raise DomainError(f"reps must be >= {constants.MIN_CHAIN_REPS}, got {reps}.")
    roots = _BlockRoots(spec.sigma)
    records, rejected = _sample_blocks(spec, reps, seed, rank_tol, workers, progress, _ledger_record(roots))
    ledger = BoundLedger(spec, seed, records, rejected)
    logger.info("E[1/F] ~ %.6g (bound %.6g), E[lambda_max] ~ %.6g (bound %.6g).",
                ledger.e_inv_f_hat, ledger.bound_final, ledger.e_lambda_max_hat, ledger.bound_lambda)
    return ledger


@dataclass(frozen=True)
class UNormKS:
    rank: int
    delta: float
    statistic: float
    pvalue: float
    draws: int


def u_norm_ks(
    spec: ModelSpec,
    reps: int,
    seed: int,
    rank_tol: float = 0.0,
    workers: int = 1,
    progress: bool = False,
) -> UNormKS:
    """KS test of UᵀU at the modal rank R against χ²_R(δ_R)."""
    roots = _BlockRoots(spec.sigma)

    def per_draw(batch: DrawBatch, _w: np.ndarray, i: int) -> Tuple[int, float]:
        rank = int(batch.rank_s[i])
        u = roots.u_vector(batch.x[i], rank)
        return rank, float(u @ u)

    pairs, _ = _sample_blocks(spec, reps, seed, rank_tol, workers, progress, per_draw)
    ranks = np.array([rank for rank, _ in pairs])
    norms = np.array([norm for _, norm in pairs])
    rank = int(np.bincount(ranks).argmax())
    delta = delta_r(spec, rank)
    result = stats.kstest(norms[ranks == rank], _u_norm_law(rank, delta).cdf)
    return UNormKS(rank, delta, float(result.statistic), float(result.pvalue), int(np.sum(ranks == rank)))


class SandwichScan(Payload):
    """Pass rates of both sandwich chains; only a Rayleigh failure is a finding."""

    csv_header = constants.SANDWICH_HEADER

    def __init__(self, spec: ModelSpec, checks: List[SandwichCheck], rejected_f_floor: int) -> None:
        self.spec = spec
        self.checks = checks
        self.rejected_f_floor = rejected_f_floor
        self.spectral_pass_fraction = sum(c.spectral_ok for c in checks) / len(checks)
        self.rayleigh_failures = sum(not c.rayleigh_ok for c in checks)
        self.inv_f_pass_fraction = sum(c.inv_f_ok for c in checks) / len(checks)

    def findings(self) -> List[str]:
        if self.rayleigh_failures:
            return [f"the Rayleigh sandwich failed on {self.rayleigh_failures} draws"]
        return []

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.spec.n,
            "p": self.spec.p,
            "reps": len(self.checks),
            "spectral_pass_fraction": self.spectral_pass_fraction,
            "rayleigh_pass_fraction": 1.0 - self.rayleigh_failures / len(self.checks),
            "inv_f_pass_fraction": self.inv_f_pass_fraction,
            "rejected_f_floor": self.rejected_f_floor,
        }

    def csv_rows(self):
        for i, c in enumerate(self.checks):
            yield (i, c.rank_s, c.f_value, c.spectral_low, c.spectral_high, c.spectral_ok, c.rayleigh_low, c.rayleigh_mid, c.rayleigh_high, c.rayleigh_ok, c.inv_f_bound, c.inv_f_ok)


def scan_sandwich(
    spec: ModelSpec,
    reps: int,
    seed: int,
    rank_tol: float = 0.0,
    workers: int = 1,
    progress: bool = False,
) -> SandwichScan:
    if reps < 1:
        raise DomainError(f"reps must be >= 1, got {reps}.")
    roots = _BlockRoots(spec.sigma)

    def per_draw(batch: DrawBatch, s_eigenvalues: np.ndarray, i: int) -> SandwichCheck:
        return _sandwich(batch.x[i], batch.f[i], s_eigenvalues, int(batch.rank_s[i]), roots)

    checks, rejected = _sample_blocks(spec, reps, seed, rank_tol, workers, progress, per_draw)
    scan = SandwichScan(spec, checks, rejected)
    logger.info("Spectral sandwich held on %.1f%% of %d draws.", 100 * scan.spectral_pass_fraction, reps)
    return scan
