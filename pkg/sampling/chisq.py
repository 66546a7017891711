"""
Inverse first moment of the noncentral chi-squared distribution.

χ²_k(δ) is a Poisson(δ/2) mixture of central χ²_{k+2Z}, and E[1/χ²_m] = 1/(m − 2)
for m > 2. Whenever k ≤ 2 the Z = 0 component has positive weight and an
infinite inverse moment, so the expectation is +inf.
"""

import math
from typing import Literal

import numpy as np
from scipy import integrate, stats

import config
from exceptions import InvalidInputError

Method = Literal["mixture", "quadrature"]


def poisson_truncation(delta: float, tail_mass: float = config.POISSON_TAIL_MASS) -> int:
    """Smallest z* whose Poisson(δ/2) cumulative mass reaches 1 − tail_mass."""
    if delta == 0:
        return 0
    return int(stats.poisson.isf(tail_mass, delta / 2.0))


def _check_args(k: int, delta: float) -> None:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1:
        raise InvalidInputError(f"k must be a positive integer, got {k!r}.")
    if not math.isfinite(delta) or delta < 0:
        raise InvalidInputError(f"delta must be finite and >= 0, got {delta!r}.")


def _mixture(k: int, delta: float) -> float:
    z = np.arange(poisson_truncation(delta) + 1)
    weights = stats.poisson.pmf(z, delta / 2.0) if delta > 0 else np.ones(1)
    return float(np.sum(weights / (k + 2 * z - 2)))


def _quadrature(k: int, delta: float) -> float:
    dist = stats.ncx2(k, delta) if delta > 0 else stats.chi2(k)

    # x = t² removes the 1/x singularity: ∫ f(x)/x dx = ∫ 2 f(t²)/t dt
    def integrand(t: float) -> float:
        return 2.0 * dist.pdf(t * t) / t

    mode = math.sqrt(k + delta)
    head, _ = integrate.quad(integrand, 0.0, mode, epsabs=1e-14, epsrel=1e-12, limit=200)
    tail, _ = integrate.quad(integrand, mode, np.inf, epsabs=1e-14, epsrel=1e-12, limit=200)
    return head + tail


def inv_moment_chisq(k: int, delta: float, method: Method = "mixture") -> float:
    """
    E[1/χ²_k(δ)].

    Args:
        k (int): Degrees of freedom, k >= 1.
        delta (float): Noncentrality δ >= 0.
        method (str, optional): "mixture" sums Poisson(δ/2)(z)/(k + 2z − 2) up to the
            1e−12 tail; "quadrature" integrates the density directly. Defaults to "mixture".

    Returns:
        float: The moment, or `math.inf` when k <= 2.

    Raises:
        InvalidInputError: On bad k, delta or method.
    """
    _check_args(k, float(delta))
    if method not in ("mixture", "quadrature"):
        raise InvalidInputError(f"method must be 'mixture' or 'quadrature', got {method!r}.")
    if k <= 2:
        return math.inf
    if method == "mixture":
        return _mixture(int(k), float(delta))
    return _quadrature(int(k), float(delta))
