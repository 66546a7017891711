"""
Shrinkage functions r: bounded, non-negative, with a bounded derivative.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from exceptions import DomainError

from . import constants

EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class Certificate:
    """
    Grid evidence that a ShrinkageFn respects its bounds.

    Attributes:
        grid_max (float): Largest grid point; nothing is claimed beyond it.
        points (int): Number of grid points.
        bounded (bool): 0 <= r(t) <= c1 on the grid.
        deriv_bounded (bool): |r'(t)| <= c2 on the grid.
        max_deriv_error (float): Largest gap between r' and a finite difference of r.
    """

    grid_max: float
    points: int
    bounded: bool
    deriv_bounded: bool
    max_deriv_error: float

    @property
    def ok(self) -> bool:
        return self.bounded and self.deriv_bounded and self.max_deriv_error <= constants.DERIV_TOL


@dataclass(frozen=True)
class ShrinkageFn:
    """
    r and r′ together with their bounds C₁ ≥ r ≥ 0 and C₂ ≥ |r′|.

    `eval` and `deriv` take and return numpy arrays as well as floats.
    """

    name: str
    c1: float
    c2: float
    eval: Callable
    deriv: Callable

    def certify(self, grid: Optional[np.ndarray] = None) -> Certificate:
        """
        Spot-check the bounds and the derivative on a grid, by default a dense
        linear grid on [0, 10] joined to a log grid up to CERTIFY_T_MAX.
        """
        if grid is None:
            grid = np.union1d(
                np.linspace(0.0, 10.0, constants.CERTIFY_LINEAR_POINTS),
                np.geomspace(10.0, constants.CERTIFY_T_MAX, constants.CERTIFY_LOG_POINTS),
            )
        t = np.asarray(grid, dtype=np.float64)
        if t.ndim != 1 or t.size == 0 or np.any(t < 0):
            raise DomainError("The certification grid must be a non-empty vector of t >= 0.")
        values = np.asarray(self.eval(t), dtype=np.float64)
        slopes = np.asarray(self.deriv(t), dtype=np.float64)

        # central differences, switching to a one-sided stencil where t - h < 0
        h = np.cbrt(EPS) * np.maximum(1.0, t)
        central = (self.eval(t + h) - self.eval(t - h)) / (2.0 * h)
        forward = (-3.0 * self.eval(t) + 4.0 * self.eval(t + h) - self.eval(t + 2.0 * h)) / (2.0 * h)
        numeric = np.where(t - h < 0, forward, central)

        return Certificate(
            grid_max=float(t.max()),
            points=int(t.size),
            bounded=bool(np.all((values >= 0) & (values <= self.c1))),
            deriv_bounded=bool(np.all(np.abs(slopes) <= self.c2)),
            max_deriv_error=float(np.max(np.abs(numeric - slopes)) / max(1.0, self.c2)),
        )


def _check_c1(c1: float) -> float:
    c1 = float(c1)
    if not np.isfinite(c1) or c1 <= 0:
        raise DomainError(f"c1 must be finite and > 0, got {c1!r}.")
    return c1


def make_shrinkage_default(c1: float) -> ShrinkageFn:
    """r(t) = c1·t/(1 + t) for t >= 0 and 0 below, so C₁ = C₂ = c1."""
    c1 = _check_c1(c1)

    def r(t):
        t = np.maximum(t, 0.0)
        return c1 * t / (1.0 + t)

    def dr(t):
        return np.where(np.asarray(t) >= 0, c1 / (1.0 + np.maximum(t, 0.0)) ** 2, 0.0)

    return ShrinkageFn(name="default", c1=c1, c2=c1, eval=r, deriv=dr)


def make_shrinkage_const(c1: float) -> ShrinkageFn:
    """r ≡ c1. r′ ≡ 0, and c2 is reported as c1 since any positive bound holds."""
    c1 = _check_c1(c1)

    def r(t):
        return np.full_like(np.asarray(t, dtype=np.float64), c1)[()]

    def dr(t):
        return np.zeros_like(np.asarray(t, dtype=np.float64))[()]

    return ShrinkageFn(name="const", c1=c1, c2=c1, eval=r, deriv=dr)


_FACTORIES = {
    "default": make_shrinkage_default,
    "const": make_shrinkage_const,
}


def shrinkage_by_name(name: str, c1: float) -> ShrinkageFn:
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise DomainError(f"Unknown shrinkage function '{name}', expected one of {sorted(_FACTORIES)}.") from None
    return factory(c1)
