from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy import linalg as sla

from exceptions import DomainError, InvalidInputError
from linalg import as_dense, gram_pinv_with_rank, pinv_numeric, sym_sqrt_pd
from sampling.streams import Stream, as_generator


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """
    The Gaussian model X ~ N_p(θ, Σ), Y ~ N_{n×p}(0, I_n ⊗ Σ).

    Attributes:
        n (int): Rows of Y.
        p (int): Dimension of X.
        theta (np.ndarray): Mean θ, length p.
        sigma (np.ndarray): Covariance Σ, p × p symmetric positive definite.
        sigma_sqrt (np.ndarray): A, the symmetric positive definite square root of Σ.
    """

    n: int
    p: int
    theta: np.ndarray
    sigma: np.ndarray
    sigma_sqrt: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        for name in ("n", "p"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise DomainError(f"'{name}' must be a positive integer, got {value!r}.")
        theta = as_dense(self.theta, "theta", ndim=1)
        sigma = as_dense(self.sigma, "sigma")
        if theta.shape != (self.p,):
            raise DomainError(f"theta must have length {self.p}, got shape {theta.shape}.")
        if sigma.shape != (self.p, self.p):
            raise DomainError(f"sigma must be {self.p} x {self.p}, got shape {sigma.shape}.")
        root = sym_sqrt_pd(sigma)
        for name, value in (("theta", theta), ("sigma", sigma), ("sigma_sqrt", root)):
            value = value.copy()
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def identity(cls, n: int, p: int, theta=None) -> "ModelSpec":
        return cls(n=n, p=p, theta=np.zeros(p) if theta is None else theta, sigma=np.eye(p))


@dataclass(frozen=True, eq=False)
class SampleDraw:
    """
    One draw of (X, Y) with S = YᵀY.

    Attributes:
        x (np.ndarray): X, length p.
        y (np.ndarray): Y, n × p.
        s (np.ndarray): S = YᵀY, p × p.
        rank_s (int): Numeric rank of S.
        seed_path (tuple): (master seed, block, replication) identifying the stream position.
    """

    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    rank_s: int
    seed_path: Tuple[int, ...] = ()


def sample_mvn(spec: ModelSpec, stream: Stream, size: Optional[int] = None) -> np.ndarray:
    """θ + A·z with z standard normal; shape (p,) or (size, p)."""
    rng = as_generator(stream)
    z = rng.standard_normal(spec.p if size is None else (size, spec.p))
    return spec.theta + z @ spec.sigma_sqrt


def sample_matrix_normal(spec: ModelSpec, stream: Stream, size: Optional[int] = None) -> np.ndarray:
    """Z·A with Z standard normal; shape (n, p) or (size, n, p). Rows are independent N_p(0, Σ)."""
    rng = as_generator(stream)
    z = rng.standard_normal((spec.n, spec.p) if size is None else (size, spec.n, spec.p))
    return z @ spec.sigma_sqrt


def gram(y: np.ndarray) -> np.ndarray:
    """S = YᵀY for a single Y or a stack of them."""
    return np.swapaxes(y, -1, -2) @ y


def draw(spec: ModelSpec, stream: Stream, seed_path: Tuple[int, ...] = (), rank_tol: float = 0.0) -> SampleDraw:
    """Draw X then Y from the same stream and form S."""
    rng = as_generator(stream)
    x = sample_mvn(spec, rng)
    y = sample_matrix_normal(spec, rng)
    s = gram(y)
    return SampleDraw(x=x, y=y, s=s, rank_s=gram_pinv_with_rank(y, rank_tol)[1], seed_path=tuple(seed_path))


def whiten(y: np.ndarray, spec: ModelSpec) -> np.ndarray:
    """Ỹ = Y·A⁻¹."""
    return sla.solve(spec.sigma_sqrt, np.asarray(y).T, assume_a="pos").T


def compute_F(x, s, rank_tol: float = 0.0) -> float:
    """
    F = xᵀ S⁺ x.

    Raises:
        InvalidInputError: If x is not a vector of length p or s is not p × p.
    """
    x = as_dense(x, "x", ndim=1)
    s = as_dense(s, "S")
    if x.ndim != 1 or s.shape != (x.size, x.size):
        raise InvalidInputError(f"x of shape {x.shape} does not match S of shape {s.shape}.")
    return max(0.0, float(x @ pinv_numeric(s, rank_tol) @ x))


def quadratic_forms(x: np.ndarray, m: np.ndarray) -> np.ndarray:
    """xᵢᵀ Mᵢ xᵢ for stacks x (b, p) and M (b, p, p)."""
    return np.einsum("bi,bij,bj->b", x, m, x)


@dataclass(frozen=True, eq=False)
class DrawBatch:
    """
    A block of draws stacked along the first axis.

    Attributes:
        x (np.ndarray): (m, p).
        y (np.ndarray): (m, n, p).
        s (np.ndarray): (m, p, p), S = YᵀY per draw.
        s_pinv (np.ndarray): (m, p, p), S⁺ per draw.
        rank_s (np.ndarray): (m,) numeric ranks.
        f (np.ndarray): (m,) F = XᵀS⁺X per draw.
    """

    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    s_pinv: np.ndarray
    rank_s: np.ndarray
    f: np.ndarray

    def __len__(self) -> int:
        return self.x.shape[0]


def draw_batch(spec: ModelSpec, stream: Stream, size: int, rank_tol: float = 0.0) -> DrawBatch:
    """All X of the batch are drawn first, then all Y. S⁺ and the rank come from the SVD of Y."""
    rng = as_generator(stream)
    x = sample_mvn(spec, rng, size=size)
    y = sample_matrix_normal(spec, rng, size=size)
    s = gram(y)
    s_pinv, rank = gram_pinv_with_rank(y, rank_tol)
    f = np.maximum(quadratic_forms(x, s_pinv), 0.0)
    return DrawBatch(x=x, y=y, s=s, s_pinv=s_pinv, rank_s=np.asarray(rank), f=f)
