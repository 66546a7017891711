from linalg.dense import (
    SpectralSummary,
    as_dense,
    default_rank_tol,
    gram_pinv_with_rank,
    numeric_rank,
    penrose_residuals,
    pinv_numeric,
    pinv_with_rank,
    spectral_summary,
    sym_sqrt_pd,
    symmetrize,
)
from linalg.rational import RationalMatrix, pinv_exact

__all__ = [
    "RationalMatrix",
    "SpectralSummary",
    "as_dense",
    "default_rank_tol",
    "gram_pinv_with_rank",
    "numeric_rank",
    "penrose_residuals",
    "pinv_exact",
    "pinv_numeric",
    "pinv_with_rank",
    "spectral_summary",
    "sym_sqrt_pd",
    "symmetrize",
]
