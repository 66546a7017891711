from sampling.chisq import inv_moment_chisq, poisson_truncation
from sampling.estimators import decade_grid, is_stable, mean_and_se, running_means
from sampling.model import (
    ModelSpec,
    SampleDraw,
    compute_F,
    draw,
    gram,
    quadratic_forms,
    sample_matrix_normal,
    sample_mvn,
    whiten,
)
from sampling.streams import as_generator, block_bounds, block_stream, map_blocks

__all__ = [
    "ModelSpec",
    "SampleDraw",
    "as_generator",
    "block_bounds",
    "block_stream",
    "compute_F",
    "decade_grid",
    "draw",
    "gram",
    "inv_moment_chisq",
    "is_stable",
    "map_blocks",
    "mean_and_se",
    "poisson_truncation",
    "quadratic_forms",
    "running_means",
    "sample_matrix_normal",
    "sample_mvn",
    "whiten",
]
