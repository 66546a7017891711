from typing import List, Sequence, Tuple

import numpy as np


def mean_and_se(values) -> Tuple[float, float]:
    """Sample mean and its standard error; the SE is inf with fewer than two values."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return float("nan"), float("inf")
    mean = float(np.mean(arr))
    if arr.size < 2:
        return mean, float("inf")
    return mean, float(np.std(arr, ddof=1) / np.sqrt(arr.size))


def decade_grid(reps: int, start: int = 10_000) -> List[int]:
    """start, 10·start, 100·start, ... up to reps, always ending at reps."""
    grid = []
    n = start
    while n <= reps:
        grid.append(n)
        n *= 10
    if not grid or grid[-1] != reps:
        grid.append(reps)
    return grid


def running_means(values, grid: Sequence[int]) -> List[Tuple[int, float]]:
    """(N, mean of the first N values) for each N of the grid, accumulated in index order."""
    cumulative = np.cumsum(np.asarray(values, dtype=np.float64))
    return [(int(n), float(cumulative[n - 1] / n)) for n in grid]


def is_stable(values, grid: Sequence[int], se_multiple: float) -> bool:
    """Whether the mean at the last grid point is within se_multiple SE of the mean at the first."""
    arr = np.asarray(values, dtype=np.float64)
    first, last = grid[0], grid[-1]
    head_mean, head_se = mean_and_se(arr[:first])
    last_mean = float(np.mean(arr[:last]))
    return bool(abs(last_mean - head_mean) <= se_multiple * head_se)
