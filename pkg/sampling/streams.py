"""
Counter-based random streams for replicated experiments.

Replications are grouped in blocks of `config.REPLICATION_BLOCK`. Block `b`
draws, in replication order, from
`Generator(Philox(SeedSequence(master_seed, spawn_key=(b,))))`, so a block's
numbers depend only on (master_seed, b). Blocks may run on any number of
workers; results are always reassembled in block order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Tuple, TypeVar, Union

import numpy as np
from tqdm import tqdm

import config
from exceptions import InvalidInputError

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1

T = TypeVar("T")
Stream = Union[np.random.Generator, int]


def block_stream(master_seed: int, block: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(master_seed) & SEED_MASK, spawn_key=(int(block),))
    return np.random.Generator(np.random.Philox(seq))


def as_generator(stream: Stream) -> np.random.Generator:
    """Accept a Generator as-is; turn an integer seed into block 0 of that seed."""
    if isinstance(stream, np.random.Generator):
        return stream
    if isinstance(stream, (int, np.integer)):
        return block_stream(int(stream), 0)
    raise InvalidInputError(f"A stream must be a numpy Generator or an integer seed, got {type(stream).__name__}.")


def block_bounds(reps: int, block_size: int = config.REPLICATION_BLOCK) -> List[Tuple[int, int, int]]:
    """(block index, first replication, one past last replication) for each block."""
    if reps < 0:
        raise InvalidInputError(f"reps must be >= 0, got {reps}.")
    return [(b, start, min(start + block_size, reps)) for b, start in enumerate(range(0, reps, block_size))]


def map_blocks(
    fn: Callable[[int, int, int, np.random.Generator], T],
    reps: int,
    master_seed: int,
    workers: int = 1,
    progress: bool = False,
    block_size: int = config.REPLICATION_BLOCK,
) -> List[T]:
    """
    Run `fn(block, start, stop, rng)` for every block and return results in block order.

    Args:
        fn: Per-block worker; must only draw from the `rng` it is given.
        reps (int): Total number of replications.
        master_seed (int): Master seed of the run.
        workers (int, optional): Thread count. Defaults to 1 (serial).
        progress (bool, optional): Show a tqdm bar on stderr. Defaults to False.

    Returns:
        List: One result per block, ordered by block index.
    """
    blocks = block_bounds(reps, block_size)
    logger.info("Running %d replications in %d blocks on %d worker(s) ...", reps, len(blocks), workers)

    def job(bounds: Tuple[int, int, int]) -> T:
        b, start, stop = bounds
        return fn(b, start, stop, block_stream(master_seed, b))

    with tqdm(total=len(blocks), disable=not progress, unit="block", leave=False) as bar:
        if workers <= 1:
            results = []
            for bounds in blocks:
                results.append(job(bounds))
                bar.update()
            return results
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = []
            for result in pool.map(job, blocks):
                results.append(result)
                bar.update()
            return results
