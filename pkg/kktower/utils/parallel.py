"""
Row-chunked construction of dense matrices on a thread pool
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np

from kktower.core.config import get_settings

logger = logging.getLogger(__name__)

_MIN_ROWS_PER_CHUNK = 32


def fill_rows(
    n_rows: int,
    n_cols: int,
    rows: Callable[[slice], np.ndarray],
    dtype=float,
    threads: Optional[int] = None,
) -> np.ndarray:
    """Build an (n_rows, n_cols) matrix whose row block s is rows(s)

    Each block is written in place, so the result does not depend on the
    worker count.
    """
    out = np.empty((n_rows, n_cols), dtype=dtype)
    workers = threads or get_settings().THREADS
    if workers <= 1 or n_rows < 2 * _MIN_ROWS_PER_CHUNK:
        out[:] = rows(slice(0, n_rows))
        return out

    chunk = max(_MIN_ROWS_PER_CHUNK, -(-n_rows // (4 * workers)))
    blocks = [slice(i, min(i + chunk, n_rows)) for i in range(0, n_rows, chunk)]

    def fill(block: slice) -> None:
        out[block] = rows(block)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(fill, blocks))
    logger.debug(f"Filled {n_rows}x{n_cols} matrix in {len(blocks)} blocks on {workers} threads")
    return out
