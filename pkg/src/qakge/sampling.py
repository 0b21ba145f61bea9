"""Negative sampling: corrupt one side of each positive triple.

Corruptions follow the open-world convention: a corruption may coincide with
some other true triple and is still used as a negative. Only a corruption
identical to its own positive is rejected and redrawn.
"""
from __future__ import annotations

import logging

import numpy as np

from .errors import InputError
from .triples import Vocabulary

logger = logging.getLogger(__name__)

CORRUPTION_MODES = ("all", "batch")

# redraw attempts before a self-identical corruption is kept
MAX_RESAMPLE_ATTEMPTS = 100


def sample_corruptions(
    batch: np.ndarray,
    eta: int,
    mode: str,
    vocab: Vocabulary,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw ``eta`` corruptions per positive; rows i*eta..(i+1)*eta-1 of the
    result belong to positive i.

    Each corruption picks a side uniformly (subject or object) and replaces
    it with an entity drawn uniformly from the pool: the whole entity
    vocabulary in ``all`` mode, the entities of this batch in ``batch`` mode.
    """
    if eta < 1:
        raise InputError(f"eta must be >= 1, got {eta}")
    if batch.ndim != 2 or batch.shape[1] != 3:
        raise InputError(f"batch must be (B, 3) index array, got shape {batch.shape}")
    if mode == "all":
        pool = np.arange(vocab.n_entities, dtype=np.int64)
    elif mode == "batch":
        pool = np.unique(batch[:, [0, 2]])
    else:
        raise InputError(f"corruption mode must be one of {CORRUPTION_MODES}, got {mode!r}")
    if pool.size < 2:
        raise InputError(f"entity pool of size {pool.size}: cannot corrupt")

    total = batch.shape[0] * eta
    base = np.repeat(batch, eta, axis=0)
    side = rng.integers(0, 2, size=total)  # 0 -> subject, 1 -> object
    repl = pool[rng.integers(0, pool.size, size=total)]
    col = side * 2
    rows = np.arange(total)
    bad = repl == base[rows, col]

    attempts = 0
    while bad.any() and attempts < MAX_RESAMPLE_ATTEMPTS:
        hit = np.flatnonzero(bad)
        side[hit] = rng.integers(0, 2, size=hit.size)
        repl[hit] = pool[rng.integers(0, pool.size, size=hit.size)]
        col[hit] = side[hit] * 2
        bad[hit] = repl[hit] == base[hit, col[hit]]
        attempts += 1
    if bad.any():
        logger.warning(
            "kept %d corruption(s) identical to their positives after %d redraw attempts",
            int(bad.sum()),
            MAX_RESAMPLE_ATTEMPTS,
        )

    out = base.copy()
    out[rows, col] = repl
    return out
