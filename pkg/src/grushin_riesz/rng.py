"""Counter-based random streams.

Every batch of Monte-Carlo samples gets its own Philox stream keyed by
(seed, batch), so a batch can be regenerated without replaying the ones
before it and batches can be farmed out in any order.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


def batch_rng(seed: int, batch: int = 0) -> np.random.Generator:
    key = np.array([seed & _MASK, batch & _MASK], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
