"""Reproducible counter-based replica streams.

Replica r of an experiment draws from a Philox generator keyed by
(master_seed, r).  The stream is a pure function of those two integers, so
results cannot depend on how replicas are scheduled across threads, and
aggregation in fixed replica order makes whole reports bit-reproducible.
"""

from __future__ import annotations

import numpy as np

__all__ = ["make_stream"]

_MASK = (1 << 64) - 1


def make_stream(master_seed: int, replica: int) -> np.random.Generator:
    key = np.array([master_seed & _MASK, replica & _MASK], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
