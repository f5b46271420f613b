"""Named, independent random substreams.

Every randomized stage draws from its own generator, derived from the
run seed plus a stage name, so adding draws to one stage never perturbs
another and results are reproducible across processes.
"""

from __future__ import annotations

import zlib

import numpy as np


def substream(seed: int, name: str) -> np.random.Generator:
    """Generator for stage ``name``, independent of all other stages."""
    entropy = [seed & (2**64 - 1), zlib.crc32(name.encode("utf-8"))]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
