"""
Keyed random streams.

Every draw in deniakit comes from a Philox (counter-based) generator whose key
is derived from (seed, purpose, indices). Codebook symbols, optimizer restarts
and faking draws therefore never share a stream, and a result does not depend
on the order in which independent pieces of work are scheduled.
"""

import zlib

import numpy as np

SEED_MASK = (1 << 64) - 1


def purpose_tag(purpose):
    return zlib.crc32(purpose.encode("utf-8"))


def stream(seed, purpose, *indices):
    """Return a numpy Generator for the given key."""
    words = [int(seed) & SEED_MASK, purpose_tag(purpose)]
    words.extend(int(i) for i in indices)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(words)))
