"""Deterministic random-number substreams.

A single 64-bit master seed fans out into independent child generators,
each addressed by an integer key tuple (for example ``(tag, replication)``).
Because a child depends only on its key and the master seed, replications
can run in any order -- or on any number of threads -- and still consume
exactly the same random numbers.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Return the child generator addressed by ``key`` under ``master_seed``.

    Parameters
    ----------
    master_seed : int
        Master seed; reduced modulo 2**64.
    *key : int
        Counter indices identifying the substream, e.g. a stream tag
        followed by a replication index.

    Returns
    -------
    numpy.random.Generator
        PCG64 generator seeded from ``SeedSequence(master_seed, spawn_key=key)``.
        Calling this twice with the same arguments yields generators that
        produce bit-identical output.
    """
    seq = np.random.SeedSequence(master_seed & _MASK64, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(seq))
