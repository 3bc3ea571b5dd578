"""Deterministic, splittable random streams.

All Monte Carlo in this package draws from counter-based Philox generators
keyed by (seed, path): the stream for replication r of a run with seed s is
``stream(s, r)``, and nested purposes extend the path, e.g.
``stream(s, r, 2)``.  Streams with different paths never collide, so
replications can run in any order (or in parallel) and still reproduce
bit-identical results.
"""

import numpy as np


def stream(seed, *path):
    """Return a ``numpy.random.Generator`` for the given seed and path.

    Parameters
    ----------
    seed : int
        Root seed of the run.
    *path : int
        Optional replication path, e.g. ``stream(seed, r)`` for
        replication r, ``stream(seed, r, k)`` for sub-stream k of it.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def child_seed(seed, *path):
    """Derive a new integer seed from (seed, path).

    Used when a sub-procedure takes a plain integer seed of its own; the
    derived value is deterministic and decorrelated from the parent stream.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0])
