"""Random streams.

Every stream is a numpy ``Generator`` over Philox-4x64, a counter-based
64-bit bit generator. Streams are keyed by integer tuples hashed through
``SeedSequence``, so the stream for (master_seed, split, class, index) is
the same no matter which worker or in which order it is built.
"""

import numpy as np

MASK64 = (1 << 64) - 1

# Sub-stream tags for one simulation
PARAMS_STREAM = 0
WALK_STREAM = 1
NOISE_STREAM = 2


def derive_seed(*keys: int) -> int:
    """Hash a tuple of non-negative integers into one 64-bit seed."""
    entropy = [int(k) & MASK64 for k in keys]
    state = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)
    return int(state[0])


def stream(seed: int, tag: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed) & MASK64, tag])))
