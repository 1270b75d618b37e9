"""Seed derivation shared by every stochastic stage."""

from __future__ import annotations

import numpy as np

# Stream tags keep calibration, online and event randomness independent.
CALIBRATION_STREAM = 1
ONLINE_STREAM = 2
EVENT_STREAM = 3
ROUND_STREAM = 4


def derive_seed(seed: int, *keys: int) -> int:
    """Map ``(seed, *keys)`` to a new 32-bit integer seed.

    The mapping is a pure function of its arguments, so any stage that
    derives its randomness this way can be recomputed in isolation (for
    one selection, one event, ...) and still agree with a full run.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *keys))
