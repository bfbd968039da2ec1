"""Counter-based random streams.

Every random draw in the package comes from a Philox generator keyed by
(seed, tag, *path).  A draw therefore depends only on its coordinates —
replicate, step, group slot, agent slot — never on evaluation order, thread
count, or which other draws happened first.  Two runs that share a seed and a
coordinate path produce identical numbers even if one sweeps many policies
and the other simulates a single trajectory.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_MASK32 = (1 << 32) - 1

# Domain tags keep unrelated uses of the same seed on disjoint streams.
TAG_STEP = 1      # per-(replicate, step, group) uniforms for population updates
TAG_SAMPLE = 2    # distribution sampling
TAG_CELL = 3      # recommendation-grid cell seeds
TAG_REPLICATE = 4 # replicate seeds inside one policy evaluation
TAG_WALK = 5      # chain random walks


def _seed_sequence(seed: int, path: tuple[int, ...]) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        entropy=int(seed) & _MASK64,
        spawn_key=tuple(int(p) & _MASK32 for p in path),
    )


def substream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream at (seed, *path)."""
    return np.random.Generator(np.random.Philox(_seed_sequence(seed, path)))


def derive_seed(seed: int, *path: int) -> int:
    """Stable 64-bit integer seed for the stream at (seed, *path).

    Used where an independent child computation needs its own plain seed
    (grid cells, replicates) that can also be handed to simulate() directly.
    """
    state = _seed_sequence(seed, path).generate_state(1, np.uint64)
    return int(state[0])


def step_uniforms(seed: int, step: int, group_slot: int, n: int) -> np.ndarray:
    """The n agent uniforms for one population update.

    Agent i always reads slot i of the block for (seed, step, group_slot),
    so the draw an agent sees is independent of every model parameter.
    """
    return substream(seed, TAG_STEP, step, group_slot).random(n)


def uniform_block(seed: int, horizon: int, group_slot: int, n: int) -> np.ndarray:
    """All update uniforms for one run, shape (horizon, n)."""
    out = np.empty((horizon, n))
    for t in range(horizon):
        out[t] = step_uniforms(seed, t, group_slot, n)
    return out
