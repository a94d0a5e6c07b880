"""
Per-node private randomness.

Every node draws from its own counter-based Philox stream keyed by (seed, node, stream). Streams for
different keys are independent, and a stream never depends on how many draws other nodes made, so a
simulation is reproducible no matter in which order the engine wakes the nodes.
"""
import numpy as np

SEED_MASK = (1 << 64) - 1


def _seed_sequence(seed: int, node_id: int, stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=seed & SEED_MASK, spawn_key=(node_id, stream))


def rng_for(seed: int, node_id: int, stream: int = 0) -> np.random.Generator:
    """Return the private generator of `node_id` for the run seeded with `seed`."""
    return np.random.Generator(np.random.Philox(_seed_sequence(seed, node_id, stream)))


def random_word(seed: int, node_id: int, draw_index: int, stream: int = 0) -> int:
    """The `draw_index`-th raw 64-bit word of a node's stream."""
    bit_generator = np.random.Philox(_seed_sequence(seed, node_id, stream))
    return int(bit_generator.random_raw(draw_index + 1)[-1])


def fair_bits(generator: np.random.Generator, count: int) -> list:
    """Draw `count` fair bits as a list of 0/1 ints."""
    return generator.integers(0, 2, size=count).tolist()


def geometric_half(generator: np.random.Generator) -> int:
    """Index of the first heads in a run of fair coin flips, support {1, 2, 3, ...}."""
    return int(generator.geometric(0.5))


def bits_to_string(bits) -> str:
    return ''.join('1' if bit else '0' for bit in bits)
