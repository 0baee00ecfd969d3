"""Counter-based random streams keyed by (seed, stream_id)."""
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """A reproducible Philox stream.

    The Philox key is the 128-bit pair (seed, stream_id), so two streams with
    different ids never share a key and the same pair always replays the same
    sequence.
    """
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not (0 <= int(v) <= _MASK64):
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v}")

    def generator(self):
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, i):
        """Child stream for replica ``i``; derived by hashing (stream_id, i)."""
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id, int(i)))
        sid = int(ss.generate_state(2, dtype=np.uint64)[0])
        return RngStream(self.seed, sid)

    def substreams(self, count):
        return [self.substream(i) for i in range(count)]


def as_generator(rng):
    """Accept an RngStream, a numpy Generator or an int seed."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise TypeError(f"cannot build a generator from {type(rng).__name__}")


def stream_of(rng):
    """(seed, stream_id) provenance when available."""
    if isinstance(rng, RngStream):
        return rng.seed, rng.stream_id
    if isinstance(rng, (int, np.integer)):
        return int(rng), 0
    return None, None


def split(rng, count):
    """``count`` independent generators derived deterministically from ``rng``."""
    if isinstance(rng, (int, np.integer)):
        rng = RngStream(int(rng))
    if isinstance(rng, RngStream):
        return [rng.substream(i).generator() for i in range(count)]
    keys = rng.integers(0, 2 ** 63, size=(count, 2), dtype=np.uint64)
    return [np.random.Generator(np.random.Philox(key=k)) for k in keys]
