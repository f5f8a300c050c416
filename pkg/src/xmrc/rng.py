"""SplitMix64: the one seeded generator used for every randomized construction.

All mask/phantom randomness must be bit-identical across runs and platforms,
so nothing here depends on numpy's RNG state or the OS. The update is the
standard SplitMix64 sequence (Steele, Lea & Flood's 64-bit finalizer).
"""

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Deterministic 64-bit generator; same seed, same stream, everywhere."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def next_float(self) -> float:
        """Uniform in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0 ** -53
