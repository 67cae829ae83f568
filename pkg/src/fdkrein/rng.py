"""SplitMix64, vectorised.

The i-th output for a given seed is ``mix(seed + (i + 1) * GOLDEN)``, so a
block of outputs is computed in one shot with wrapping ``uint64`` arithmetic.
Doubles take the top 53 bits.
"""

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    def __init__(self, seed: int = 0):
        self.state = int(seed) & _MASK

    def next_u64(self, count: int) -> np.ndarray:
        steps = np.arange(1, count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * GOLDEN
            out = _mix(z)
        self.state = (self.state + count * int(GOLDEN)) & _MASK
        return out

    def uniform(self, count: int) -> np.ndarray:
        """Doubles in ``[0, 1)``."""
        return (self.next_u64(count) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def complex_uniform(self, count: int) -> np.ndarray:
        """``re + i im`` with both parts in ``[-1, 1)``; re/im drawn interleaved."""
        u = 2.0 * self.uniform(2 * count) - 1.0
        return u[0::2] + 1j * u[1::2]
