"""Portable seeded random numbers.

Every seeded draw in the library goes through :class:`SplitMix64`, a
counter-based generator (Steele, Lea & Flood 2014; reference code by
S. Vigna) whose output is a fixed function of ``(seed, index)``. The
same seed therefore reproduces the same stream on any platform and in
any language that implements the algorithm. NumPy's ``Generator``
distribution methods are not used because their output is allowed to
change between NumPy releases.

Published test vector (seed 1234567), first five 64-bit outputs::

    6457827717110365317, 3203168211198807973, 9817491932198370423,
    4593380528125082431, 16408922859458223821
"""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO_POW_M53 = 1.0 / 9007199254740992.0


def _mix(z):
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """SplitMix64 stream with vectorized draws.

    Parameters
    ----------
    seed : int
        Any integer; reduced modulo 2**64.
    """

    def __init__(self, seed):
        self.seed = int(seed) % (1 << 64)
        self._counter = 0

    def next_u64(self, n):
        """Return the next ``n`` raw outputs as a ``uint64`` array."""
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        with np.errstate(over="ignore"):
            state = np.uint64(self.seed) + idx * _GOLDEN
        return _mix(state)

    def uniform(self, size=None, low=0.0, high=1.0):
        """Uniform doubles on ``[low, high)`` built from the top 53 bits."""
        n = 1 if size is None else int(np.prod(size))
        u = (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * _TWO_POW_M53
        u = low + (high - low) * u
        return float(u[0]) if size is None else u.reshape(size)

    def normal(self, size=None, loc=0.0, scale=1.0):
        """Standard normals by the Box-Muller transform (cosine branch)."""
        n = 1 if size is None else int(np.prod(size))
        u = self.uniform((2, n))
        r = np.sqrt(-2.0 * np.log1p(-u[0]))
        z = loc + scale * r * np.cos(2.0 * np.pi * u[1])
        return float(z[0]) if size is None else z.reshape(size)

    def integers(self, high, size=None):
        """Integers on ``[0, high)``; modulo reduction, bias below 2**-40 for high < 2**24."""
        if int(high) < 1:
            raise ValueError("high must be at least 1")
        n = 1 if size is None else int(np.prod(size))
        k = (self.next_u64(n) % np.uint64(high)).astype(np.int64)
        return int(k[0]) if size is None else k.reshape(size)

    def unit_vectors(self, n, d):
        """``n`` directions uniform on the unit sphere in R^d."""
        g = self.normal((n, d))
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    def spawn(self, key):
        """Independent child stream derived from this seed and an integer key."""
        child = _mix(np.array([self.seed ^ (int(key) * 0xD1B54A32D192ED03 % (1 << 64))],
                              dtype=np.uint64))
        return SplitMix64(int(child[0]))


def make_rng(seed):
    if isinstance(seed, SplitMix64):
        return seed
    return SplitMix64(seed)
