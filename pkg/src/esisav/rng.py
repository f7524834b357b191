"""Stateless counter-based uniform generator (SplitMix64 finalizer).

``rand_uniform(seed, index)`` depends only on its two 64-bit arguments, so a
field can be filled in any order, in parallel, and reproduced bit-for-bit on
any platform.
"""

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def splitmix64(seed, index):
    """Raw 64-bit output for ``(seed, index)``; vectorized over ``index``."""
    idx = np.atleast_1d(np.asarray(index, dtype=np.uint64))
    with np.errstate(over="ignore"):
        x = np.uint64(int(seed) & _MASK) ^ _mix(idx + GOLDEN)
        return _mix(x + GOLDEN)


def rand_uniform(seed, index):
    """Uniform value in ``[-1, 1)`` from the top 53 bits of :func:`splitmix64`."""
    scalar = np.ndim(index) == 0
    z = splitmix64(seed, index)
    u = (z >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
    out = 2.0 * u - 1.0
    return float(out[0]) if scalar else out.reshape(np.shape(index))


def rand_field(seed, shape):
    """Row-major field of :func:`rand_uniform` values, index ``i*ny + j``."""
    n = int(np.prod(shape))
    return rand_uniform(seed, np.arange(n, dtype=np.uint64)).reshape(shape)
