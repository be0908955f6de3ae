"""Counter-based random streams built on the SplitMix64 output function.

A stream is a 64-bit key; the ``c``-th draw of a stream is
``mix64(key + (c + 1) * GOLDEN)``, i.e. the ``c``-th output of SplitMix64
seeded with ``key``. Draws are random-access, so the numba and numpy
kernels can produce the same uniform for (key, step, node) independently
of evaluation order or thread count.
"""
import numpy as np

from ._accel import njit

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

TAG_SEEDING = 0x5EED5EED5EED5EED
TAG_STEP = 0x57E957E957E957E9

_GOLDEN_U = np.uint64(GOLDEN)
_M1_U = np.uint64(_M1)
_M2_U = np.uint64(_M2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE_U = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0


def mix64(z):
    """SplitMix64 finalizer on a Python int (wrapping at 64 bits)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def stream_key(master_seed, replicate=0):
    """Key of the stream used by replicate ``replicate`` of a run seeded with ``master_seed``."""
    if not 0 <= master_seed <= MASK64:
        raise ValueError("master_seed must be a 64-bit unsigned integer")
    if replicate < 0:
        raise ValueError("replicate index must be non-negative")
    base = mix64(master_seed + GOLDEN)
    return mix64(base + (replicate + 1) * GOLDEN)


def subkey(key, tag):
    return mix64(key ^ tag)


def uniforms(key, counters):
    """Vectorised draws ``counters`` of stream ``key`` as float64 in [0, 1)."""
    z = np.asarray(counters, dtype=np.uint64) + _ONE_U
    z = z * _GOLDEN_U + np.uint64(key)
    z = (z ^ (z >> _S30)) * _M1_U
    z = (z ^ (z >> _S27)) * _M2_U
    z = z ^ (z >> _S31)
    return (z >> _S11).astype(np.float64) * _INV53


@njit(cache=True)
def uniform_nb(key, counter):
    z = (counter + _ONE_U) * _GOLDEN_U + key
    z = (z ^ (z >> _S30)) * _M1_U
    z = (z ^ (z >> _S27)) * _M2_U
    z = z ^ (z >> _S31)
    return np.float64(z >> _S11) * _INV53
