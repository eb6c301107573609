"""Counter-based random streams.

Every variate is a pure function of ``(seed, path, position)``: a stream is a
Philox4x32-10 key derived from the seed and the substream path, plus a block
counter.  Splitting hashes the parent key with the child index, so substreams
are independent by construction and can be generated in bulk (see
:func:`gaussian_from_keys`) without instantiating one object per substream.

Gaussians use Box-Muller on 53-bit uniforms.  Draws are block aligned: a call
requesting ``size`` Gaussians consumes ``ceil(size / 2)`` Philox blocks and
discards any unused half block.
"""
from __future__ import annotations

import numpy as np

GAUSSIAN_METHOD = "philox4x32-10/box-muller-53bit"

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)

_ROOT_TAG = 0x524F4F54  # "ROOT"
_SPLIT_TAG = 0x53504C54  # "SPLT"
_TWO_POW_M53 = 2.0**-53


def philox4x32(counter, key):
    """Philox4x32-10 bijection.

    ``counter`` has shape ``(..., 4)`` and ``key`` shape ``(..., 2)``; both are
    broadcast against each other.  Returns uint32 words of shape ``(..., 4)``.
    """
    ctr = np.asarray(counter, dtype=np.uint64)
    k = np.asarray(key, dtype=np.uint64)
    shape = np.broadcast_shapes(ctr.shape[:-1], k.shape[:-1])
    c0, c1, c2, c3 = (np.broadcast_to(ctr[..., i], shape).copy() for i in range(4))
    k0 = np.broadcast_to(k[..., 0], shape).copy()
    k1 = np.broadcast_to(k[..., 1], shape).copy()
    for r in range(10):
        p0 = c0 * _M0
        p1 = c2 * _M1
        hi0, lo0 = p0 >> _SHIFT32, p0 & _MASK32
        hi1, lo1 = p1 >> _SHIFT32, p1 & _MASK32
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
        if r < 9:
            k0 = (k0 + _W0) & _MASK32
            k1 = (k1 + _W1) & _MASK32
    return np.stack([c0, c1, c2, c3], axis=-1).astype(np.uint32)


def _root_key(seed: int) -> np.ndarray:
    ctr = np.array([0, 0, 0, _ROOT_TAG], dtype=np.uint64)
    key = np.array([seed & 0xFFFFFFFF, (seed >> 32) & 0xFFFFFFFF], dtype=np.uint64)
    return philox4x32(ctr, key)[:2]


def _child_keys(parent_key: np.ndarray, indices) -> np.ndarray:
    idx = np.asarray(indices, dtype=np.uint64).reshape(-1)
    ctr = np.zeros((idx.size, 4), dtype=np.uint64)
    ctr[:, 0] = idx & _MASK32
    ctr[:, 1] = idx >> _SHIFT32
    ctr[:, 3] = _SPLIT_TAG
    key = np.broadcast_to(np.asarray(parent_key, dtype=np.uint64), (idx.size, 2))
    return philox4x32(ctr, key)[:, :2]


def _blocks(keys: np.ndarray, start: int, nblocks: int) -> np.ndarray:
    """Raw Philox output for counters ``start .. start+nblocks-1`` of each key."""
    keys = np.asarray(keys, dtype=np.uint64)
    positions = np.arange(start, start + nblocks, dtype=np.uint64)
    ctr = np.zeros(positions.shape + (4,), dtype=np.uint64)
    ctr[:, 0] = positions & _MASK32
    ctr[:, 1] = positions >> _SHIFT32
    return philox4x32(ctr[None, :, :], keys[:, None, :])


def _uniform_pairs(words: np.ndarray) -> np.ndarray:
    """Two uniforms in [0, 1) per Philox block (53 bits each)."""
    w = words.astype(np.uint64)
    a = ((w[..., 0] >> np.uint64(5)) << np.uint64(26)) + (w[..., 1] >> np.uint64(6))
    b = ((w[..., 2] >> np.uint64(5)) << np.uint64(26)) + (w[..., 3] >> np.uint64(6))
    return np.stack([a, b], axis=-1).astype(np.float64) * _TWO_POW_M53


def _box_muller(u: np.ndarray) -> np.ndarray:
    radius = np.sqrt(-2.0 * np.log1p(-u[..., 0]))
    angle = 2.0 * np.pi * u[..., 1]
    return np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1)


def gaussian_from_keys(keys: np.ndarray, count: int, start: int = 0) -> np.ndarray:
    """``count`` standard normals for each key, from block ``start`` onward.

    Row ``r`` equals what a fresh stream with key ``keys[r]`` would return for
    ``gaussian(count)`` after consuming ``start`` blocks.
    """
    nblocks = (count + 1) // 2
    z = _box_muller(_uniform_pairs(_blocks(keys, start, nblocks)))
    return z.reshape(len(keys), 2 * nblocks)[:, :count]


def uniform_from_keys(keys: np.ndarray, count: int, start: int = 0) -> np.ndarray:
    nblocks = (count + 1) // 2
    u = _uniform_pairs(_blocks(keys, start, nblocks))
    return u.reshape(len(keys), 2 * nblocks)[:, :count]


class RandomStream:
    """Deterministic random source identified by ``(seed, path)``.

    A stream is single-owner; hand each worker its own ``split``.
    """

    def __init__(self, seed: int, path: tuple[int, ...] = (), _key=None):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.path = tuple(int(i) for i in path)
        if _key is None:
            key = _root_key(seed)
            for index in self.path:
                key = _child_keys(key, [index])[0]
            _key = key
        self.key = np.asarray(_key, dtype=np.uint32)
        self.position = 0

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, path={list(self.path)}, position={self.position})"

    def split(self, index: int) -> RandomStream:
        if index < 0:
            raise ValueError("substream index must be non-negative")
        key = _child_keys(self.key, [index])[0]
        return RandomStream(self.seed, self.path + (int(index),), _key=key)

    def child_keys(self, indices) -> np.ndarray:
        """Keys of ``split(i)`` for every ``i`` in ``indices``, without building streams."""
        return _child_keys(self.key, indices).astype(np.uint32)

    def _take(self, nblocks: int) -> np.ndarray:
        words = _blocks(self.key[None, :], self.position, nblocks)[0]
        self.position += nblocks
        return words

    def uniform(self, size=None):
        count = 1 if size is None else int(np.prod(size))
        u = _uniform_pairs(self._take((count + 1) // 2)).reshape(-1)[:count]
        return float(u[0]) if size is None else u.reshape(size)

    def gaussian(self, size=None):
        count = 1 if size is None else int(np.prod(size))
        z = _box_muller(_uniform_pairs(self._take((count + 1) // 2))).reshape(-1)[:count]
        return float(z[0]) if size is None else z.reshape(size)

    def chi_square(self, k: int, size=None):
        """Chi-square with ``k`` degrees of freedom as a sum of ``k`` squared normals."""
        if int(k) != k or k < 1:
            raise ValueError(f"degrees of freedom must be a positive integer, got {k}")
        count = 1 if size is None else int(np.prod(size))
        z = self.gaussian((count, int(k)))
        x = np.sum(z * z, axis=1)
        return float(x[0]) if size is None else x.reshape(size)


def make_stream(seed: int) -> RandomStream:
    return RandomStream(seed)


def split_stream(s: RandomStream, index: int) -> RandomStream:
    return s.split(index)


def next_uniform(s: RandomStream) -> float:
    return s.uniform()


def next_gaussian(s: RandomStream) -> float:
    return s.gaussian()


def next_chi_square(s: RandomStream, k: int) -> float:
    return s.chi_square(k)
