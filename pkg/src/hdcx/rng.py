"""Deterministic, splittable random streams.

Everything random in this package flows through SeededStream, a
counter-based generator built on the SplitMix64 finalizer: output word i
is mix64(key + (i+1) * GOLDEN_GAMMA). Because the state is just
(key, counter) and all arithmetic is unsigned 64-bit, identical seeds and
labels reproduce identical sequences on every platform.

Independent sub-streams are derived with split(*labels): the labels are
serialized and absorbed into the parent key through the same mixer, so
distinct label tuples give statistically independent streams. Convention
throughout the package: never share a stream between two purposes, split
a freshly labeled child instead.
"""

from __future__ import annotations

import numpy as np

_GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = 0xFFFFFFFFFFFFFFFF

def _wrap():
    # numpy intentionally wraps uint64 arithmetic here; silence the overflow
    # warnings locally rather than globally.
    return np.errstate(over="ignore")


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int, reduced mod 2**64."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def _mix64_array(z: np.ndarray) -> np.ndarray:
    with _wrap():
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def _absorb(key: int, label) -> int:
    """Fold one label (int, str or bytes) into a stream key."""
    if isinstance(label, (bool, np.bool_)):
        label = int(label)
    if isinstance(label, (int, np.integer)):
        key = mix64(key ^ 0x01)
        key = mix64(key ^ (int(label) & _MASK64))
        return key
    if isinstance(label, str):
        data = label.encode("utf-8")
        tag = 0x02
    elif isinstance(label, bytes):
        data = label
        tag = 0x03
    else:
        raise TypeError(f"stream labels must be int, str or bytes, got {type(label).__name__}")
    key = mix64(key ^ tag)
    key = mix64(key ^ len(data))
    for off in range(0, len(data), 8):
        chunk = int.from_bytes(data[off : off + 8], "little")
        key = mix64(key ^ chunk)
    return key


def hash_bytes(data: bytes, salt: int = 0) -> int:
    """Deterministic 64-bit hash of a byte string (used for tie contexts)."""
    return _absorb(mix64(salt), data)


class SeededStream:
    """Counter-based SplitMix64 stream with label-keyed splitting."""

    __slots__ = ("key", "_counter")

    def __init__(self, seed: int):
        self.key = int(seed) & _MASK64
        self._counter = 0

    def split(self, *labels) -> "SeededStream":
        """Derive an independent child stream keyed by the label tuple."""
        key = mix64(self.key ^ 0xA5A5A5A5A5A5A5A5)
        for label in labels:
            key = _absorb(key, label)
        return SeededStream(key)

    def words(self, n: int) -> np.ndarray:
        """Next n raw 64-bit words as a uint64 array; advances the stream."""
        if n < 0:
            raise ValueError("word count must be non-negative")
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        with _wrap():
            z = np.uint64(self.key) + idx * np.uint64(_GOLDEN_GAMMA)
        return _mix64_array(z)

    def uniform(self, shape) -> np.ndarray:
        """Doubles in [0, 1) with 53-bit resolution."""
        n = int(np.prod(shape, dtype=np.int64)) if not isinstance(shape, int) else shape
        w = self.words(n) >> np.uint64(11)
        out = w.astype(np.float64) * (1.0 / (1 << 53))
        return out.reshape(shape)

    def integer_below(self, bound: int) -> int:
        """One integer in [0, bound), via the multiply-shift reduction."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        w = int(self.words(1)[0])
        return (w * bound) >> 64

    def integers_below(self, bound: int, n: int) -> np.ndarray:
        """n integers in [0, bound) as int64."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        w = self.words(n)
        # multiply-shift in object space would be slow; bound is small in
        # practice so the bias of a 128-bit reduction done in two halves is
        # avoided by using Python ints only when bound is large.
        if bound <= 1 << 32:
            hi = (w >> np.uint64(32)).astype(np.int64)
            return (hi * bound) >> 32
        return np.array([(int(x) * bound) >> 64 for x in w], dtype=np.int64)

    def permutation(self, n: int) -> np.ndarray:
        """Deterministic permutation of range(n) (argsort of random keys)."""
        return np.argsort(self.words(n), kind="stable")

    def choose(self, n: int, k: int) -> np.ndarray:
        """k distinct indices drawn uniformly from range(n), sorted."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot choose {k} from {n}")
        return np.sort(self.permutation(n)[:k])
