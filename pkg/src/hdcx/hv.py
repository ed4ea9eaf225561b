"""Bit-packed bipolar hypervectors and their elementary operations.

A hypervector of dimension D lives in {-1, +1}^D and is stored packed,
64 positions per uint64 word: stored bit 1 means value -1 and stored bit 0
means value +1. Under that encoding binding is a word-wise XOR and Hamming
distance is popcount-of-XOR, which is what makes the classifier cheap.

All operations are pure functions of their inputs (randomized ones take an
explicit SeededStream); Hypervector and Accumulator are value types and
read-only sharing across threads is safe.
"""

from __future__ import annotations

import numpy as np

from . import backend
from .opcount import COUNTERS
from .rng import SeededStream

_INT32_MAX = 2**31 - 1


def nwords_for(dim: int) -> int:
    return (dim + 63) // 64


def _pad_mask(dim: int) -> np.ndarray:
    """All-ones over the D logical bits, zeros over padding."""
    mask = np.full(nwords_for(dim), 0xFFFFFFFFFFFFFFFF, dtype=np.uint64)
    tail = dim % 64
    if tail:
        mask[-1] = np.uint64((1 << tail) - 1)
    return mask


class Hypervector:
    """Immutable packed bipolar vector."""

    __slots__ = ("dim", "words")

    def __init__(self, dim: int, words: np.ndarray):
        if dim < 1:
            raise ValueError(f"hypervector dimension must be >= 1, got {dim}")
        if words.dtype != np.uint64 or words.shape != (nwords_for(dim),):
            raise ValueError("words must be a uint64 array of length ceil(dim/64)")
        self.dim = dim
        self.words = np.ascontiguousarray(words)
        self.words.flags.writeable = False

    @classmethod
    def from_bipolar(cls, values) -> "Hypervector":
        """Build from an iterable of +1/-1 entries."""
        arr = np.asarray(values)
        if arr.ndim != 1 or not np.all(np.abs(arr) == 1):
            raise ValueError("bipolar input must be a 1-D array of +1/-1")
        bits = (arr < 0).astype(np.uint8)
        return cls(arr.shape[0], pack_bits(bits))

    def to_bipolar(self) -> np.ndarray:
        """View as an int8 array of +1/-1 entries."""
        bits = unpack_bits(self.words, self.dim)
        return (1 - 2 * bits.astype(np.int8)).astype(np.int8)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Hypervector)
            and self.dim == other.dim
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self):
        return hash((self.dim, self.words.tobytes()))

    def __repr__(self) -> str:
        return f"Hypervector(dim={self.dim})"


class Accumulator:
    """Signed per-position sums of bipolar entries, kept un-thresholded.

    Retraining needs subtraction, so the raw counts are retained instead of
    only the majority result. Counts are 32-bit; the op budget is guarded so
    overflow raises instead of wrapping.
    """

    __slots__ = ("dim", "counts", "contributions", "_ops")

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"accumulator dimension must be >= 1, got {dim}")
        self.dim = dim
        self.counts = np.zeros(dim, dtype=np.int32)
        self.contributions = 0
        self._ops = 0

    @classmethod
    def from_counts(cls, counts: np.ndarray, contributions: int, ops: int | None = None) -> "Accumulator":
        acc = cls(counts.shape[0])
        acc.counts = np.ascontiguousarray(counts, dtype=np.int32)
        acc.contributions = int(contributions)
        acc._ops = abs(int(contributions)) if ops is None else int(ops)
        return acc

    @classmethod
    def from_packed_rows(cls, rows: np.ndarray, dim: int) -> "Accumulator":
        """Bundle n packed vectors (an (n, nwords) matrix) in one pass."""
        n = rows.shape[0]
        if n > _INT32_MAX:
            raise OverflowError("accumulator contribution budget exceeded")
        acc = cls(dim)
        bitsum = backend.bitsum_columns(np.ascontiguousarray(rows), dim)
        acc.counts = (n - 2 * bitsum).astype(np.int32)
        acc.contributions = n
        acc._ops = n
        return acc

    def copy(self) -> "Accumulator":
        dup = Accumulator(self.dim)
        dup.counts = self.counts.copy()
        dup.contributions = self.contributions
        dup._ops = self._ops
        return dup


def random_hv(stream: SeededStream, dim: int) -> Hypervector:
    """I.i.d. +-1 entries with probability 0.5 each, from the stream."""
    if dim < 1:
        raise ValueError(f"hypervector dimension must be >= 1, got {dim}")
    words = stream.words(nwords_for(dim)) & _pad_mask(dim)
    return Hypervector(dim, words)


def bind(a: Hypervector, b: Hypervector) -> Hypervector:
    """Element-wise product in bipolar semantics; XOR on the packed words."""
    _check_dims(a, b)
    COUNTERS.add_xor(a.words.shape[0])
    return Hypervector(a.dim, a.words ^ b.words)


def negate(a: Hypervector) -> Hypervector:
    """Flip every entry."""
    COUNTERS.add_xor(a.words.shape[0])
    return Hypervector(a.dim, a.words ^ _pad_mask(a.dim))


def hamming(a: Hypervector, b: Hypervector) -> float:
    """Fraction of positions where a and b disagree, in [0, 1]."""
    _check_dims(a, b)
    COUNTERS.add_hamming(a.words.shape[0])
    return backend.hamming_words(a.words, b.words) / a.dim


def accumulate(acc: Accumulator, s: Hypervector, sign: int = 1) -> Accumulator:
    """Add (sign=+1) or subtract (sign=-1) a vector's bipolar entries."""
    if acc.dim != s.dim:
        raise ValueError(f"dimension mismatch: accumulator {acc.dim} vs vector {s.dim}")
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    if acc._ops >= _INT32_MAX:
        raise OverflowError("accumulator contribution budget exceeded")
    backend.add_bipolar(acc.counts, s.words, sign)
    acc.contributions += sign
    acc._ops += 1
    return acc


def majority(acc: Accumulator, tie_stream: SeededStream) -> Hypervector:
    """Threshold the accumulator: sign of each count, ties from the stream.

    The tie bit for position i is bit i of the stream's opening block, so
    the result is a pure function of (counts, stream key) no matter how
    many ties there are.
    """
    nw = nwords_for(acc.dim)
    tie_words = tie_stream.words(nw) & _pad_mask(acc.dim)
    words = backend.majority_pack(acc.counts, tie_words, acc.dim)
    return Hypervector(acc.dim, words)


def flip_bits(s: Hypervector, p: float, stream: SeededStream) -> Hypervector:
    """Negate round(p * D) distinct positions chosen uniformly at random."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"flip fraction must be in [0, 1], got {p}")
    k = int(np.floor(p * s.dim + 0.5))
    positions = stream.choose(s.dim, k)
    COUNTERS.add_xor(s.words.shape[0])
    return Hypervector(s.dim, s.words ^ flip_mask(s.dim, positions))


def flip_mask(dim: int, positions: np.ndarray) -> np.ndarray:
    """Packed mask with the given positions set."""
    mask = np.zeros(nwords_for(dim), dtype=np.uint64)
    if len(positions):
        pos = np.asarray(positions, dtype=np.int64)
        np.bitwise_or.at(mask, pos >> 6, np.uint64(1) << (pos & 63).astype(np.uint64))
    return mask


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """uint8 0/1 array of length dim -> packed uint64 words."""
    dim = bits.shape[0]
    packed = np.packbits(bits.astype(np.uint8), bitorder="little")
    buf = np.zeros(nwords_for(dim) * 8, dtype=np.uint8)
    buf[: packed.shape[0]] = packed
    return buf.view(np.uint64)


def unpack_bits(words: np.ndarray, dim: int) -> np.ndarray:
    """Packed uint64 words -> uint8 0/1 array of length dim."""
    return np.unpackbits(words.view(np.uint8), bitorder="little")[:dim]


def _check_dims(a: Hypervector, b: Hypervector) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
