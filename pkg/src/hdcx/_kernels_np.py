"""Pure-numpy kernel backend for packed hypervector words.

Mirrors the API of the Cython extension (_kernels_cy). All functions take
C-contiguous uint64 arrays where bit i of a vector lives at bit (i % 64)
of word (i // 64). Results are bit-identical to the compiled backend.
"""

import numpy as np

_CHUNK_BYTES = 1 << 25  # cap broadcast temporaries at 32 MB


def hamming_words(a: np.ndarray, b: np.ndarray) -> int:
    """Number of differing bits between two packed vectors."""
    return int(np.bitwise_count(a ^ b).sum(dtype=np.int64))


def hamming_matrix(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    """(n, m) matrix of differing-bit counts between rows of x and p."""
    n, w = x.shape
    m = p.shape[0]
    out = np.empty((n, m), dtype=np.int64)
    rows_per_chunk = max(1, _CHUNK_BYTES // max(1, m * w * 8))
    for lo in range(0, n, rows_per_chunk):
        hi = min(n, lo + rows_per_chunk)
        xo = x[lo:hi, None, :] ^ p[None, :, :]
        out[lo:hi] = np.bitwise_count(xo).sum(axis=2, dtype=np.int64)
    return out


def bitsum_columns(x: np.ndarray, dim: int) -> np.ndarray:
    """Per-position count of set bits across the n rows of x."""
    n, w = x.shape
    if n == 0:
        return np.zeros(dim, dtype=np.int64)
    as_bytes = np.ascontiguousarray(x).view(np.uint8).reshape(n, w * 8)
    bits = np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :dim]
    return bits.sum(axis=0, dtype=np.int64)


def add_bipolar(counts: np.ndarray, words: np.ndarray, sign: int) -> None:
    """counts[i] += sign * (+1 if bit i clear else -1), in place."""
    dim = counts.shape[0]
    bits = np.unpackbits(words.view(np.uint8), bitorder="little")[:dim]
    counts += np.int32(sign) * (1 - 2 * bits.astype(np.int32))


def majority_pack(counts: np.ndarray, tie_words: np.ndarray, dim: int) -> np.ndarray:
    """Pack sign(counts) into words; zero counts take bits from tie_words."""
    tie_bits = np.unpackbits(tie_words.view(np.uint8), bitorder="little")[:dim]
    bits = np.where(counts < 0, np.uint8(1), np.where(counts > 0, np.uint8(0), tie_bits))
    packed = np.packbits(bits, bitorder="little")
    nwords = tie_words.shape[0]
    buf = np.zeros(nwords * 8, dtype=np.uint8)
    buf[: packed.shape[0]] = packed
    return buf.view(np.uint64)
