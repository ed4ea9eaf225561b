"""Feature-vector encoding into sample hypervectors.

The encoder owns three deterministic artifacts, all regenerable from
(seed, D, M, d):

* a level set: M chained hypervectors where level i and level j sit at
  Hamming distance |i - j| / (M - 1) exactly, used to represent quantized
  feature values so that nearby values stay nearby in hyperspace;
* an identity dictionary: d independent random hypervectors naming the
  features, which makes distinct features quasi-orthogonal after binding;
* a per-feature quantizer mapping raw values onto levels 1..M, anchored at
  the 2% and 98% training quantiles so outliers saturate into the first
  and last levels.

A sample encodes as the majority over { id[n] XOR level[l_n(x_n)] }.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import ConfigError, DataError
from .hv import Hypervector, nwords_for, _pad_mask
from .opcount import COUNTERS
from .rng import SeededStream, hash_bytes


@dataclass
class LevelSet:
    """M level hypervectors with exactly proportional pairwise distances."""

    dim: int
    m: int
    words: np.ndarray  # (m, nwords) uint64

    def vector(self, level: int) -> Hypervector:
        """Level hypervector for a 1-based level index."""
        if not 1 <= level <= self.m:
            raise ValueError(f"level must be in [1, {self.m}], got {level}")
        return Hypervector(self.dim, self.words[level - 1].copy())


@dataclass
class IdDictionary:
    """One random identity hypervector per feature."""

    dim: int
    d: int
    words: np.ndarray  # (d, nwords) uint64

    def vector(self, feature: int) -> Hypervector:
        """Identity hypervector for a 0-based feature index."""
        if not 0 <= feature < self.d:
            raise ValueError(f"feature index out of range: {feature}")
        return Hypervector(self.dim, self.words[feature].copy())


def build_level_set(stream: SeededStream, dim: int, m: int) -> LevelSet:
    """Chain construction: each level flips a fresh block of dim/(m-1) bits.

    Walking the chain never touches a position twice, so distances are
    exact multiples of 1/(m-1) rather than concentrated around them.
    """
    if m < 2:
        raise ConfigError(f"level count must be >= 2, got {m}")
    if dim % (m - 1) != 0:
        raise ConfigError(
            f"level count minus one must divide the dimension: (M-1)={m - 1} does not divide D={dim}"
        )
    step = dim // (m - 1)
    nw = nwords_for(dim)
    base = stream.split("base").words(nw) & _pad_mask(dim)
    order = stream.split("flip-order").permutation(dim)
    words = np.empty((m, nw), dtype=np.uint64)
    words[0] = base
    from .hv import flip_mask

    for i in range(1, m):
        block = order[(i - 1) * step : i * step]
        words[i] = words[i - 1] ^ flip_mask(dim, block)
    return LevelSet(dim, m, words)


def build_id_dictionary(stream: SeededStream, dim: int, d: int) -> IdDictionary:
    if d < 1:
        raise ConfigError(f"feature count must be >= 1, got {d}")
    nw = nwords_for(dim)
    words = stream.words(d * nw).reshape(d, nw) & _pad_mask(dim)[None, :]
    return IdDictionary(dim, d, np.ascontiguousarray(words))


@dataclass
class FeatureQuantizer:
    """Per-feature thresholds at the 2% / 98% training quantiles."""

    lower: np.ndarray  # (d,) float64
    upper: np.ndarray  # (d,) float64
    m: int

    @property
    def d(self) -> int:
        return self.lower.shape[0]

    @property
    def constant_features(self) -> np.ndarray:
        return np.flatnonzero(self.upper == self.lower)

    def spans(self) -> np.ndarray:
        return self.upper - self.lower


def fit_quantizer(data: np.ndarray, m: int) -> FeatureQuantizer:
    """Thresholds from linear-interpolated empirical quantiles per feature."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise ConfigError(f"training data must be a 2-D matrix, got ndim={data.ndim}")
    if data.shape[0] < 2:
        raise ConfigError(f"quantizer needs at least 2 samples, got {data.shape[0]}")
    if not np.all(np.isfinite(data)):
        bad = np.argwhere(~np.isfinite(data))[0]
        raise DataError(f"non-finite value in training data at row {bad[0]}, feature {bad[1]}")
    lower, upper = np.quantile(data, [0.02, 0.98], axis=0, method="linear")
    return FeatureQuantizer(lower=lower, upper=upper, m=m)


def level_index(q: FeatureQuantizer, n: int, x: float) -> int:
    """Map one value of feature n onto a level in [1, M]."""
    if not 0 <= n < q.d:
        raise ValueError(f"feature index out of range: {n}")
    if not np.isfinite(x):
        raise DataError(f"non-finite value for feature {n}")
    lo, hi = q.lower[n], q.upper[n]
    if x < lo or hi == lo:
        return 1
    if x >= hi:
        return q.m
    lvl = int(np.floor((x - lo) / (hi - lo) * q.m + 1.0))
    return min(max(lvl, 1), q.m)


def level_indices(q: FeatureQuantizer, data: np.ndarray) -> np.ndarray:
    """Vectorized level_index over an (n_samples, d) matrix."""
    lo, hi = q.lower[None, :], q.upper[None, :]
    span = hi - lo
    safe = np.where(span == 0, 1.0, span)
    lvl = np.floor((data - lo) / safe * q.m + 1.0)
    lvl = np.where(data < lo, 1.0, lvl)
    lvl = np.where(data >= hi, float(q.m), lvl)
    lvl = np.where(span == 0, 1.0, lvl)
    return np.clip(lvl, 1, q.m).astype(np.int64)


@dataclass
class EncoderModel:
    """Everything needed to encode feature vectors, regenerable from seed."""

    dim: int
    m: int
    seed: int
    quantizer: FeatureQuantizer
    levels: LevelSet = field(repr=False)
    ids: IdDictionary = field(repr=False)
    warnings: list = field(default_factory=list)

    @property
    def d(self) -> int:
        return self.quantizer.d

    @classmethod
    def build(cls, seed: int, dim: int, m: int, quantizer: FeatureQuantizer) -> "EncoderModel":
        if dim < 1:
            raise ConfigError(f"dimension must be >= 1, got {dim}")
        root = SeededStream(seed)
        levels = build_level_set(root.split("levels"), dim, m)
        ids = build_id_dictionary(root.split("ids"), dim, quantizer.d)
        warnings = [
            f"feature {int(n)} is constant in the training data; all its values map to level 1"
            for n in quantizer.constant_features
        ]
        return cls(dim=dim, m=m, seed=seed, quantizer=quantizer, levels=levels, ids=ids, warnings=warnings)

    def _tie_stream(self, sample_hash: int) -> SeededStream:
        return SeededStream(self.seed).split("encode-ties", sample_hash)

    def _encode_row(self, row: np.ndarray, lvls: np.ndarray) -> np.ndarray:
        bound = self.ids.words ^ self.levels.words[lvls - 1]
        COUNTERS.add_xor(bound.size)
        bitsum = backend.bitsum_columns(bound, self.dim)
        counts = (self.d - 2 * bitsum).astype(np.int32)
        ties = self._tie_stream(hash_bytes(row.tobytes())).words(nwords_for(self.dim)) & _pad_mask(self.dim)
        return backend.majority_pack(counts, ties, self.dim)


def encode(enc: EncoderModel, sample) -> Hypervector:
    """Encode one feature vector into a sample hypervector."""
    row = np.asarray(sample, dtype=np.float64)
    if row.shape != (enc.d,):
        raise ValueError(f"sample has {row.shape} values, encoder expects ({enc.d},)")
    if not np.all(np.isfinite(row)):
        raise DataError(f"non-finite value for feature {int(np.argwhere(~np.isfinite(row))[0])}")
    lvls = level_indices(enc.quantizer, row[None, :])[0]
    return Hypervector(enc.dim, enc._encode_row(row, lvls))


def encode_matrix(enc: EncoderModel, data: np.ndarray) -> np.ndarray:
    """Row-wise encode into an (n, nwords) packed matrix.

    Identical to calling encode per row; kept separate so bulk callers can
    avoid one Hypervector wrapper per sample.
    """
    data = np.ascontiguousarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != enc.d:
        raise ValueError(f"data must be (n, {enc.d}), got {data.shape}")
    if not np.all(np.isfinite(data)):
        bad = np.argwhere(~np.isfinite(data))[0]
        raise DataError(f"non-finite value at row {bad[0]}, feature {bad[1]}")
    lvls = level_indices(enc.quantizer, data)
    out = np.empty((data.shape[0], nwords_for(enc.dim)), dtype=np.uint64)
    for i in range(data.shape[0]):
        out[i] = enc._encode_row(data[i], lvls[i])
    return out


def encode_batch(enc: EncoderModel, data: np.ndarray) -> list:
    """Row-wise encode; output order matches input order."""
    data = np.asarray(data, dtype=np.float64)
    if data.size == 0:
        return []
    matrix = encode_matrix(enc, data)
    return [Hypervector(enc.dim, matrix[i].copy()) for i in range(matrix.shape[0])]
