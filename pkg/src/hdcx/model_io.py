"""Versioned binary model files.

Layout (all little-endian): a "HDCX" magic tag, format version, the
hyperparameters and seed, the label table, the per-feature quantizer
thresholds, and every cluster accumulator as raw signed counts. Neither
prototypes nor the level/identity dictionaries are stored: both are pure
functions of the seed and the accumulators, so they are regenerated on
load. Two CRC32 checksums guard the file: one over the whole payload
(any byte corruption) and one over the regenerated prototype words
(catches a reader whose regeneration drifted from the writer's).
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .encoder import EncoderModel, FeatureQuantizer
from .errors import ModelFileError
from .hv import Accumulator, majority
from .model import Cluster, ClusterModel, TrainConfig

MAGIC = b"HDCX"
FORMAT_VERSION = 1


def _prototype_crc(model: ClusterModel) -> int:
    crc = 0
    for cs in model.clusters:
        for c in cs:
            crc = zlib.crc32(c.prototype.words.tobytes(), crc)
    return crc


def save_model(model: ClusterModel, path) -> None:
    if model.encoder is None:
        raise ValueError("model has no encoder attached; cannot serialize a standalone cluster set")
    enc = model.encoder
    cfg = model.config
    parts = [MAGIC]
    parts.append(
        struct.pack(
            "<IIIIIIIIIQ",
            FORMAT_VERSION,
            model.dim,
            enc.m,
            enc.d,
            model.n_classes,
            cfg.clusters_per_class,
            cfg.cluster_iters,
            cfg.retrain_epochs,
            1 if cfg.cluster_level_errors else 0,
            cfg.seed,
        )
    )
    for label in model.label_table:
        raw = str(label).encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
    parts.append(np.ascontiguousarray(enc.quantizer.lower, dtype=np.float64).tobytes())
    parts.append(np.ascontiguousarray(enc.quantizer.upper, dtype=np.float64).tobytes())
    for cs in model.clusters:
        parts.append(struct.pack("<I", len(cs)))
    for cs in model.clusters:
        for c in cs:
            parts.append(struct.pack("<Iqq", c.member_count, c.accumulator.contributions, c.accumulator._ops))
            parts.append(c.accumulator.counts.tobytes())
    parts.append(struct.pack("<I", _prototype_crc(model)))
    payload = b"".join(parts)
    payload += struct.pack("<I", zlib.crc32(payload))
    with open(path, "wb") as fh:
        fh.write(payload)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelFileError("truncated model file")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_model(path) -> ClusterModel:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4 or data[:4] != MAGIC:
        raise ModelFileError("not a model file (bad magic)")
    if len(data) < 12:
        raise ModelFileError("truncated model file")
    (stored_crc,) = struct.unpack("<I", data[-4:])
    if zlib.crc32(data[:-4]) != stored_crc:
        raise ModelFileError("model file checksum mismatch (corrupted file)")
    r = _Reader(data[:-4])
    r.take(4)  # magic
    (version,) = r.unpack("<I")
    if version != FORMAT_VERSION:
        raise ModelFileError(f"unsupported model format version {version} (this reader supports {FORMAT_VERSION})")
    dim, m, d, n_classes, k_nominal, iters, retrain, flags, seed = r.unpack("<IIIIIIIIQ")
    labels = []
    for _ in range(n_classes):
        (ln,) = r.unpack("<I")
        labels.append(r.take(ln).decode("utf-8"))
    lower = np.frombuffer(r.take(8 * d), dtype=np.float64).copy()
    upper = np.frombuffer(r.take(8 * d), dtype=np.float64).copy()
    quantizer = FeatureQuantizer(lower=lower, upper=upper, m=m)
    encoder = EncoderModel.build(seed, dim, m, quantizer)
    cfg = TrainConfig(
        clusters_per_class=k_nominal,
        cluster_iters=iters,
        retrain_epochs=retrain,
        seed=seed,
        cluster_level_errors=bool(flags & 1),
    )
    counts_per_class = [r.unpack("<I")[0] for _ in range(n_classes)]
    model = ClusterModel(dim=dim, label_table=labels, clusters=[], config=cfg, encoder=encoder)
    for j, n_clusters in enumerate(counts_per_class):
        cs = []
        for k in range(n_clusters):
            member_count, contributions, ops = r.unpack("<Iqq")
            counts = np.frombuffer(r.take(4 * dim), dtype=np.int32).copy()
            acc = Accumulator.from_counts(counts, contributions, ops)
            proto = majority(acc, model.tie_stream(j, k))
            cs.append(Cluster(j, k, acc, proto, member_count))
        model.clusters.append(cs)
    (proto_crc,) = r.unpack("<I")
    if r.pos != len(r.data):
        raise ModelFileError("trailing bytes after model payload")
    if _prototype_crc(model) != proto_crc:
        raise ModelFileError("regenerated prototypes do not match the stored checksum")
    return model
