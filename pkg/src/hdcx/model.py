"""Class-wise hyperspace clustering and nearest-prototype classification.

Training bundles each class's sample hypervectors into K cluster
prototypes via a k-means-style alternation done entirely in Hamming
space: rebuild each prototype as the majority of its members, then
reassign every member to its nearest same-class prototype. A new sample
is classified by the nearest prototype over all classes.

Cluster accumulators (the un-thresholded bundling sums) are retained so
the optional retraining stage can subtract a misclassified sample from
the prototype it wrongly matched and re-add it to its home cluster.

Prototype majority ties are drawn from streams keyed by (model seed,
class, cluster), so prototypes are a pure function of the accumulators
and the seed; that is what lets the model file store only accumulators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend
from .encoder import EncoderModel
from .errors import ConfigError
from .hv import Accumulator, Hypervector, majority, accumulate, nwords_for
from .opcount import COUNTERS
from .rng import SeededStream


@dataclass
class TrainConfig:
    clusters_per_class: int = 4
    cluster_iters: int = 10
    retrain_epochs: int = 2
    seed: int = 0
    # Treat a sample matched to a different cluster of its own class as an
    # error too (the stricter reading of the retraining rule). Off by
    # default: only class-level misclassifications trigger corrections.
    cluster_level_errors: bool = False

    def validate(self) -> None:
        if self.clusters_per_class < 1:
            raise ConfigError(f"clusters per class must be >= 1, got {self.clusters_per_class}")
        if self.cluster_iters < 0:
            raise ConfigError(f"clustering iterations must be >= 0, got {self.cluster_iters}")
        if self.retrain_epochs < 0:
            raise ConfigError(f"retrain epochs must be >= 0, got {self.retrain_epochs}")


@dataclass
class Cluster:
    class_idx: int
    cluster_idx: int
    accumulator: Accumulator
    prototype: Hypervector
    member_count: int


@dataclass
class ClusterModel:
    dim: int
    label_table: list  # j -> original label string
    clusters: list  # list over classes of list[Cluster]
    config: TrainConfig
    encoder: EncoderModel | None = None
    home_clusters: np.ndarray | None = None  # per training sample, frozen after clustering
    _proto_matrix: np.ndarray | None = field(default=None, repr=False)
    _proto_index: list = field(default_factory=list, repr=False)

    @property
    def n_classes(self) -> int:
        return len(self.label_table)

    def n_prototypes(self) -> int:
        return sum(len(cs) for cs in self.clusters)

    def tie_stream(self, j: int, k: int) -> SeededStream:
        return SeededStream(self.config.seed).split("cluster-ties", j, k)

    def rebuild_prototype(self, j: int, k: int) -> None:
        c = self.clusters[j][k]
        c.prototype = majority(c.accumulator, self.tie_stream(j, k))
        self._proto_matrix = None

    def prototype_matrix(self) -> tuple:
        """Stacked prototype words plus their (class, cluster) index table."""
        if self._proto_matrix is None:
            rows = []
            index = []
            for j, cs in enumerate(self.clusters):
                for k, c in enumerate(cs):
                    rows.append(c.prototype.words)
                    index.append((j, k))
            self._proto_matrix = np.ascontiguousarray(np.stack(rows))
            self._proto_index = index
        return self._proto_matrix, self._proto_index

    def prototype_matrix_for_class(self, j: int) -> tuple:
        rows = np.ascontiguousarray(np.stack([c.prototype.words for c in self.clusters[j]]))
        return rows, list(range(len(self.clusters[j])))


def _as_matrix(samples, dim: int) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        if samples.ndim != 2 or samples.shape[1] != nwords_for(dim):
            raise ValueError(f"packed sample matrix must be (n, {nwords_for(dim)})")
        return np.ascontiguousarray(samples)
    words = []
    for s in samples:
        if s.dim != dim:
            raise ValueError(f"dimension mismatch: sample {s.dim} vs model {dim}")
        words.append(s.words)
    return np.ascontiguousarray(np.stack(words))


def _labels_to_indices(labels) -> tuple:
    table = sorted(set(labels))
    lookup = {lab: j for j, lab in enumerate(table)}
    return np.array([lookup[lab] for lab in labels], dtype=np.int64), table


def init_clusters(samples, labels, config: TrainConfig, dim: int, encoder=None) -> tuple:
    """Random per-class assignment to K clusters; returns (model, matrix, y).

    Classes smaller than K get one cluster per sample at most; empty
    clusters from the random draw are repaired immediately so every
    prototype is backed by at least one member.
    """
    config.validate()
    matrix = _as_matrix(samples, dim)
    y, table = _labels_to_indices(labels)
    if matrix.shape[0] != y.shape[0]:
        raise ValueError("sample and label counts differ")
    root = SeededStream(config.seed)
    model = ClusterModel(dim=dim, label_table=table, clusters=[], config=config, encoder=encoder)
    assignments = np.zeros(matrix.shape[0], dtype=np.int64)
    for j in range(len(table)):
        members = np.flatnonzero(y == j)
        if members.size == 0:
            raise ConfigError(f"class {table[j]!r} has no training samples")
        k_eff = min(config.clusters_per_class, members.size)
        assign = root.split("init-assign", j).integers_below(k_eff, members.size)
        assignments[members] = assign
        model.clusters.append([None] * k_eff)
        _rebuild_class(model, j, matrix, members, assignments)
        _repair_empty(model, j, matrix, members, assignments)
    model.home_clusters = assignments
    return model, matrix, y


def _rebuild_class(model: ClusterModel, j: int, matrix, members, assignments) -> None:
    """Recompute all of class j's accumulators and prototypes from scratch."""
    for k in range(len(model.clusters[j])):
        rows = matrix[members[assignments[members] == k]]
        acc = Accumulator.from_packed_rows(rows, model.dim)
        proto = majority(acc, model.tie_stream(j, k))
        model.clusters[j][k] = Cluster(j, k, acc, proto, rows.shape[0])
    model._proto_matrix = None


def _repair_empty(model: ClusterModel, j: int, matrix, members, assignments) -> bool:
    """Reseed each empty cluster with the member farthest from its own prototype.

    Only clusters that would stay non-empty may donate. Returns True if any
    member moved.
    """
    moved = False
    clusters = model.clusters[j]
    for k in range(len(clusters)):
        if clusters[k].member_count > 0:
            continue
        assign = assignments[members]
        sizes = np.bincount(assign, minlength=len(clusters))
        donors = np.flatnonzero(sizes[assign] >= 2)
        if donors.size == 0:
            continue
        proto_words, _ = model.prototype_matrix_for_class(j)
        dists = backend.hamming_matrix(matrix[members[donors]], proto_words)
        COUNTERS.add_hamming(donors.size * proto_words.shape[0] * proto_words.shape[1])
        own = dists[np.arange(donors.size), assign[donors]]
        worst = donors[int(np.argmax(own))]
        assignments[members[worst]] = k
        moved = True
        _rebuild_class(model, j, matrix, members, assignments)
    return moved


def cluster_class(model: ClusterModel, j: int, iters: int, matrix, members, assignments) -> None:
    """Alternate majority-rebuild and nearest-prototype reassignment.

    Stops early once a full pass changes no assignment. After the loop the
    accumulators are rebuilt from the final assignment so they always
    describe the current members.
    """
    for _ in range(iters):
        _rebuild_class(model, j, matrix, members, assignments)
        proto_words, _ = model.prototype_matrix_for_class(j)
        dists = backend.hamming_matrix(matrix[members], proto_words)
        COUNTERS.add_hamming(members.size * proto_words.shape[0] * proto_words.shape[1])
        new_assign = np.argmin(dists, axis=1)
        changed = bool(np.any(new_assign != assignments[members]))
        assignments[members] = new_assign
        repaired = _repair_empty(model, j, matrix, members, assignments)
        if not (changed or repaired):
            break
    _rebuild_class(model, j, matrix, members, assignments)


def train(samples, labels, config: TrainConfig, dim: int | None = None, encoder: EncoderModel | None = None) -> ClusterModel:
    """Full pipeline: init, per-class clustering, then retraining epochs."""
    if dim is None:
        if encoder is not None:
            dim = encoder.dim
        else:
            try:
                dim = samples[0].dim
            except (IndexError, AttributeError) as exc:
                raise ValueError("cannot infer dimension; pass dim= or encoder=") from exc
    model, matrix, y = init_clusters(samples, labels, config, dim, encoder=encoder)
    assignments = model.home_clusters
    for j in range(model.n_classes):
        members = np.flatnonzero(y == j)
        cluster_class(model, j, config.cluster_iters, matrix, members, assignments)
    model.home_clusters = assignments
    for _ in range(config.retrain_epochs):
        retrain_epoch(model, matrix, y, assignments)
    return model


def classify_batch(model: ClusterModel, samples) -> tuple:
    """(class idx, cluster idx, distance) arrays for a batch of samples."""
    matrix = _as_matrix(samples, model.dim)
    proto_words, index = model.prototype_matrix()
    dists = backend.hamming_matrix(matrix, proto_words)
    COUNTERS.add_hamming(matrix.shape[0] * proto_words.shape[0] * proto_words.shape[1])
    flat = np.argmin(dists, axis=1)
    js = np.array([index[i][0] for i in flat], dtype=np.int64)
    ks = np.array([index[i][1] for i in flat], dtype=np.int64)
    best = dists[np.arange(dists.shape[0]), flat] / model.dim
    return js, ks, best


def classify(model: ClusterModel, s: Hypervector) -> tuple:
    """Nearest prototype over all (class, cluster) pairs; ties to the lowest."""
    if s.dim != model.dim:
        raise ValueError(f"dimension mismatch: sample {s.dim} vs model {model.dim}")
    js, ks, dist = classify_batch(model, [s])
    return int(js[0]), int(ks[0]), float(dist[0])


def nearest_cluster(model: ClusterModel, s: Hypervector, j: int) -> tuple:
    """As classify, restricted to class j's prototypes."""
    if s.dim != model.dim:
        raise ValueError(f"dimension mismatch: sample {s.dim} vs model {model.dim}")
    proto_words, _ = model.prototype_matrix_for_class(j)
    dists = backend.hamming_matrix(np.ascontiguousarray(s.words[None, :]), proto_words)[0]
    COUNTERS.add_hamming(proto_words.shape[0] * proto_words.shape[1])
    k = int(np.argmin(dists))
    return k, float(dists[k]) / model.dim


def retrain_epoch(model: ClusterModel, samples, labels_idx, homes=None) -> int:
    """One batch correction pass over the training set.

    Every error is judged against the model as it stood at the start of
    the epoch; the accumulator updates are applied afterwards in one
    batch, then the touched prototypes are re-thresholded. Returns the
    number of errors found (before the update).
    """
    matrix = _as_matrix(samples, model.dim)
    y = np.asarray(labels_idx, dtype=np.int64)
    if homes is None:
        homes = model.home_clusters
    if homes is None or len(homes) != matrix.shape[0]:
        raise ValueError("retraining needs one home-cluster assignment per sample")
    js, ks, _ = classify_batch(model, matrix)
    if model.config.cluster_level_errors:
        wrong = (js != y) | (ks != np.asarray(homes))
    else:
        wrong = js != y
    err_rows = np.flatnonzero(wrong)
    touched = set()
    for i in err_rows:
        s = Hypervector(model.dim, matrix[i].copy())
        winner = model.clusters[js[i]][ks[i]]
        home = model.clusters[y[i]][int(homes[i])]
        accumulate(winner.accumulator, s, -1)
        accumulate(home.accumulator, s, +1)
        touched.add((int(js[i]), int(ks[i])))
        touched.add((int(y[i]), int(homes[i])))
    for j, k in sorted(touched):
        model.rebuild_prototype(j, k)
    return int(err_rows.size)
