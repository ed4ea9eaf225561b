"""Evaluation harness: k-fold runs, perturbation experiments, sweeps, timing.

Every run is reproducible bit-for-bit from (data, config, seed): folds,
cluster initialization, tie bits, noise draws and bit flips all come from
labeled sub-streams of the master seed. Perturbations touch exactly one
stage each: input noise perturbs test features, subsampling shrinks the
training split, bit flips corrupt stored prototypes.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .data import stratified_folds
from .encoder import EncoderModel, encode_matrix, fit_quantizer
from .errors import ConfigError
from .hv import Hypervector, flip_bits, nwords_for
from .model import ClusterModel, Cluster, TrainConfig, classify_batch, train
from .opcount import COUNTERS
from .rng import SeededStream


@dataclass
class RunConfig:
    """Full hyperparameter set for one harness run."""

    dim: int = 10000
    levels: int = 101
    clusters: int = 4
    iters: int = 10
    retrain: int = 2
    seed: int = 0
    folds: int = 10
    cluster_level_errors: bool = False

    def validate(self) -> None:
        if self.dim < 1:
            raise ConfigError(f"dimension must be >= 1, got {self.dim}")
        if self.levels < 2:
            raise ConfigError(f"level count must be >= 2, got {self.levels}")
        if self.dim % (self.levels - 1) != 0:
            raise ConfigError(
                f"level count minus one must divide the dimension: (M-1)={self.levels - 1} does not divide D={self.dim}"
            )
        self.train_config().validate()

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            clusters_per_class=self.clusters,
            cluster_iters=self.iters,
            retrain_epochs=self.retrain,
            seed=self.seed,
            cluster_level_errors=self.cluster_level_errors,
        )

    def echo(self) -> dict:
        return {
            "dim": self.dim,
            "levels": self.levels,
            "clusters": self.clusters,
            "iters": self.iters,
            "retrain": self.retrain,
            "seed": self.seed,
            "folds": self.folds,
            "cluster_level_errors": self.cluster_level_errors,
        }


@dataclass
class ExperimentReport:
    kind: str
    config: dict
    fold_accuracies: list
    mean_accuracy: float
    std_accuracy: float
    curves: list = field(default_factory=list)
    timings: dict | None = None
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "fold_accuracies": self.fold_accuracies,
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "curves": self.curves,
            "timings": self.timings,
            "warnings": self.warnings,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _mean_std(values) -> tuple:
    arr = np.asarray(values, dtype=np.float64)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), std


def _curve_point(knob: str, value, fold_accs) -> dict:
    mean, std = _mean_std(fold_accs)
    return {
        "knob": knob,
        "value": value,
        "fold_accuracies": [float(a) for a in fold_accs],
        "mean_accuracy": mean,
        "std_accuracy": std,
    }


class _Fold:
    """One trained fold: encoder, model, and the row index split."""

    def __init__(self, fold_id, encoder, model, train_idx, test_idx):
        self.fold_id = fold_id
        self.encoder = encoder
        self.model = model
        self.train_idx = train_idx
        self.test_idx = test_idx


def _train_folds(data, labels, config: RunConfig, train_rows_fn=None) -> tuple:
    """Train one model per stratified fold; returns (folds, warnings).

    train_rows_fn optionally narrows each fold's training rows (used by the
    subsample experiment); it receives (fold_id, train_indices, labels) and
    returns the indices actually trained on.
    """
    config.validate()
    labels = list(labels)
    y = np.asarray(labels, dtype=object)
    fold_of = stratified_folds(labels, config.folds, SeededStream(config.seed))
    folds = []
    warnings = set()
    for f in range(config.folds):
        test_idx = np.flatnonzero(fold_of == f)
        train_idx = np.flatnonzero(fold_of != f)
        if train_rows_fn is not None:
            train_idx = train_rows_fn(f, train_idx, y)
        quantizer = fit_quantizer(data[train_idx], config.levels)
        enc = EncoderModel.build(config.seed, config.dim, config.levels, quantizer)
        warnings.update(enc.warnings)
        s_train = encode_matrix(enc, data[train_idx])
        model = train(s_train, [labels[i] for i in train_idx], config.train_config(), dim=config.dim, encoder=enc)
        folds.append(_Fold(f, enc, model, train_idx, test_idx))
    return folds, sorted(warnings)


def _fold_accuracy(fold: _Fold, data, labels, model: ClusterModel | None = None, test_features=None) -> float:
    model = model or fold.model
    feats = data[fold.test_idx] if test_features is None else test_features
    s_test = encode_matrix(fold.encoder, feats)
    js, _, _ = classify_batch(model, s_test)
    predicted = [model.label_table[j] for j in js]
    actual = [labels[i] for i in fold.test_idx]
    return float(np.mean([p == a for p, a in zip(predicted, actual)]))


def kfold_evaluate(data, labels, config: RunConfig, extra_config: dict | None = None) -> ExperimentReport:
    """Stratified k-fold accuracy under the given hyperparameters."""
    folds, warnings = _train_folds(data, labels, config)
    accs = [_fold_accuracy(f, data, labels) for f in folds]
    mean, std = _mean_std(accs)
    cfg = dict(extra_config or {}) | config.echo()
    return ExperimentReport("evaluate", cfg, [float(a) for a in accs], mean, std, warnings=warnings)


def noise_experiment(data, labels, deltas, config: RunConfig, extra_config: dict | None = None) -> ExperimentReport:
    """Accuracy vs bounded uniform noise on test features only."""
    deltas = list(deltas)
    if any(not 0.0 <= x <= 1.0 for x in deltas):
        raise ConfigError("noise ratios must lie in [0, 1]")
    folds, warnings = _train_folds(data, labels, config)
    base_accs = [_fold_accuracy(f, data, labels) for f in folds]
    root = SeededStream(config.seed).split("noise")
    curves = []
    for di, delta in enumerate(deltas):
        accs = []
        for fold in folds:
            feats = data[fold.test_idx]
            spans = fold.encoder.quantizer.spans()
            u = root.split(di, fold.fold_id).uniform(feats.shape)
            noisy = feats + (2.0 * u - 1.0) * delta * spans[None, :]
            accs.append(_fold_accuracy(fold, data, labels, test_features=noisy))
        curves.append(_curve_point("noise", delta, accs))
    mean, std = _mean_std(base_accs)
    cfg = dict(extra_config or {}) | config.echo()
    return ExperimentReport("perturb-noise", cfg, [float(a) for a in base_accs], mean, std, curves, warnings=warnings)


def subsample_experiment(data, labels, fractions, config: RunConfig, extra_config: dict | None = None) -> ExperimentReport:
    """Accuracy vs stratified shrinking of each fold's training split."""
    fractions = list(fractions)
    if any(not 0.0 < x <= 1.0 for x in fractions):
        raise ConfigError("training fractions must lie in (0, 1]")
    base_folds, warnings = _train_folds(data, labels, config)
    base_accs = [_fold_accuracy(f, data, labels) for f in base_folds]
    root = SeededStream(config.seed).split("subsample")
    curves = []
    for fi, frac in enumerate(fractions):
        def narrowed(fold_id, train_idx, y):
            keep = []
            for j, lab in enumerate(sorted(set(y[train_idx]))):
                rows = train_idx[y[train_idx] == lab]
                m = int(np.floor(frac * rows.size + 0.5))
                if m < 1:
                    raise ConfigError(
                        f"training fraction {frac} leaves class {lab!r} empty ({rows.size} rows in fold {fold_id})"
                    )
                chosen = root.split(fi, fold_id, j).choose(rows.size, m)
                keep.append(rows[chosen])
            return np.sort(np.concatenate(keep))

        folds, _ = _train_folds(data, labels, config, train_rows_fn=narrowed)
        accs = [_fold_accuracy(f, data, labels) for f in folds]
        curves.append(_curve_point("fraction", frac, accs))
    mean, std = _mean_std(base_accs)
    cfg = dict(extra_config or {}) | config.echo()
    return ExperimentReport("perturb-subsample", cfg, [float(a) for a in base_accs], mean, std, curves, warnings=warnings)


def _with_flipped_prototypes(model: ClusterModel, p: float, stream: SeededStream) -> ClusterModel:
    """Copy of the model with every stored prototype corrupted; accumulators shared."""
    flipped = ClusterModel(
        dim=model.dim,
        label_table=list(model.label_table),
        clusters=[],
        config=model.config,
        encoder=model.encoder,
    )
    for j, cs in enumerate(model.clusters):
        row = []
        for k, c in enumerate(cs):
            proto = flip_bits(c.prototype, p, stream.split(j, k))
            row.append(Cluster(j, k, c.accumulator, proto, c.member_count))
        flipped.clusters.append(row)
    return flipped


def bitflip_experiment(data, labels, ps, config: RunConfig, extra_config: dict | None = None) -> ExperimentReport:
    """Accuracy vs random corruption of all stored prototypes."""
    ps = list(ps)
    if any(not 0.0 <= x <= 0.5 for x in ps):
        raise ConfigError("bit-flip fractions must lie in [0, 0.5]")
    folds, warnings = _train_folds(data, labels, config)
    base_accs = [_fold_accuracy(f, data, labels) for f in folds]
    root = SeededStream(config.seed).split("bitflip")
    curves = []
    for pi, p in enumerate(ps):
        accs = []
        for fold in folds:
            corrupted = _with_flipped_prototypes(fold.model, p, root.split(pi, fold.fold_id))
            accs.append(_fold_accuracy(fold, data, labels, model=corrupted))
        curves.append(_curve_point("bitflip", p, accs))
    mean, std = _mean_std(base_accs)
    cfg = dict(extra_config or {}) | config.echo()
    return ExperimentReport("perturb-bitflip", cfg, [float(a) for a in base_accs], mean, std, curves, warnings=warnings)


_SWEEP_AXES = {"dim": "dim", "clusters": "clusters", "retrain": "retrain"}


def hyperparam_sweep(data, labels, axis: str, values, config: RunConfig, extra_config: dict | None = None) -> ExperimentReport:
    """k-fold accuracy across one hyperparameter axis, all else fixed."""
    if axis not in _SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {sorted(_SWEEP_AXES)}")
    values = list(values)
    curves = []
    all_warnings = set()
    for value in values:
        if value < (1 if axis != "dim" else 1):
            raise ConfigError(f"invalid {axis} value: {value}")
        variant = replace(config, **{_SWEEP_AXES[axis]: int(value)})
        variant.validate()
        folds, warnings = _train_folds(data, labels, variant)
        all_warnings.update(warnings)
        accs = [_fold_accuracy(f, data, labels) for f in folds]
        curves.append(_curve_point(axis, int(value), accs))
    cfg = dict(extra_config or {}) | config.echo()
    first = curves[0]
    return ExperimentReport(
        f"sweep-{axis}", cfg, first["fold_accuracies"], first["mean_accuracy"], first["std_accuracy"], curves,
        warnings=sorted(all_warnings),
    )


def timing_report(data, labels, config: RunConfig, batch: int = 1000) -> dict:
    """Train on the full dataset, then time encode+classify inferences.

    Word-level XOR/popcount tallies for the timed batch are included as an
    energy proxy: encoding one sample binds d id/level pairs and
    classification XORs+popcounts against every prototype, so the expected
    totals are batch * (d + P) * nwords XORs and batch * P * nwords
    popcounts for P stored prototypes.
    """
    config.validate()
    quantizer = fit_quantizer(data, config.levels)
    enc = EncoderModel.build(config.seed, config.dim, config.levels, quantizer)
    t0 = time.perf_counter()
    s_all = encode_matrix(enc, data)
    model = train(s_all, labels, config.train_config(), dim=config.dim, encoder=enc)
    train_seconds = time.perf_counter() - t0

    model.prototype_matrix()  # build the cache outside the timed loop
    COUNTERS.reset()
    rows = data.shape[0]
    t0 = time.perf_counter()
    for i in range(batch):
        s = encode_matrix(enc, data[i % rows : i % rows + 1])
        classify_batch(model, s)
    inference_seconds = time.perf_counter() - t0
    ops = COUNTERS.snapshot()
    return {
        "train_seconds": train_seconds,
        "inference_batch_seconds": inference_seconds,
        "inferences": batch,
        "xor_words": ops["xor_words"],
        "popcount_words": ops["popcount_words"],
        "nwords_per_vector": nwords_for(config.dim),
        "prototypes": model.n_prototypes(),
        "features": int(data.shape[1]),
    }
