"""Delimited-text dataset ingestion and stratified fold construction."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError
from .rng import SeededStream


@dataclass
class DatasetSpec:
    path: str
    label_col: str
    feature_cols: list | None = None  # optional allowlist, order respected
    delimiter: str = ","


def read_header(spec: DatasetSpec) -> list:
    """Column names from the header row."""
    with open(spec.path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=spec.delimiter)
        try:
            return next(reader)
        except StopIteration:
            raise DataError(f"empty dataset file: {spec.path}") from None


def load_csv(spec: DatasetSpec) -> tuple:
    """Parse (matrix, labels): float64 features, string labels, row order kept."""
    if not os.path.exists(spec.path):
        raise DataError(f"dataset file not found: {spec.path}")
    with open(spec.path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=spec.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"empty dataset file: {spec.path}") from None
        if spec.label_col not in header:
            raise DataError(f"missing label column {spec.label_col!r} in {spec.path}")
        if spec.feature_cols is not None:
            for col in spec.feature_cols:
                if col not in header:
                    raise DataError(f"missing feature column {col!r} in {spec.path}")
            feature_names = list(spec.feature_cols)
        else:
            feature_names = [c for c in header if c != spec.label_col]
        if not feature_names:
            raise DataError("dataset has no feature columns")
        col_pos = {c: i for i, c in enumerate(header)}
        label_pos = col_pos[spec.label_col]
        feat_pos = [col_pos[c] for c in feature_names]

        rows = []
        labels = []
        for r, record in enumerate(reader, start=1):
            if len(record) != len(header):
                raise DataError(f"row {r} has {len(record)} cells, header has {len(header)}")
            vals = np.empty(len(feat_pos), dtype=np.float64)
            for i, (pos, name) in enumerate(zip(feat_pos, feature_names)):
                cell = record[pos].strip()
                try:
                    vals[i] = float(cell)
                except ValueError:
                    raise DataError(f"unparsable value {cell!r} at row {r}, column {name!r}") from None
                if not np.isfinite(vals[i]):
                    raise DataError(f"non-finite value at row {r}, column {name!r}")
            rows.append(vals)
            labels.append(record[label_pos])
    if not rows:
        raise DataError(f"dataset file has a header but no rows: {spec.path}")
    if len(set(labels)) < 2:
        raise DataError("dataset needs at least 2 distinct labels")
    return np.vstack(rows), labels


def stratified_folds(labels, folds: int, stream: SeededStream) -> np.ndarray:
    """Fold id per row; per-class proportions off by at most one sample.

    Each class is shuffled by its own sub-stream and dealt round-robin, so
    folds are disjoint, cover every row, and remainders land
    deterministically.
    """
    if folds < 2:
        raise ConfigError(f"fold count must be >= 2, got {folds}")
    labels = list(labels)
    fold_of = np.empty(len(labels), dtype=np.int64)
    for j, lab in enumerate(sorted(set(labels))):
        members = np.flatnonzero(np.array([l == lab for l in labels]))
        if members.size < folds:
            raise ConfigError(f"class {lab!r} has {members.size} samples, fewer than {folds} folds")
        order = stream.split("fold-shuffle", j).permutation(members.size)
        for pos, idx in enumerate(members[order]):
            fold_of[idx] = pos % folds
    return fold_of
