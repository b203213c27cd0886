"""Labeled feature tables: CSV I/O, stratified splitting, pixel-majority labels."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence, TextIO

import numpy as np

from .nn import ClassLabel


class TableFormatError(ValueError):
    """Malformed feature table."""


@dataclass(frozen=True, eq=False)
class SampleTable:
    segment_ids: np.ndarray
    features: np.ndarray
    labels: tuple[ClassLabel, ...]
    nf_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        ids = np.asarray(self.segment_ids, dtype=np.int64)
        x = np.asarray(self.features, dtype=np.float64)
        labels = tuple(ClassLabel(l) for l in self.labels)
        if x.ndim != 2 or x.shape[0] != len(ids) or len(labels) != len(ids):
            raise TableFormatError("segment ids, feature rows and labels must align")
        if len(set(ids.tolist())) != len(ids):
            raise TableFormatError("duplicate segment_id")
        object.__setattr__(self, "segment_ids", ids)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "nf_mask", np.array([l is ClassLabel.NF for l in labels], dtype=bool))

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[int, Sequence[float], ClassLabel]],
                  feature_dimension: int | None = None) -> "SampleTable":
        rows = list(rows)
        if not rows:
            if feature_dimension is None:
                raise TableFormatError("empty table")
            return cls(np.zeros(0, dtype=np.int64), np.zeros((0, feature_dimension)), ())
        return cls(np.array([r[0] for r in rows]), np.array([list(r[1]) for r in rows], dtype=float),
                   tuple(r[2] for r in rows))

    @property
    def feature_dimension(self) -> int:
        return self.features.shape[1]

    @property
    def rows(self) -> list[tuple[int, np.ndarray, ClassLabel]]:
        return list(zip(self.segment_ids.tolist(), self.features, self.labels))

    def __len__(self) -> int:
        return len(self.labels)

    def class_counts(self) -> dict[ClassLabel, int]:
        n_nf = int(self.nf_mask.sum())
        return {ClassLabel.F: len(self) - n_nf, ClassLabel.NF: n_nf}

    def subset(self, index) -> "SampleTable":
        index = np.asarray(index, dtype=np.intp)
        return SampleTable(self.segment_ids[index], self.features[index],
                           tuple(self.labels[i] for i in index.tolist()))

    def __eq__(self, other):
        if not isinstance(other, SampleTable):
            return NotImplemented
        return (np.array_equal(self.segment_ids, other.segment_ids)
                and np.array_equal(self.features, other.features)
                and self.labels == other.labels)


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def save_csv(table: SampleTable, sink: TextIO) -> None:
    d = table.feature_dimension
    sink.write(",".join(["segment_id", *(f"f_{i}" for i in range(d)), "label"]) + "\n")
    for sid, x, label in zip(table.segment_ids.tolist(), table.features, table.labels):
        sink.write(",".join([str(sid), *(format_float(v) for v in x), label.value]) + "\n")


def dumps_csv(table: SampleTable) -> str:
    buf = io.StringIO()
    save_csv(table, buf)
    return buf.getvalue()


def load_csv(source: TextIO) -> SampleTable:
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise TableFormatError("empty table: missing header") from None
    d = len(header) - 2
    expected = ["segment_id", *(f"f_{i}" for i in range(d)), "label"]
    if d < 1 or header != expected:
        raise TableFormatError("header must be segment_id,f_0,...,f_{d-1},label")
    ids, feats, labels = [], [], []
    seen = set()
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != d + 2:
            raise TableFormatError(f"row {lineno}: expected {d + 2} fields, got {len(row)}")
        try:
            sid = int(row[0])
            values = [float(v) for v in row[1:-1]]
        except ValueError as exc:
            raise TableFormatError(f"row {lineno}: {exc}") from None
        try:
            label = ClassLabel.parse(row[-1])
        except ValueError as exc:
            raise TableFormatError(f"row {lineno}: {exc}") from None
        if sid in seen:
            raise TableFormatError(f"row {lineno}: duplicate segment_id {sid}")
        seen.add(sid)
        ids.append(sid)
        feats.append(values)
        labels.append(label)
    if not ids:
        raise TableFormatError("empty table: no rows")
    return SampleTable(np.array(ids), np.array(feats, dtype=float), tuple(labels))


def read_csv(path) -> SampleTable:
    with open(path, newline="") as fh:
        return load_csv(fh)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        if not self.stratified:
            raise ValueError("only stratified splits are supported")


def _round_half_up(x: float) -> int:
    return int(Decimal(repr(x)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def stratified_split(table: SampleTable, spec: SplitSpec) -> tuple[SampleTable, SampleTable]:
    rng = np.random.default_rng(spec.seed)
    train_idx, test_idx = [], []
    for nf in (False, True):
        members = np.flatnonzero(table.nf_mask == nf)
        if len(members) < 2:
            label = ClassLabel.NF if nf else ClassLabel.F
            raise ValueError(f"class {label.value} needs at least 2 rows to split, has {len(members)}")
        k = _round_half_up(spec.train_fraction * len(members))
        chosen = rng.permutation(members)
        train_idx.append(np.sort(chosen[:k]))
        test_idx.append(np.sort(chosen[k:]))
    train = np.sort(np.concatenate(train_idx))
    test = np.sort(np.concatenate(test_idx))
    return table.subset(train), table.subset(test)


def majority_label(pixel_labels: Sequence[ClassLabel]) -> ClassLabel:
    """Most frequent pixel label; an exact tie resolves to NF."""
    if not pixel_labels:
        raise ValueError("cannot label a segment without pixels")
    counts = Counter(ClassLabel(l) for l in pixel_labels)
    return ClassLabel.F if counts[ClassLabel.F] > counts[ClassLabel.NF] else ClassLabel.NF
