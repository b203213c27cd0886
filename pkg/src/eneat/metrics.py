"""Confusion counts, balanced accuracy and multi-round summaries."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

import numpy as np

from .nn import ClassLabel


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with NF (deforestation) as the positive class."""

    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @classmethod
    def from_masks(cls, truth_nf, pred_nf) -> "ConfusionMatrix":
        truth_nf = np.asarray(truth_nf, dtype=bool)
        pred_nf = np.asarray(pred_nf, dtype=bool)
        if truth_nf.shape != pred_nf.shape:
            raise ValueError(f"length mismatch: {truth_nf.shape} vs {pred_nf.shape}")
        tp = int(np.count_nonzero(truth_nf & pred_nf))
        fn = int(np.count_nonzero(truth_nf & ~pred_nf))
        fp = int(np.count_nonzero(~truth_nf & pred_nf))
        tn = int(truth_nf.size - tp - fn - fp)
        return cls(tp=tp, tn=tn, fp=fp, fn=fn)


def confusion(truth: Sequence[ClassLabel], predicted: Sequence[ClassLabel]) -> ConfusionMatrix:
    if len(truth) != len(predicted):
        raise ValueError(f"length mismatch: {len(truth)} truth vs {len(predicted)} predicted labels")
    if not truth:
        raise ValueError("cannot score an empty label list")
    return ConfusionMatrix.from_masks(
        [ClassLabel(t) is ClassLabel.NF for t in truth],
        [ClassLabel(p) is ClassLabel.NF for p in predicted],
    )


def balanced_accuracy(cm: ConfusionMatrix) -> float:
    """Mean of the two per-class recalls."""
    if cm.tp + cm.fn == 0 or cm.tn + cm.fp == 0:
        raise ValueError("balanced accuracy needs both classes present in the ground truth")
    return 0.5 * (cm.tp / (cm.tp + cm.fn) + cm.tn / (cm.tn + cm.fp))


@dataclass(frozen=True)
class RoundSummary:
    mean: float
    std: float
    min: float
    max: float
    n: int
    std_defined: bool = True

    def as_percent(self) -> dict[str, str]:
        return {
            "mean": format_percent(self.mean),
            "std": format_percent(self.std),
            "min": format_percent(self.min),
            "max": format_percent(self.max),
        }


def summarize_rounds(scores: Sequence[float]) -> RoundSummary:
    """Mean, sample standard deviation (n - 1), min and max."""
    scores = [float(s) for s in scores]
    if len(scores) < 2:
        raise ValueError("need at least two scores to summarize rounds")
    mean = math.fsum(scores) / len(scores)
    # Clamp: the float mean can fall an ulp outside [min, max] for equal scores.
    mean = min(max(mean, min(scores)), max(scores))
    return RoundSummary(mean=mean, std=statistics.stdev(scores), min=min(scores),
                        max=max(scores), n=len(scores))


def single_round_summary(score: float) -> RoundSummary:
    """Summary of one round: std undefined, reported as 0."""
    return RoundSummary(mean=score, std=0.0, min=score, max=score, n=1, std_defined=False)


def relative_gain(candidate: float, baseline: float) -> float:
    if not baseline > 0:
        raise ValueError(f"baseline must be positive, got {baseline}")
    return (candidate - baseline) / baseline


def format_percent(fraction: float, digits: int = 1) -> str:
    """``0.0616 -> '6.2'``; rounds half-up on the decimal repr."""
    value = Decimal(repr(float(fraction))) * 100
    quantum = Decimal(1).scaleb(-digits)
    return str(value.quantize(quantum, rounding=ROUND_HALF_UP))


def summary_table(rows: Sequence[tuple[str, RoundSummary]], fmt: str = "text") -> str:
    """Table with columns method, mean, std, min, max (percent, one decimal)."""
    header = ("method", "mean", "std", "min", "max")
    body = []
    for name, s in rows:
        p = s.as_percent()
        body.append((name, p["mean"], p["std"], p["min"], p["max"]))
    if fmt == "csv":
        return "\n".join(",".join(r) for r in [header, *body]) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(5)]
    lines = []
    for r in [header, *body]:
        cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
        lines.append("  ".join(cells))
    return "\n".join(lines) + "\n"
