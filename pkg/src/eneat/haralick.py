"""Co-occurrence matrices over irregular segments and Haralick's 13 texture features."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .nn import ClassLabel

DEFAULT_BANDS = ("b4", "b6")
DEFAULT_LEVELS = 16
DEFAULT_OFFSETS = ((0, 1), (1, 0), (1, 1), (1, -1))
FEATURE_NAMES = (
    "angular_second_moment",
    "contrast",
    "correlation",
    "sum_of_squares_variance",
    "inverse_difference_moment",
    "sum_average",
    "sum_variance",
    "sum_entropy",
    "entropy",
    "difference_variance",
    "difference_entropy",
    "info_measure_correlation_1",
    "info_measure_correlation_2",
)
_TINY = 1e-12


class DegenerateSegmentError(ValueError):
    """No pixel pair of the segment co-occurs at any offset."""


@dataclass(frozen=True)
class SegmentPixels:
    segment_id: int
    rows: np.ndarray
    cols: np.ndarray
    bands: Mapping[str, np.ndarray]
    label: ClassLabel | None = None

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        if rows.shape != cols.shape or rows.ndim != 1:
            raise ValueError("rows and cols must be 1-d and equally long")
        if len(set(zip(rows.tolist(), cols.tolist()))) != len(rows):
            raise ValueError(f"segment {self.segment_id}: duplicate pixel coordinates")
        bands = {}
        for name, values in self.bands.items():
            values = np.asarray(values, dtype=np.float64)
            if values.shape != rows.shape:
                raise ValueError(f"segment {self.segment_id}: band {name!r} has wrong length")
            bands[name] = values
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "bands", bands)

    def __len__(self):
        return len(self.rows)


def quantize(segment: SegmentPixels, band: str, levels: int = DEFAULT_LEVELS) -> np.ndarray:
    """Equal-width bins over the segment's own [min, max] for ``band``."""
    if levels < 2:
        raise ValueError("levels must be >= 2")
    if band not in segment.bands:
        raise KeyError(f"segment {segment.segment_id} has no band {band!r}")
    v = segment.bands[band]
    lo, hi = float(v.min()), float(v.max())
    if hi <= lo:
        return np.zeros(len(v), dtype=np.int64)
    bins = np.floor((v - lo) / (hi - lo) * levels).astype(np.int64)
    return np.clip(bins, 0, levels - 1)


def glcm(rows, cols, quantized, levels: int,
         offsets: Sequence[tuple[int, int]] = DEFAULT_OFFSETS) -> np.ndarray:
    """Symmetric, unit-mass co-occurrence matrix of an irregular pixel set.

    Only pairs whose both pixels belong to the segment are counted; counts
    from all offsets are pooled before symmetrizing.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    q = np.asarray(quantized, dtype=np.int64)
    if len(q) < 2:
        raise DegenerateSegmentError("need at least two pixels")
    if not offsets:
        raise ValueError("need at least one offset")
    where = {(r, c): i for i, (r, c) in enumerate(zip(rows.tolist(), cols.tolist()))}
    counts = np.zeros((levels, levels))
    for dr, dc in offsets:
        for i, (r, c) in enumerate(zip(rows.tolist(), cols.tolist())):
            j = where.get((r + dr, c + dc))
            if j is not None:
                counts[q[i], q[j]] += 1
    total = counts.sum()
    if total == 0:
        raise DegenerateSegmentError("no co-occurring pixel pair at any offset")
    counts = counts + counts.T
    return counts / counts.sum()


def _entropy(p):
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def haralick13(p: np.ndarray) -> np.ndarray:
    """f1..f13 of a normalized co-occurrence matrix (0-based gray levels).

    Sum variance is taken around the sum average. Correlation and the two
    information measures are 0 when their denominator is below 1e-12.
    """
    p = np.asarray(p, dtype=np.float64)
    n = p.shape[0]
    i, j = np.indices(p.shape)
    levels = np.arange(n)
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    mux = float(levels @ px)
    muy = float(levels @ py)
    varx = float(((levels - mux) ** 2) @ px)
    vary = float(((levels - muy) ** 2) @ py)

    p_sum = np.bincount((i + j).ravel(), weights=p.ravel(), minlength=2 * n - 1)
    p_diff = np.bincount(np.abs(i - j).ravel(), weights=p.ravel(), minlength=n)
    k_sum = np.arange(2 * n - 1)
    k_diff = np.arange(n)

    asm = float(np.sum(p * p))
    contrast = float((k_diff ** 2) @ p_diff)
    sd = np.sqrt(varx * vary)
    correlation = float((np.sum(i * j * p) - mux * muy) / sd) if sd >= _TINY else 0.0
    sum_sq_var = float(np.sum((i - mux) ** 2 * p))
    idm = float(np.sum(p / (1.0 + (i - j) ** 2)))
    sum_avg = float(k_sum @ p_sum)
    sum_var = float(((k_sum - sum_avg) ** 2) @ p_sum)
    sum_ent = _entropy(p_sum)
    hxy = _entropy(p)
    diff_mean = float(k_diff @ p_diff)
    diff_var = float(((k_diff - diff_mean) ** 2) @ p_diff)
    diff_ent = _entropy(p_diff)

    hx, hy = _entropy(px), _entropy(py)
    outer = np.outer(px, py)
    nz = outer > 0
    hxy1 = float(-np.sum(p[nz] * np.log(outer[nz])))
    hxy2 = _entropy(outer)
    denom = max(hx, hy)
    imc1 = (hxy - hxy1) / denom if denom >= _TINY else 0.0
    imc2 = float(np.sqrt(max(0.0, 1.0 - np.exp(-2.0 * (hxy2 - hxy)))))

    return np.array([asm, contrast, correlation, sum_sq_var, idm, sum_avg, sum_var,
                     sum_ent, hxy, diff_var, diff_ent, imc1, imc2])


def segment_features(segment: SegmentPixels, bands: Sequence[str] = DEFAULT_BANDS,
                     levels: int = DEFAULT_LEVELS,
                     offsets: Sequence[tuple[int, int]] = DEFAULT_OFFSETS) -> np.ndarray:
    """Concatenated 13 Haralick features for each band, in ``bands`` order."""
    parts = []
    for band in bands:
        q = quantize(segment, band, levels)
        parts.append(haralick13(glcm(segment.rows, segment.cols, q, levels, offsets)))
    return np.concatenate(parts)


@dataclass(frozen=True, eq=False)
class FeatureScaler:
    """Per-dimension min-max scaling into [0, 1], fitted on training data."""

    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.minimum, dtype=np.float64)
        hi = np.asarray(self.maximum, dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("scaler bounds must be 1-d arrays of equal length")
        if np.any(hi < lo):
            raise ValueError("scaler requires max >= min in every dimension")
        object.__setattr__(self, "minimum", lo)
        object.__setattr__(self, "maximum", hi)

    @property
    def dimension(self) -> int:
        return len(self.minimum)

    def __eq__(self, other):
        if not isinstance(other, FeatureScaler):
            return NotImplemented
        return np.array_equal(self.minimum, other.minimum) and np.array_equal(self.maximum, other.maximum)

    def transform(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dimension:
            raise ValueError(f"expected {self.dimension} features, got {x.shape[-1]}")
        span = self.maximum - self.minimum
        safe = np.where(span > 0, span, 1.0)
        out = np.where(span > 0, (x - self.minimum) / safe, 0.0)
        return np.clip(out, 0.0, 1.0)


def fit_scaler(vectors) -> FeatureScaler:
    x = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    if x.shape[0] < 1:
        raise ValueError("need at least one vector to fit a scaler")
    return FeatureScaler(x.min(axis=0), x.max(axis=0))


def apply_scaler(scaler: FeatureScaler, vector) -> np.ndarray:
    return scaler.transform(vector)
