"""Reader for segment pixel files.

Format (comma separated, one record per line, ``#`` starts a comment)::

    segment_id,row,col,b4,b6          <- header: band names after ``col``;
                                          an optional trailing ``label`` column
                                          holds per-pixel labels
    7,10,12,812,1930                  <- one pixel
    label,7,NF                        <- optional per-segment label

A per-segment label line wins over pixel labels; otherwise the segment label is
the pixel majority.
"""

from __future__ import annotations

from collections import defaultdict
from typing import TextIO

import numpy as np

from .dataset import SampleTable, majority_label
from .haralick import DEFAULT_BANDS, DEFAULT_LEVELS, DEFAULT_OFFSETS, SegmentPixels, segment_features
from .nn import ClassLabel


class SegmentFileError(ValueError):
    pass


def read_segments(source: TextIO, bands=None) -> list[SegmentPixels]:
    """Parse a segment file; ``bands`` (if given) must all be declared."""
    lines = ((n, line.strip()) for n, line in enumerate(source, start=1))
    lines = [(n, line) for n, line in lines if line and not line.startswith("#")]
    if not lines:
        raise SegmentFileError("empty segment file")
    header_no, header = lines[0]
    names = [h.strip() for h in header.split(",")]
    if names[:3] != ["segment_id", "row", "col"]:
        raise SegmentFileError(f"line {header_no}: header must start with segment_id,row,col")
    has_pixel_labels = names[-1] == "label"
    band_names = names[3:-1] if has_pixel_labels else names[3:]
    if not band_names:
        raise SegmentFileError(f"line {header_no}: no bands declared")
    for band in bands or ():
        if band not in band_names:
            raise SegmentFileError(f"band {band!r} not declared in header")

    pixels: dict[int, list] = defaultdict(list)
    pixel_labels: dict[int, list] = defaultdict(list)
    seg_labels: dict[int, ClassLabel] = {}
    errors = []
    for n, line in lines[1:]:
        fields = [f.strip() for f in line.split(",")]
        try:
            if fields[0] == "label":
                if len(fields) != 3:
                    raise ValueError("label line must be label,<segment_id>,<F|NF>")
                seg_labels[int(fields[1])] = ClassLabel.parse(fields[2])
                continue
            if len(fields) != len(names):
                raise ValueError(f"expected {len(names)} fields, got {len(fields)}")
            sid, r, c = int(fields[0]), int(fields[1]), int(fields[2])
            values = [float(v) for v in fields[3:3 + len(band_names)]]
            if not all(np.isfinite(values)):
                raise ValueError("non-finite intensity")
            pixels[sid].append((r, c, values))
            if has_pixel_labels:
                pixel_labels[sid].append(ClassLabel.parse(fields[-1]))
        except ValueError as exc:
            errors.append(f"line {n}: {exc}")
    if errors:
        raise SegmentFileError("\n".join(errors))
    if not pixels:
        raise SegmentFileError("segment file has no pixels")

    out = []
    for sid in sorted(pixels):
        recs = pixels[sid]
        if sid in seg_labels:
            label = seg_labels[sid]
        elif pixel_labels[sid]:
            label = majority_label(pixel_labels[sid])
        else:
            label = None
        values = np.array([v for _, _, v in recs])
        out.append(SegmentPixels(
            segment_id=sid,
            rows=np.array([r for r, _, _ in recs]),
            cols=np.array([c for _, c, _ in recs]),
            bands={b: values[:, k] for k, b in enumerate(band_names)},
            label=label,
        ))
    return out


def featurize(segments, bands=DEFAULT_BANDS, levels=DEFAULT_LEVELS,
              offsets=DEFAULT_OFFSETS) -> SampleTable:
    """Feature table for labeled segments; unlabeled segments are an error."""
    rows = []
    errors = []
    for seg in segments:
        if seg.label is None:
            errors.append(f"segment {seg.segment_id}: no label")
            continue
        try:
            rows.append((seg.segment_id, segment_features(seg, bands, levels, offsets), seg.label))
        except (ValueError, KeyError) as exc:
            errors.append(f"segment {seg.segment_id}: {exc}")
    if errors:
        raise SegmentFileError("\n".join(errors))
    return SampleTable.from_rows(rows)
