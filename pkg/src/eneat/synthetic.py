"""Seeded synthetic tasks for sanity checks and the five-round experiment."""

from __future__ import annotations

import numpy as np

from .dataset import SampleTable
from .nn import ClassLabel


def xor_table() -> SampleTable:
    x = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    labels = (ClassLabel.F, ClassLabel.NF, ClassLabel.NF, ClassLabel.F)
    return SampleTable(np.arange(4), x, labels)


def _draw(rng, n_f, n_nf, shift, n_features, start_id):
    f = rng.normal(0.0, 1.0, size=(n_f, n_features))
    nf = rng.normal(0.0, 1.0, size=(n_nf, n_features)) + shift
    x = np.vstack([f, nf])
    labels = [ClassLabel.F] * n_f + [ClassLabel.NF] * n_nf
    order = rng.permutation(len(labels))
    return SampleTable(np.arange(start_id, start_id + len(labels)), x[order],
                       tuple(labels[i] for i in order))


def imbalanced_task(seed: int = 0, n_features: int = 26, train_counts=(62, 29),
                    n_test: int = 10_000, positive_rate: float = 0.06,
                    n_informative: int = 6, separation: float = 0.9):
    """Two Gaussian classes; NF (positive) is shifted on the first dimensions.

    Returns ``(train, test)``. The test set keeps ``positive_rate`` NF samples.
    """
    rng = np.random.default_rng(seed)
    shift = np.zeros(n_features)
    shift[:n_informative] = separation
    train = _draw(rng, train_counts[0], train_counts[1], shift, n_features, 0)
    n_nf = int(round(n_test * positive_rate))
    test = _draw(rng, n_test - n_nf, n_nf, shift, n_features, 100_000)
    return train, test
