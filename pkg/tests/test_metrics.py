import numpy as np
import pytest
from hypothesis import given, strategies as st

from eneat.metrics import (
    ConfusionMatrix,
    balanced_accuracy,
    confusion,
    format_percent,
    relative_gain,
    summarize_rounds,
    summary_table,
)
from eneat.nn import ClassLabel

F, NF = ClassLabel.F, ClassLabel.NF


def brute_force_bacc(truth, pred):
    pos = [p for t, p in zip(truth, pred) if t is NF]
    neg = [p for t, p in zip(truth, pred) if t is F]
    return 0.5 * (sum(p is NF for p in pos) / len(pos) + sum(p is F for p in neg) / len(neg))


def test_confusion_examples():
    assert confusion([NF, F], [NF, F]) == ConfusionMatrix(tp=1, tn=1, fp=0, fn=0)
    assert confusion([NF, NF, F], [F, NF, F]) == ConfusionMatrix(tp=1, tn=1, fp=0, fn=1)


def test_confusion_swap_symmetry():
    truth = [NF, NF, F, F, F]
    perfect = confusion(truth, truth)
    flipped = confusion(truth, [F if t is NF else NF for t in truth])
    assert (flipped.tp, flipped.fn, flipped.tn, flipped.fp) == (perfect.fn, perfect.tp, perfect.fp, perfect.tn)


def test_confusion_errors():
    with pytest.raises(ValueError, match="length"):
        confusion([NF], [NF, F])
    with pytest.raises(ValueError):
        confusion([], [])


def test_balanced_accuracy_examples():
    assert balanced_accuracy(ConfusionMatrix(tp=5, tn=7, fp=0, fn=0)) == 1.0
    assert balanced_accuracy(ConfusionMatrix(tp=0, tn=10, fp=0, fn=4)) == 0.5
    assert balanced_accuracy(ConfusionMatrix(tp=8, tn=90, fp=10, fn=2)) == pytest.approx(0.85, abs=1e-15)
    assert balanced_accuracy(ConfusionMatrix(tp=25, tn=50, fp=12, fn=4)) == pytest.approx(
        0.5 * (25 / 29 + 50 / 62))


def test_balanced_accuracy_needs_both_classes():
    with pytest.raises(ValueError):
        balanced_accuracy(ConfusionMatrix(tp=0, tn=3, fp=1, fn=0))


labels = st.sampled_from([F, NF])


@given(st.lists(st.tuples(labels, labels), min_size=2, max_size=60), st.integers(1, 4))
def test_balanced_accuracy_oracle_and_duplication(pairs, k):
    truth = [t for t, _ in pairs]
    pred = [p for _, p in pairs]
    if NF not in truth or F not in truth:
        return
    ba = balanced_accuracy(confusion(truth, pred))
    assert abs(ba - brute_force_bacc(truth, pred)) <= 1e-12
    assert 0.0 <= ba <= 1.0
    assert balanced_accuracy(confusion(truth * k, pred * k)) == pytest.approx(ba, abs=1e-12)


def test_summarize_rounds_examples():
    s = summarize_rounds([0.883, 0.885, 0.896, 0.899, 0.907])
    assert s.as_percent()["mean"] == "89.4"
    assert s.as_percent()["min"] == "88.3"
    assert s.as_percent()["max"] == "90.7"
    assert s.std == pytest.approx(np.std([0.883, 0.885, 0.896, 0.899, 0.907], ddof=1))
    assert summarize_rounds([0.7, 0.7, 0.7]).std == 0.0
    assert summarize_rounds([0.6, 0.8]).mean == pytest.approx(0.7)
    with pytest.raises(ValueError):
        summarize_rounds([0.5])


@given(st.lists(st.floats(0, 1), min_size=2, max_size=10))
def test_summary_ordering(scores):
    s = summarize_rounds(scores)
    assert s.min <= s.mean <= s.max


def test_relative_gain():
    assert format_percent(relative_gain(89.6, 84.4)) == "6.2"
    assert format_percent(relative_gain(90.7, 81.4)) == "11.4"
    assert relative_gain(0.8, 0.8) == 0.0
    with pytest.raises(ValueError):
        relative_gain(1.0, 0.0)


@given(st.floats(0.01, 100), st.floats(0.01, 100))
def test_relative_gain_sign(a, b):
    assert (relative_gain(a, b) > 0) == (a > b)


def test_format_percent_half_up():
    assert format_percent(0.0625) == "6.3"
    assert format_percent(0.0) == "0.0"


def test_summary_table_csv():
    s = summarize_rounds([0.883, 0.885, 0.896, 0.899, 0.907])
    text = summary_table([("e-NEAT", s)], "csv")
    assert text.splitlines()[0] == "method,mean,std,min,max"
    assert text.splitlines()[1].startswith("e-NEAT,89.4,")
