import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from eneat.nn import (
    ALL_ACTIVATIONS,
    ActivationKind,
    ClassLabel,
    FeedForwardNetwork,
    NodeSpec,
    apply_activation,
    classify,
    forward,
    topological_order,
)

finite = st.floats(-1e6, 1e6, allow_nan=False)


def constant_net(value_bias, activation=ActivationKind.IDENTITY, inputs=1):
    return FeedForwardNetwork(inputs, (inputs,), (NodeSpec(inputs, value_bias, activation),), (), (inputs,))


def test_exactly_eight_activations():
    assert {a.value for a in ALL_ACTIVATIONS} == {
        "sigmoid", "tanh", "relu", "log", "clamped", "hat", "identity", "softplus"}
    with pytest.raises(ValueError, match="unknown activation"):
        ActivationKind.parse("gauss")


@pytest.mark.parametrize("kind, x, expected", [
    ("sigmoid", 0.0, 0.5),
    ("identity", -3.0, -3.0),
    ("hat", 0.0, 1.0),
    ("hat", 2.0, 0.0),
    ("clamped", 7.3, 1.0),
    ("relu", -1.0, 0.0),
    ("log", 0.0, math.log(1e-7)),
    ("softplus", 0.0, 0.2 * math.log(2.0)),
    ("tanh", 0.0, 0.0),
])
def test_activation_examples(kind, x, expected):
    assert apply_activation(ActivationKind(kind), x) == pytest.approx(expected, abs=1e-15)


@given(finite)
def test_activation_bounds(x):
    out = {a: apply_activation(a, x) for a in ALL_ACTIVATIONS}
    assert all(math.isfinite(v) for v in out.values())
    assert 0.0 <= out[ActivationKind.SIGMOID] <= 1.0
    assert -1.0 <= out[ActivationKind.TANH] <= 1.0
    assert -1.0 <= out[ActivationKind.CLAMPED] <= 1.0
    assert 0.0 <= out[ActivationKind.HAT] <= 1.0
    assert out[ActivationKind.RELU] >= 0.0
    assert out[ActivationKind.SOFTPLUS] >= 0.0


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_sigmoid_open_interval_where_representable(a, b):
    # Strictly inside (0, 1) until exp saturates at the clamp.
    assert 0.0 < apply_activation(ActivationKind.SIGMOID, a) < 1.0
    assert -1.0 < apply_activation(ActivationKind.TANH, b / 10) < 1.0


@pytest.mark.parametrize("kind", ["sigmoid", "tanh", "relu", "softplus", "identity"])
@given(x=finite, y=finite)
def test_monotone_activations(kind, x, y):
    lo, hi = sorted((x, y))
    k = ActivationKind(kind)
    assert apply_activation(k, lo) <= apply_activation(k, hi)


def test_forward_linear():
    net = FeedForwardNetwork(1, (1,), (NodeSpec(1, 0.25, ActivationKind.IDENTITY),), ((0, 1, 2.0),), (1,))
    assert forward(net, [3.0]) == [6.25]


def test_forward_no_incoming_sigmoid():
    assert forward(constant_net(0.0, ActivationKind.SIGMOID), [1.0]) == [0.5]


def test_forward_two_inputs_cancel():
    net = FeedForwardNetwork(2, (2,), (NodeSpec(2, 0.0, ActivationKind.IDENTITY),),
                             ((0, 2, 0.5), (1, 2, -0.5)), (2,))
    assert forward(net, [1.0, 1.0]) == [0.0]


def test_forward_hidden_chain_uses_order():
    nodes = (NodeSpec(1, 0.0, ActivationKind.IDENTITY), NodeSpec(2, 1.0, ActivationKind.RELU))
    net = FeedForwardNetwork(1, (1,), nodes, ((0, 2, -1.0), (2, 1, 3.0)), (2, 1))
    assert forward(net, [0.5]) == [1.5]
    assert forward(net, [4.0]) == [0.0]


def test_forward_rejects_wrong_length():
    with pytest.raises(ValueError):
        forward(constant_net(0.0), [1.0, 2.0])


def test_network_rejects_bad_order_and_duplicates():
    nodes = (NodeSpec(1, 0.0, ActivationKind.IDENTITY), NodeSpec(2, 0.0, ActivationKind.IDENTITY))
    with pytest.raises(ValueError, match="topological"):
        FeedForwardNetwork(1, (1,), nodes, ((0, 2, 1.0), (2, 1, 1.0)), (1, 2))
    with pytest.raises(ValueError, match="duplicate"):
        FeedForwardNetwork(1, (1,), nodes[:1], ((0, 1, 1.0), (0, 1, 2.0)), (1,))
    with pytest.raises(ValueError, match="missing"):
        FeedForwardNetwork(1, (1,), nodes[:1], ((5, 1, 1.0),), (1,))


@pytest.mark.parametrize("bias, expected", [(0.5, ClassLabel.NF), (0.0, ClassLabel.F), (0.73, ClassLabel.NF)])
def test_classify_threshold(bias, expected):
    assert classify(constant_net(bias), [0.0]) is expected


def test_forward_is_deterministic():
    rng = np.random.default_rng(3)
    nodes = tuple(NodeSpec(i, float(rng.normal()), ALL_ACTIVATIONS[i % 8]) for i in range(3, 7))
    conns = ((0, 3, 0.3), (1, 4, -1.2), (3, 5, 0.7), (4, 5, 2.0), (2, 6, 0.1), (5, 6, -0.4))
    net = FeedForwardNetwork(3, (6,), nodes, conns, (3, 4, 5, 6))
    x = rng.normal(size=3)
    assert forward(net, x) == forward(net, x)


def test_class_label_order():
    assert ClassLabel.F < ClassLabel.NF
    assert sorted([ClassLabel.NF, ClassLabel.F]) == [ClassLabel.F, ClassLabel.NF]


def test_topological_order_detects_cycle():
    assert topological_order([3, 1, 2], [(1, 2), (2, 3)]) == [1, 2, 3]
    with pytest.raises(ValueError):
        topological_order([1, 2], [(1, 2), (2, 1)])
