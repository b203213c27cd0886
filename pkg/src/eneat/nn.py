"""Feed-forward phenotype networks and the activation catalog."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class ActivationKind(str, Enum):
    SIGMOID = "sigmoid"
    TANH = "tanh"
    RELU = "relu"
    LOG = "log"
    CLAMPED = "clamped"
    HAT = "hat"
    IDENTITY = "identity"
    SOFTPLUS = "softplus"

    @classmethod
    def parse(cls, name: str) -> "ActivationKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown activation function {name!r}") from None


ALL_ACTIVATIONS: tuple[ActivationKind, ...] = tuple(ActivationKind)


class ClassLabel(str, Enum):
    """Segment class. ``F`` sorts before ``NF``; ``NF`` is the positive class."""

    F = "F"
    NF = "NF"

    @classmethod
    def parse(cls, token: str) -> "ClassLabel":
        try:
            return cls(token)
        except ValueError:
            raise ValueError(f"unknown class label {token!r} (expected F or NF)") from None

    def __lt__(self, other):
        if not isinstance(other, ClassLabel):
            return NotImplemented
        return self is ClassLabel.F and other is ClassLabel.NF


def _clip(x, lo, hi):
    return np.minimum(np.maximum(x, lo), hi)


def _sigmoid(x):
    z = _clip(5.0 * x, -60.0, 60.0)
    return 1.0 / (1.0 + np.exp(-z))


def _tanh(x):
    return np.tanh(_clip(2.5 * x, -60.0, 60.0))


def _relu(x):
    return np.maximum(x, 0.0)


def _log(x):
    return np.log(np.maximum(x, 1e-7))


def _clamped(x):
    return _clip(x, -1.0, 1.0)


def _hat(x):
    return np.maximum(0.0, 1.0 - np.abs(x))


def _identity(x):
    return x


def _softplus(x):
    z = _clip(5.0 * x, -60.0, 60.0)
    return 0.2 * np.log1p(np.exp(z))


_ACTIVATION_FUNCS = {
    ActivationKind.SIGMOID: _sigmoid,
    ActivationKind.TANH: _tanh,
    ActivationKind.RELU: _relu,
    ActivationKind.LOG: _log,
    ActivationKind.CLAMPED: _clamped,
    ActivationKind.HAT: _hat,
    ActivationKind.IDENTITY: _identity,
    ActivationKind.SOFTPLUS: _softplus,
}


def activation_function(kind: ActivationKind):
    """Return the vectorized callable for ``kind``."""
    return _ACTIVATION_FUNCS[ActivationKind(kind)]


def apply_activation(kind: ActivationKind, x: float) -> float:
    if not math.isfinite(x):
        raise ValueError(f"activation input must be finite, got {x!r}")
    return float(_ACTIVATION_FUNCS[ActivationKind(kind)](np.float64(x)))


@dataclass(frozen=True)
class NodeSpec:
    node_id: int
    bias: float
    activation: ActivationKind


@dataclass(frozen=True)
class FeedForwardNetwork:
    """Acyclic network with inputs ``0..input_count-1``.

    ``nodes`` lists the non-input nodes; ``evaluation_order`` is a topological
    order over them. ``output_ids`` are evaluated and returned in id order.
    """

    input_count: int
    output_ids: tuple[int, ...]
    nodes: tuple[NodeSpec, ...]
    connections: tuple[tuple[int, int, float], ...]
    evaluation_order: tuple[int, ...]
    _plan: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.input_count < 1:
            raise ValueError("input_count must be positive")
        if len(self.output_ids) < 1:
            raise ValueError("at least one output node is required")
        node_ids = [n.node_id for n in self.nodes]
        known = set(range(self.input_count)) | set(node_ids)
        if len(known) != self.input_count + len(node_ids):
            raise ValueError("duplicate node ids")
        if set(self.evaluation_order) != set(node_ids) or len(self.evaluation_order) != len(node_ids):
            raise ValueError("evaluation_order must be a permutation of the non-input nodes")
        if not set(self.output_ids) <= set(node_ids):
            raise ValueError("output ids must be non-input nodes")
        pairs = set()
        for src, dst, _ in self.connections:
            if src not in known or dst not in known:
                raise ValueError(f"connection {src}->{dst} references a missing node")
            if dst < self.input_count:
                raise ValueError(f"connection {src}->{dst} targets an input")
            if (src, dst) in pairs:
                raise ValueError(f"duplicate connection {src}->{dst}")
            pairs.add((src, dst))
        rank = {nid: i for i, nid in enumerate(self.evaluation_order)}
        for src, dst, _ in self.connections:
            if src >= self.input_count and rank[src] >= rank[dst]:
                raise ValueError("evaluation_order is not a topological order")

        # Row layout of the value matrix: inputs first, then evaluation order.
        row = {i: i for i in range(self.input_count)}
        for i, nid in enumerate(self.evaluation_order):
            row[nid] = self.input_count + i
        spec = {n.node_id: n for n in self.nodes}
        incoming: dict[int, list[tuple[int, float]]] = {nid: [] for nid in node_ids}
        for src, dst, w in self.connections:
            incoming[dst].append((row[src], w))
        plan = []
        for nid in self.evaluation_order:
            srcs = np.array([s for s, _ in incoming[nid]], dtype=np.intp)
            ws = np.array([w for _, w in incoming[nid]], dtype=np.float64)
            n = spec[nid]
            plan.append((row[nid], srcs, ws, float(n.bias), activation_function(n.activation)))
        out_rows = np.array([row[o] for o in sorted(self.output_ids)], dtype=np.intp)
        object.__setattr__(self, "_plan", (tuple(plan), out_rows))

    @property
    def output_count(self) -> int:
        return len(self.output_ids)

    def forward_batch(self, inputs) -> np.ndarray:
        """Evaluate a ``(n_samples, input_count)`` matrix; returns ``(n_samples, output_count)``."""
        x = np.asarray(inputs, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.input_count:
            raise ValueError(
                f"expected inputs of shape (n, {self.input_count}), got {x.shape}"
            )
        plan, out_rows = self._plan
        values = np.empty((self.input_count + len(plan), x.shape[0]))
        values[: self.input_count] = x.T
        for r, srcs, ws, bias, fn in plan:
            if len(srcs):
                values[r] = fn(bias + ws @ values[srcs])
            else:
                values[r] = fn(np.full(x.shape[0], bias))
        return values[out_rows].T.copy()


def forward(net: FeedForwardNetwork, inputs) -> list[float]:
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != net.input_count:
        raise ValueError(f"expected {net.input_count} inputs, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("inputs must be finite")
    return [float(v) for v in net.forward_batch(x[None, :])[0]]


def classify(net: FeedForwardNetwork, features) -> ClassLabel:
    return ClassLabel.NF if forward(net, features)[0] >= 0.5 else ClassLabel.F


def classify_batch(net: FeedForwardNetwork, features) -> np.ndarray:
    """Boolean array, True where the prediction is NF."""
    return net.forward_batch(features)[:, 0] >= 0.5


def topological_order(node_ids, edges) -> list[int]:
    """Kahn's algorithm; ties resolved by ascending node id.

    Raises ``ValueError`` if ``edges`` contain a cycle among ``node_ids``.
    """
    node_ids = sorted(node_ids)
    indeg = {n: 0 for n in node_ids}
    succ: dict[int, list[int]] = {n: [] for n in node_ids}
    for s, d in edges:
        if s in indeg and d in indeg:
            indeg[d] += 1
            succ[s].append(d)
    ready = [n for n in node_ids if indeg[n] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        n = heapq.heappop(ready)
        order.append(n)
        for d in succ[n]:
            indeg[d] -= 1
            if indeg[d] == 0:
                heapq.heappush(ready, d)
    if len(order) != len(node_ids):
        raise ValueError("graph contains a cycle")
    return order
