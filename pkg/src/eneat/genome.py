"""NEAT genomes and genetic operators.

Genes are stored column-wise in numpy arrays (nodes sorted by id, connections
sorted by innovation number) so that the weight-level operators stay
vectorized; :attr:`Genome.nodes` and :attr:`Genome.connections` expose the
record view.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .nn import ALL_ACTIVATIONS, ActivationKind, FeedForwardNetwork, NodeSpec, topological_order

INPUT, HIDDEN, OUTPUT = 0, 1, 2
KIND_NAMES = ("input", "hidden", "output")
_ACT_INDEX = {a: i for i, a in enumerate(ALL_ACTIVATIONS)}


@dataclass(frozen=True)
class NodeGene:
    node_id: int
    kind: str
    bias: float
    activation: ActivationKind


@dataclass(frozen=True)
class ConnectionGene:
    innovation: int
    source_id: int
    target_id: int
    weight: float
    enabled: bool


@dataclass(frozen=True)
class MutationRates:
    weight_perturb_prob: float = 0.8
    weight_replace_prob: float = 0.1
    bias_perturb_prob: float = 0.7
    add_connection_prob: float = 0.5
    add_node_prob: float = 0.2
    activation_mutate_prob: float = 0.05
    toggle_enable_prob: float = 0.01
    perturb_sigma: float = 0.5
    weight_range: tuple[float, float] = (-30.0, 30.0)
    # Fresh weights/biases (initial genomes, new connections, replacements).
    init_range: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        for name in (
            "weight_perturb_prob",
            "weight_replace_prob",
            "bias_perturb_prob",
            "add_connection_prob",
            "add_node_prob",
            "activation_mutate_prob",
            "toggle_enable_prob",
        ):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        if not self.perturb_sigma > 0:
            raise ValueError("perturb_sigma must be positive")
        for name in ("weight_range", "init_range"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name} requires min < max, got {(lo, hi)}")
            object.__setattr__(self, name, (float(lo), float(hi)))


class InnovationRegistry:
    """Hands out innovation numbers and node ids for one evolution run.

    A (source, target) pair always maps to the same innovation number, and
    splitting the same connection maps to the same new node id, so identical
    structural mutations line up across genomes. Access is serialized by a lock.
    """

    def __init__(self, next_innovation: int = 0, next_node_id: int = 0):
        self.next_innovation = next_innovation
        self.next_node_id = next_node_id
        self.seen: dict[tuple[int, int], int] = {}
        self.splits: dict[int, int] = {}
        self._lock = threading.Lock()

    @classmethod
    def initial(cls, input_count: int, hidden_count: int, output_count: int) -> "InnovationRegistry":
        reg = cls()
        pairs = _canonical_pairs(input_count, hidden_count, output_count)
        for i, pair in enumerate(pairs):
            reg.seen[pair] = i
        reg.next_innovation = len(pairs)
        reg.next_node_id = input_count + hidden_count + output_count
        return reg

    def connection_innovation(self, source_id: int, target_id: int) -> int:
        with self._lock:
            key = (source_id, target_id)
            if key not in self.seen:
                self.seen[key] = self.next_innovation
                self.next_innovation += 1
            return self.seen[key]

    def new_node_id(self) -> int:
        with self._lock:
            nid = self.next_node_id
            self.next_node_id += 1
            return nid

    def split_node_id(self, innovation: int) -> int:
        with self._lock:
            if innovation not in self.splits:
                self.splits[innovation] = self.next_node_id
                self.next_node_id += 1
            return self.splits[innovation]


class Genome:
    """Evolvable network description. Arrays are treated as immutable."""

    __slots__ = (
        "node_ids", "node_kinds", "biases", "activations",
        "innovations", "sources", "targets", "weights", "enabled",
        "activation_pool", "fitness", "key",
    )

    def __init__(self, node_ids, node_kinds, biases, activations,
                 innovations, sources, targets, weights, enabled,
                 activation_pool: Sequence[ActivationKind], fitness: Optional[float] = None,
                 key: int = 0):
        self.node_ids = np.asarray(node_ids, dtype=np.int64)
        self.node_kinds = np.asarray(node_kinds, dtype=np.int8)
        self.biases = np.asarray(biases, dtype=np.float64)
        self.activations = np.asarray(activations, dtype=np.int8)
        self.innovations = np.asarray(innovations, dtype=np.int64)
        self.sources = np.asarray(sources, dtype=np.int64)
        self.targets = np.asarray(targets, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.enabled = np.asarray(enabled, dtype=bool)
        self.activation_pool = tuple(ActivationKind(a) for a in activation_pool)
        self.fitness = fitness
        self.key = key

    # -- record views -------------------------------------------------------
    @property
    def nodes(self) -> list[NodeGene]:
        return [
            NodeGene(int(n), KIND_NAMES[k], float(b), ALL_ACTIVATIONS[a])
            for n, k, b, a in zip(self.node_ids, self.node_kinds, self.biases, self.activations)
        ]

    @property
    def connections(self) -> list[ConnectionGene]:
        return [
            ConnectionGene(int(i), int(s), int(t), float(w), bool(e))
            for i, s, t, w, e in zip(self.innovations, self.sources, self.targets,
                                     self.weights, self.enabled)
        ]

    @classmethod
    def from_genes(cls, nodes: Iterable[NodeGene], connections: Iterable[ConnectionGene],
                   activation_pool: Sequence[ActivationKind], fitness=None, key=0) -> "Genome":
        nodes = sorted(nodes, key=lambda n: n.node_id)
        conns = sorted(connections, key=lambda c: c.innovation)
        return cls(
            [n.node_id for n in nodes],
            [KIND_NAMES.index(n.kind) for n in nodes],
            [n.bias for n in nodes],
            [_ACT_INDEX[ActivationKind(n.activation)] for n in nodes],
            [c.innovation for c in conns],
            [c.source_id for c in conns],
            [c.target_id for c in conns],
            [c.weight for c in conns],
            [c.enabled for c in conns],
            activation_pool, fitness, key,
        )

    def _replace(self, **changes) -> "Genome":
        fields = {name: getattr(self, name) for name in self.__slots__}
        fields["fitness"] = None
        fields.update(changes)
        return Genome(**fields)

    @property
    def input_ids(self) -> np.ndarray:
        return self.node_ids[self.node_kinds == INPUT]

    @property
    def output_ids(self) -> np.ndarray:
        return self.node_ids[self.node_kinds == OUTPUT]

    def __len__(self) -> int:
        return len(self.innovations)

    def structurally_equal(self, other: "Genome") -> bool:
        """Same genes with identical values (fitness and key ignored)."""
        return (
            self.activation_pool == other.activation_pool
            and all(
                np.array_equal(getattr(self, f), getattr(other, f))
                for f in ("node_ids", "node_kinds", "biases", "activations",
                          "innovations", "sources", "targets", "weights", "enabled")
            )
        )

    def __eq__(self, other):
        if not isinstance(other, Genome):
            return NotImplemented
        return self.structurally_equal(other) and self.fitness == other.fitness and self.key == other.key

    __hash__ = None

    def __repr__(self):
        return (f"Genome(key={self.key}, nodes={len(self.node_ids)}, "
                f"connections={len(self.innovations)}, fitness={self.fitness})")

    def copy(self, key: Optional[int] = None) -> "Genome":
        g = self._replace(fitness=self.fitness)
        if key is not None:
            g.key = key
        return g


def _canonical_pairs(input_count, hidden_count, output_count):
    inputs = range(input_count)
    outputs = range(input_count, input_count + output_count)
    hidden = range(input_count + output_count, input_count + output_count + hidden_count)
    if hidden_count == 0:
        return [(i, o) for i in inputs for o in outputs]
    return [(i, h) for i in inputs for h in hidden] + [(h, o) for h in hidden for o in outputs]


def _pool_codes(pool) -> np.ndarray:
    pool = [ActivationKind(a) for a in pool]
    if not pool:
        raise ValueError("activation pool must not be empty")
    return np.array([_ACT_INDEX[a] for a in pool], dtype=np.int8)


def initial_genome(input_count: int, hidden_count: int, output_count: int,
                   activation_pool, rng: np.random.Generator, *,
                   init_range: tuple[float, float] = (-1.0, 1.0), key: int = 0) -> Genome:
    """Fully connected starting genome (inputs -> hidden -> outputs).

    Node ids: inputs ``0..I-1``, outputs ``I..I+O-1``, hidden after that.
    Innovation numbers follow the canonical pair order used by
    :meth:`InnovationRegistry.initial`.
    """
    if input_count < 1 or output_count < 1 or hidden_count < 0:
        raise ValueError("need input_count >= 1, output_count >= 1, hidden_count >= 0")
    codes = _pool_codes(activation_pool)
    n_nodes = input_count + output_count + hidden_count
    kinds = np.array([INPUT] * input_count + [OUTPUT] * output_count + [HIDDEN] * hidden_count,
                     dtype=np.int8)
    pairs = _canonical_pairs(input_count, hidden_count, output_count)
    lo, hi = init_range
    weights = rng.uniform(lo, hi, size=len(pairs))
    biases = rng.uniform(lo, hi, size=n_nodes)
    acts = codes[rng.integers(0, len(codes), size=n_nodes)]
    biases[:input_count] = 0.0
    acts[:input_count] = _ACT_INDEX[ActivationKind.IDENTITY]
    return Genome(
        np.arange(n_nodes), kinds, biases, acts,
        np.arange(len(pairs)),
        [p[0] for p in pairs], [p[1] for p in pairs],
        weights, np.ones(len(pairs), dtype=bool),
        activation_pool, key=key,
    )


# -- graph helpers --------------------------------------------------------------

def _successors(sources, targets, enabled) -> dict[int, list[int]]:
    succ: dict[int, list[int]] = {}
    for s, t in zip(sources[enabled].tolist(), targets[enabled].tolist()):
        succ.setdefault(s, []).append(t)
    return succ


def _reaches(succ: dict[int, list[int]], start: int, goal: int) -> bool:
    if start == goal:
        return True
    seen = {start}
    stack = [start]
    while stack:
        n = stack.pop()
        for m in succ.get(n, ()):
            if m == goal:
                return True
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return False


def creates_cycle(g: Genome, source_id: int, target_id: int) -> bool:
    """Would enabling ``source -> target`` close a cycle in the enabled graph?"""
    return _reaches(_successors(g.sources, g.targets, g.enabled), target_id, source_id)


def is_acyclic(g: Genome) -> bool:
    try:
        topological_order(g.node_ids.tolist(),
                          zip(g.sources[g.enabled].tolist(), g.targets[g.enabled].tolist()))
    except ValueError:
        return False
    return True


def to_network(g: Genome) -> FeedForwardNetwork:
    """Phenotype from the enabled connections of ``g``."""
    input_count = int(np.count_nonzero(g.node_kinds == INPUT))
    if not np.array_equal(g.input_ids, np.arange(input_count)):
        raise ValueError("input nodes must be numbered 0..input_count-1")
    mask = g.node_kinds != INPUT
    ids = g.node_ids[mask].tolist()
    nodes = tuple(
        NodeSpec(n, b, ALL_ACTIVATIONS[a])
        for n, b, a in zip(ids, g.biases[mask].tolist(), g.activations[mask].tolist())
    )
    src = g.sources[g.enabled].tolist()
    dst = g.targets[g.enabled].tolist()
    order = topological_order(ids, zip(src, dst))
    return FeedForwardNetwork(
        input_count=input_count,
        output_ids=tuple(g.output_ids.tolist()),
        nodes=nodes,
        connections=tuple(zip(src, dst, g.weights[g.enabled].tolist())),
        evaluation_order=tuple(order),
    )


# -- operators ---------------------------------------------------------------

def _insert_connection(g: Genome, innovation, source, target, weight, enabled=True, **changes):
    pos = int(np.searchsorted(g.innovations, innovation))
    return g._replace(
        innovations=np.insert(g.innovations, pos, innovation),
        sources=np.insert(g.sources, pos, source),
        targets=np.insert(g.targets, pos, target),
        weights=np.insert(g.weights, pos, weight),
        enabled=np.insert(g.enabled, pos, enabled),
        **changes,
    )


def mutate_add_node(g: Genome, reg: InnovationRegistry, pool, rng: np.random.Generator) -> Genome:
    """Split a random enabled connection with a new hidden node.

    Returns ``g`` itself when there is no enabled connection to split.
    """
    candidates = np.flatnonzero(g.enabled)
    if len(candidates) == 0:
        return g
    codes = _pool_codes(pool)
    idx = int(candidates[rng.integers(len(candidates))])
    src, dst = int(g.sources[idx]), int(g.targets[idx])
    weight = float(g.weights[idx])
    new_id = reg.split_node_id(int(g.innovations[idx]))
    if new_id in g.node_ids:
        new_id = reg.new_node_id()
    act = codes[rng.integers(len(codes))]

    pos = int(np.searchsorted(g.node_ids, new_id))
    enabled = g.enabled.copy()
    enabled[idx] = False
    child = g._replace(
        node_ids=np.insert(g.node_ids, pos, new_id),
        node_kinds=np.insert(g.node_kinds, pos, HIDDEN),
        biases=np.insert(g.biases, pos, 0.0),
        activations=np.insert(g.activations, pos, act),
        enabled=enabled,
    )
    child = _insert_connection(child, reg.connection_innovation(src, new_id), src, new_id, 1.0)
    child = _insert_connection(child, reg.connection_innovation(new_id, dst), new_id, dst, weight)
    child.key = g.key
    return child


def legal_new_connections(g: Genome) -> list[tuple[int, int]]:
    """All (source, target) pairs addable without duplication or a cycle."""
    existing = set(zip(g.sources.tolist(), g.targets.tolist()))
    succ = _successors(g.sources, g.targets, g.enabled)
    # descendants[t]: every node reachable from t, including t
    descendants: dict[int, set[int]] = {}

    def desc(n):
        if n not in descendants:
            out = {n}
            stack = [n]
            while stack:
                for m in succ.get(stack.pop(), ()):
                    if m not in out:
                        out.add(m)
                        stack.append(m)
            descendants[n] = out
        return descendants[n]

    all_ids = g.node_ids.tolist()
    targets = g.node_ids[g.node_kinds != INPUT].tolist()
    pairs = []
    for s in all_ids:
        for t in targets:
            if (s, t) not in existing and s not in desc(t):
                pairs.append((s, t))
    return pairs


def mutate_add_connection(g: Genome, reg: InnovationRegistry, rng: np.random.Generator,
                          rates: Optional[MutationRates] = None) -> Genome:
    """Add one uniformly chosen legal connection; returns ``g`` if none exists."""
    rates = rates or MutationRates()
    pairs = legal_new_connections(g)
    if not pairs:
        return g
    s, t = pairs[int(rng.integers(len(pairs)))]
    weight = float(np.clip(rng.uniform(*rates.init_range), *rates.weight_range))
    child = _insert_connection(g, reg.connection_innovation(s, t), s, t, weight)
    child.key = g.key
    return child


def mutate_weights(g: Genome, rates: MutationRates, rng: np.random.Generator) -> Genome:
    """Perturb/replace weights and biases, resample activations, toggle genes."""
    lo, hi = rates.weight_range
    ilo, ihi = rates.init_range

    def jitter(values, perturb_prob):
        n = len(values)
        replace = rng.random(n) < rates.weight_replace_prob
        perturb = ~replace & (rng.random(n) < perturb_prob)
        out = values.copy()
        if replace.any():
            out[replace] = rng.uniform(ilo, ihi, size=int(replace.sum()))
        if perturb.any():
            out[perturb] += rng.normal(0.0, rates.perturb_sigma, size=int(perturb.sum()))
        changed = replace | perturb
        out[changed] = np.clip(out[changed], lo, hi)
        return out

    weights = jitter(g.weights, rates.weight_perturb_prob)
    non_input = g.node_kinds != INPUT
    biases = g.biases.copy()
    biases[non_input] = jitter(g.biases[non_input], rates.bias_perturb_prob)

    activations = g.activations
    flip = non_input & (rng.random(len(g.node_ids)) < rates.activation_mutate_prob)
    if flip.any():
        codes = _pool_codes(g.activation_pool)
        activations = activations.copy()
        activations[flip] = codes[rng.integers(0, len(codes), size=int(flip.sum()))]

    enabled = g.enabled
    toggles = np.flatnonzero(rng.random(len(enabled)) < rates.toggle_enable_prob)
    if len(toggles):
        enabled = enabled.copy()
        enabled[toggles[enabled[toggles]]] = False
        revive = toggles[~g.enabled[toggles]]
        if len(revive):
            succ = _successors(g.sources, g.targets, enabled)
            for i in revive.tolist():
                s, t = int(g.sources[i]), int(g.targets[i])
                if not _reaches(succ, t, s):
                    enabled[i] = True
                    succ.setdefault(s, []).append(t)

    child = g._replace(weights=weights, biases=biases, activations=activations, enabled=enabled)
    child.key = g.key
    return child


def crossover(parent_a: Genome, parent_b: Genome, rng: np.random.Generator, key: int = 0) -> Genome:
    """Align genes by innovation; non-matching genes come from the fitter parent."""
    if parent_a.fitness is None or parent_b.fitness is None:
        raise ValueError("both parents need an assigned fitness")
    if parent_b.fitness > parent_a.fitness:
        fit, other = parent_b, parent_a
    else:
        fit, other = parent_a, parent_b

    _, i_fit, i_oth = np.intersect1d(fit.innovations, other.innovations,
                                     assume_unique=True, return_indices=True)
    weights = fit.weights.copy()
    take_other = rng.random(len(i_fit)) < 0.5
    weights[i_fit[take_other]] = other.weights[i_oth[take_other]]

    enabled = fit.enabled.copy()
    either_disabled = ~fit.enabled
    either_disabled[i_fit] |= ~other.enabled[i_oth]
    stay_disabled = rng.random(len(enabled)) < 0.75
    enabled = np.where(either_disabled, ~stay_disabled, enabled)

    # Genes enabled here but disabled in the fitter parent may close a cycle;
    # add them back one at a time.
    revived = np.flatnonzero(enabled & ~fit.enabled)
    if len(revived):
        enabled[revived] = False
        succ = _successors(fit.sources, fit.targets, enabled)
        for i in revived.tolist():
            s, t = int(fit.sources[i]), int(fit.targets[i])
            if not _reaches(succ, t, s):
                enabled[i] = True
                succ.setdefault(s, []).append(t)

    keep = np.isin(fit.node_ids, np.concatenate([fit.sources, fit.targets])) | (fit.node_kinds != HIDDEN)
    node_ids = fit.node_ids[keep]
    kinds = fit.node_kinds[keep]
    biases = fit.biases[keep].copy()
    acts = fit.activations[keep].copy()
    _, n_fit, n_oth = np.intersect1d(node_ids, other.node_ids, assume_unique=True,
                                     return_indices=True)
    take_other = rng.random(len(n_fit)) < 0.5
    biases[n_fit[take_other]] = other.biases[n_oth[take_other]]
    acts[n_fit[take_other]] = other.activations[n_oth[take_other]]

    return Genome(node_ids, kinds, biases, acts, fit.innovations, fit.sources, fit.targets,
                  weights, enabled, fit.activation_pool, key=key)


def compatibility_distance(a: Genome, b: Genome, c1: float = 1.0, c2: float = 1.0,
                           c3: float = 0.4) -> float:
    """``c1*E/N + c2*D/N + c3*Wbar`` over connection genes."""
    ia, ib = a.innovations, b.innovations
    if len(ia) == 0 and len(ib) == 0:
        return 0.0
    common, i_a, i_b = np.intersect1d(ia, ib, assume_unique=True, return_indices=True)
    non_matching = len(ia) + len(ib) - 2 * len(common)
    cutoff = min(ia[-1] if len(ia) else -1, ib[-1] if len(ib) else -1)
    excess = int(np.count_nonzero(ia > cutoff) + np.count_nonzero(ib > cutoff))
    disjoint = non_matching - excess
    n = max(len(ia), len(ib))
    if n < 20:
        n = 1
    wbar = float(np.mean(np.abs(a.weights[i_a] - b.weights[i_b]))) if len(common) else 0.0
    return c1 * excess / n + c2 * disjoint / n + c3 * wbar
