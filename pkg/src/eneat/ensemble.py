"""e-NEAT: a pool of independently evolved networks combined by majority vote."""

from __future__ import annotations

import hashlib
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence, TextIO

import numpy as np

from .dataset import SampleTable
from .evolution import EvolutionConfig, EvolutionReport, evolve
from .genome import KIND_NAMES, Genome, NodeGene, ConnectionGene, to_network
from .haralick import FeatureScaler, fit_scaler
from .metrics import ConfusionMatrix, balanced_accuracy
from .nn import ALL_ACTIVATIONS, ActivationKind, ClassLabel, FeedForwardNetwork, classify_batch

FORMAT_VERSION = 1
MAGIC = "eneat-model"
_MASK64 = (1 << 64) - 1


class ModelFormatError(ValueError):
    """Truncated or malformed model stream."""


class ModelVersionError(ModelFormatError):
    pass


class ModelChecksumError(ModelFormatError):
    pass


def derive_seed(master_seed: int, index: int) -> int:
    """splitmix64 finalizer over ``master_seed + (index + 1) * golden_gamma``."""
    z = (master_seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class EnsembleConfig:
    n_members: int = 15
    base: EvolutionConfig = field(default_factory=EvolutionConfig)
    master_seed: int = 0
    diversify: bool = True
    population_choices: tuple[int, ...] = (100, 150, 200, 250, 300)
    min_pool_size: int = 3

    def __post_init__(self):
        if self.n_members < 1:
            raise ValueError("n_members must be >= 1")
        if any(p < 2 for p in self.population_choices) or not self.population_choices:
            raise ValueError("population_choices must be non-empty and each >= 2")
        if not 1 <= self.min_pool_size <= len(ALL_ACTIVATIONS):
            raise ValueError(f"min_pool_size must be in [1, {len(ALL_ACTIVATIONS)}]")


def diversify_configs(cfg: EnsembleConfig) -> list[EvolutionConfig]:
    """One evolution config per member.

    Member ``i`` depends only on ``(master_seed, i)``: its run seed comes from
    :func:`derive_seed`, and population size and activation subset are drawn
    from a generator keyed on that seed.
    """
    out = []
    for i in range(cfg.n_members):
        seed = derive_seed(cfg.master_seed, i)
        if not cfg.diversify:
            out.append(replace(cfg.base, seed=seed))
            continue
        rng = np.random.default_rng([seed, 1])
        pop = int(rng.choice(cfg.population_choices))
        k = int(rng.integers(cfg.min_pool_size, len(ALL_ACTIVATIONS) + 1))
        picked = np.sort(rng.choice(len(ALL_ACTIVATIONS), size=k, replace=False))
        pool = tuple(ALL_ACTIVATIONS[j] for j in picked)
        out.append(replace(cfg.base, seed=seed, population_size=pop, activation_pool=pool))
    return out


@dataclass(eq=False)
class EnsembleMember:
    genome: Genome
    seed: int
    config_digest: str
    fitness: float
    report: Optional[EvolutionReport] = field(default=None, repr=False)
    _network: Optional[FeedForwardNetwork] = field(default=None, init=False, repr=False)

    @property
    def network(self) -> FeedForwardNetwork:
        if self._network is None:
            self._network = to_network(self.genome)
        return self._network

    def __eq__(self, other):
        if not isinstance(other, EnsembleMember):
            return NotImplemented
        return (self.genome.structurally_equal(other.genome) and self.seed == other.seed
                and self.config_digest == other.config_digest and self.fitness == other.fitness)


@dataclass(eq=True)
class EnsembleModel:
    members: tuple[EnsembleMember, ...]
    scaler: FeatureScaler
    aggregator: str = "mode"
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        self.members = tuple(self.members)
        if not self.members:
            raise ValueError("an ensemble needs at least one member")
        if self.aggregator != "mode":
            raise ValueError(f"unsupported aggregator {self.aggregator!r}")
        dims = {m.network.input_count for m in self.members}
        if dims != {self.scaler.dimension}:
            raise ValueError("members and scaler disagree on the input dimension")

    @property
    def n_members(self) -> int:
        return len(self.members)

    @property
    def input_count(self) -> int:
        return self.scaler.dimension


# -- training -------------------------------------------------------------------

def _run_member(args):
    cfg, train = args
    best, report = evolve(cfg, train)
    return best, report


def train_ensemble(cfg: EnsembleConfig, train: SampleTable, jobs: int = 1) -> EnsembleModel:
    """Evolve one network per diversified config on min-max scaled features.

    Runs are independent, so ``jobs > 1`` gives the same model as ``jobs = 1``.
    """
    scaler = fit_scaler(train.features)
    scaled = SampleTable(train.segment_ids, scaler.transform(train.features), train.labels)
    configs = diversify_configs(cfg)
    tasks = [(c, scaled) for c in configs]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_member, tasks))
    else:
        results = [_run_member(t) for t in tasks]
    members = tuple(
        EnsembleMember(best, c.seed, c.digest(), float(best.fitness), report)
        for c, (best, report) in zip(configs, results)
    )
    return EnsembleModel(members, scaler)


# -- voting ---------------------------------------------------------------------

@dataclass(frozen=True)
class VoteTally:
    counts: Mapping[ClassLabel, int]

    @classmethod
    def of(cls, votes: Sequence[ClassLabel]) -> "VoteTally":
        counts = {ClassLabel.F: 0, ClassLabel.NF: 0}
        for v in votes:
            counts[ClassLabel(v)] += 1
        return cls(counts)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def aggregate(tally: VoteTally, rng: np.random.Generator) -> ClassLabel:
    """Mode of the votes; a tie is broken uniformly at random among the tied labels."""
    if any(c < 0 for c in tally.counts.values()):
        raise ValueError("vote counts must be non-negative")
    if tally.total < 1:
        raise ValueError("cannot aggregate an empty tally")
    top = max(tally.counts.values())
    tied = sorted(label for label, c in tally.counts.items() if c == top)
    if len(tied) == 1:
        return tied[0]
    return tied[int(rng.integers(len(tied)))]


def member_votes(model: EnsembleModel, features) -> np.ndarray:
    """``(n_members, n_samples)`` boolean matrix of NF votes on raw features."""
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if x.shape[1] != model.input_count:
        raise ValueError(f"model expects {model.input_count} features, got {x.shape[1]}")
    scaled = model.scaler.transform(x)
    return np.array([classify_batch(m.network, scaled) for m in model.members])


def predict_batch(model: EnsembleModel, features, rng: np.random.Generator) -> np.ndarray:
    """NF mask for each row; ties draw from ``rng`` in row order."""
    votes = member_votes(model, features)
    n_nf = votes.sum(axis=0)
    n_f = model.n_members - n_nf
    out = n_nf > n_f
    for i in np.flatnonzero(n_nf == n_f).tolist():
        tally = VoteTally({ClassLabel.F: int(n_f[i]), ClassLabel.NF: int(n_nf[i])})
        out[i] = aggregate(tally, rng) is ClassLabel.NF
    return out


def predict(model: EnsembleModel, features, rng: np.random.Generator) -> ClassLabel:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("predict takes a single feature vector")
    return ClassLabel.NF if predict_batch(model, x[None, :], rng)[0] else ClassLabel.F


@dataclass(frozen=True)
class EnsembleEvaluation:
    confusion: ConfusionMatrix
    balanced_accuracy: float
    member_balanced_accuracies: tuple[float, ...]
    member_mean: float
    member_std: float


def evaluate_ensemble(model: EnsembleModel, test: SampleTable,
                      rng: np.random.Generator) -> EnsembleEvaluation:
    n_nf = int(test.nf_mask.sum())
    if n_nf == 0 or n_nf == len(test):
        raise ValueError("test table must contain both F and NF samples")
    votes = member_votes(model, test.features)
    member_ba = tuple(
        balanced_accuracy(ConfusionMatrix.from_masks(test.nf_mask, v)) for v in votes
    )
    cm = ConfusionMatrix.from_masks(test.nf_mask, predict_batch(model, test.features, rng))
    mean = statistics.fmean(member_ba)
    std = statistics.stdev(member_ba) if len(member_ba) > 1 else 0.0
    return EnsembleEvaluation(cm, balanced_accuracy(cm), member_ba, mean, std)


# -- serialization --------------------------------------------------------------

def _f(x: float) -> str:
    return format(float(x), ".17g")


def dumps_model(model: EnsembleModel) -> str:
    lines = [
        MAGIC,
        f"format_version={model.format_version}",
        f"n_members={model.n_members}",
        f"input_count={model.input_count}",
        f"aggregator={model.aggregator}",
        "scaler_min=" + ",".join(_f(v) for v in model.scaler.minimum),
        "scaler_max=" + ",".join(_f(v) for v in model.scaler.maximum),
    ]
    for i, m in enumerate(model.members):
        g = m.genome
        lines += [
            f"member={i}",
            f"seed={m.seed}",
            f"config_digest={m.config_digest}",
            f"fitness={_f(m.fitness)}",
            "activation_pool=" + ",".join(a.value for a in g.activation_pool),
            f"nodes={len(g.node_ids)}",
        ]
        for n in g.nodes:
            lines.append(f"node={n.node_id},{n.kind},{_f(n.bias)},{n.activation.value}")
        lines.append(f"connections={len(g)}")
        for c in g.connections:
            lines.append(f"conn={c.innovation},{c.source_id},{c.target_id},{_f(c.weight)},"
                         f"{int(c.enabled)}")
        lines.append(f"end_member={i}")
    body = "\n".join(lines) + "\n"
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    return body + f"checksum=sha256:{digest}\n"


def save_model(model: EnsembleModel, sink: TextIO) -> None:
    sink.write(dumps_model(model))


class _Lines:
    def __init__(self, lines):
        self.lines = lines
        self.pos = 0

    def field(self, key: str) -> str:
        if self.pos >= len(self.lines):
            raise ModelFormatError(f"truncated model: expected {key!r}")
        line = self.lines[self.pos]
        name, sep, value = line.partition("=")
        if not sep or name != key:
            raise ModelFormatError(f"line {self.pos + 1}: expected {key!r}, got {line[:40]!r}")
        self.pos += 1
        return value

    def integer(self, key: str) -> int:
        value = self.field(key)
        try:
            return int(value)
        except ValueError:
            raise ModelFormatError(f"line {self.pos}: {key} is not an integer") from None


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")]) if text else np.zeros(0)
    except ValueError:
        raise ModelFormatError(f"bad number list {text[:40]!r}") from None


def loads_model(text: str) -> EnsembleModel:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != MAGIC:
        raise ModelFormatError("not an e-NEAT model stream")
    if len(lines) < 2 or not lines[1].startswith("format_version="):
        raise ModelFormatError("truncated model: missing format_version")
    try:
        version = int(lines[1].partition("=")[2])
    except ValueError:
        raise ModelFormatError("format_version is not an integer") from None
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"unsupported model format_version {version} "
                                f"(this build reads {FORMAT_VERSION})")
    if not lines[-1].startswith("checksum=sha256:"):
        raise ModelFormatError("truncated model: missing checksum line")
    body = "\n".join(lines[:-1]) + "\n"
    if hashlib.sha256(body.encode("utf-8")).hexdigest() != lines[-1].partition(":")[2]:
        raise ModelChecksumError("model checksum mismatch")

    r = _Lines(lines[:-1])
    r.pos = 2
    n_members = r.integer("n_members")
    input_count = r.integer("input_count")
    aggregator = r.field("aggregator")
    scaler = FeatureScaler(_floats(r.field("scaler_min")), _floats(r.field("scaler_max")))
    if scaler.dimension != input_count:
        raise ModelFormatError("scaler dimension does not match input_count")
    members = []
    for i in range(n_members):
        if r.integer("member") != i:
            raise ModelFormatError(f"member blocks out of order at member {i}")
        seed = r.integer("seed")
        digest = r.field("config_digest")
        try:
            fitness = float(r.field("fitness"))
            pool = [ActivationKind.parse(a) for a in r.field("activation_pool").split(",")]
            nodes = []
            for _ in range(r.integer("nodes")):
                nid, kind, bias, act = r.field("node").split(",")
                if kind not in KIND_NAMES:
                    raise ValueError(f"unknown node kind {kind!r}")
                nodes.append(NodeGene(int(nid), kind, float(bias), ActivationKind.parse(act)))
            conns = []
            for _ in range(r.integer("connections")):
                inn, src, dst, w, en = r.field("conn").split(",")
                if en not in ("0", "1"):
                    raise ValueError("enabled flag must be 0 or 1")
                conns.append(ConnectionGene(int(inn), int(src), int(dst), float(w), en == "1"))
        except ValueError as exc:
            if isinstance(exc, ModelFormatError):
                raise
            raise ModelFormatError(f"member {i}: {exc}") from None
        if r.integer("end_member") != i:
            raise ModelFormatError(f"member {i}: bad end marker")
        genome = Genome.from_genes(nodes, conns, pool, fitness=fitness)
        members.append(EnsembleMember(genome, seed, digest, fitness))
    if r.pos != len(r.lines):
        raise ModelFormatError("trailing data after last member")
    try:
        return EnsembleModel(tuple(members), scaler, aggregator, version)
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from None


def load_model(source: TextIO) -> EnsembleModel:
    return loads_model(source.read())
