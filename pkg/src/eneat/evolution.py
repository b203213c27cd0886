"""Population lifecycle: speciation, fitness sharing, reproduction, the generation loop."""

from __future__ import annotations

import hashlib
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dataset import SampleTable
from .genome import (
    Genome,
    InnovationRegistry,
    MutationRates,
    compatibility_distance,
    crossover,
    initial_genome,
    mutate_add_connection,
    mutate_add_node,
    mutate_weights,
    to_network,
)
from .metrics import ConfusionMatrix, balanced_accuracy
from .nn import ALL_ACTIVATIONS, ActivationKind, classify_batch

log = logging.getLogger(__name__)


class ExtinctionError(RuntimeError):
    """Every species stagnated and none is protected."""


@dataclass(frozen=True)
class EvolutionConfig:
    population_size: int = 200
    max_generations: int = 75
    fitness_target: float = 1.0
    activation_pool: tuple[ActivationKind, ...] = ALL_ACTIVATIONS
    hidden_count: int = 8
    compatibility_threshold: float = 3.0
    species_elitism: int = 2
    elitism: int = 2
    survival_fraction: float = 0.2
    stagnation_limit: int = 15
    compatibility_coefficients: tuple[float, float, float] = (1.0, 1.0, 0.4)
    mutation: MutationRates = field(default_factory=MutationRates)
    seed: int = 0

    def __post_init__(self):
        pool = tuple(dict.fromkeys(ActivationKind(a) for a in self.activation_pool))
        object.__setattr__(self, "activation_pool", pool)
        object.__setattr__(self, "compatibility_coefficients",
                           tuple(float(c) for c in self.compatibility_coefficients))
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.max_generations < 1:
            raise ValueError("max_generations must be >= 1")
        if not 0.0 <= self.fitness_target <= 1.0:
            raise ValueError("fitness_target must be in [0, 1]")
        if not pool:
            raise ValueError("activation_pool must not be empty")
        if self.hidden_count < 0:
            raise ValueError("hidden_count must be >= 0")
        if not self.compatibility_threshold > 0:
            raise ValueError("compatibility_threshold must be positive")
        if self.species_elitism < 0 or self.elitism < 0 or self.stagnation_limit < 0:
            raise ValueError("elitism and stagnation settings must be non-negative")
        if not 0.0 < self.survival_fraction <= 1.0:
            raise ValueError("survival_fraction must be in (0, 1]")

    def canonical_text(self) -> str:
        d = asdict(self)
        d["activation_pool"] = [a.value for a in self.activation_pool]
        return ";".join(f"{k}={_canon(v)}" for k, v in sorted(d.items()))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]


def _canon(v) -> str:
    if isinstance(v, dict):
        return "{" + ",".join(f"{k}:{_canon(x)}" for k, x in sorted(v.items())) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_canon(x) for x in v) + "]"
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class Species:
    species_id: int
    representative: Genome
    members: list[Genome]
    best_fitness_ever: float = -math.inf
    last_improvement_generation: int = 0

    def best_member(self) -> Genome:
        return min(self.members, key=_rank_key)


def _rank_key(g: Genome):
    # Highest fitness first, then lowest key.
    return (-(g.fitness if g.fitness is not None else -math.inf), g.key)


@dataclass
class Population:
    generation: int
    species: list[Species]
    best_genome_so_far: Optional[Genome] = None
    next_genome_key: int = 0
    next_species_id: int = 0

    @property
    def genomes(self) -> list[Genome]:
        return [g for sp in self.species for g in sp.members]


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    n_species: int


@dataclass
class EvolutionReport:
    generations: list[GenerationStats] = field(default_factory=list)
    stop_reason: str = ""
    elapsed_seconds: float = 0.0

    def to_table(self, delimiter: str = ",") -> str:
        lines = [delimiter.join(("generation", "best_fitness", "mean_fitness", "n_species"))]
        for s in self.generations:
            lines.append(delimiter.join((str(s.generation), repr(s.best_fitness),
                                         repr(s.mean_fitness), str(s.n_species))))
        return "\n".join(lines) + "\n"


# -- fitness --------------------------------------------------------------------

def _check_two_classes(table: SampleTable):
    if len(table) == 0:
        raise ValueError("training table is empty")
    n_nf = int(table.nf_mask.sum())
    if n_nf == 0 or n_nf == len(table):
        raise ValueError("training table must contain both F and NF samples")


def evaluate_fitness(g: Genome, train: SampleTable) -> float:
    """Balanced accuracy of ``g`` on ``train``; also stored as ``g.fitness``."""
    _check_two_classes(train)
    pred = classify_batch(to_network(g), train.features)
    fit = balanced_accuracy(ConfusionMatrix.from_masks(train.nf_mask, pred))
    g.fitness = fit
    return fit


# -- speciation -----------------------------------------------------------------

def speciate(genomes: Sequence[Genome], previous: Sequence[Species], threshold: float,
             rng: np.random.Generator, coefficients=(1.0, 1.0, 0.4),
             next_species_id: int = 0) -> list[Species]:
    """Assign each genome to the first compatible species (by id), else found one.

    Species statistics carry over from ``previous``; representatives for the
    next round are redrawn from the new members; empty species are dropped.
    """
    if not genomes:
        raise ValueError("cannot speciate an empty population")
    c1, c2, c3 = coefficients
    slots = [(sp.species_id, sp.representative, sp, []) for sp in sorted(previous, key=lambda s: s.species_id)]
    next_id = max([next_species_id] + [sp.species_id + 1 for sp in previous])
    for g in genomes:
        for _, rep, _, members in slots:
            if compatibility_distance(rep, g, c1, c2, c3) <= threshold:
                members.append(g)
                break
        else:
            slots.append((next_id, g, None, [g]))
            next_id += 1
    out = []
    for sid, _, old, members in slots:
        if not members:
            continue
        rep = members[int(rng.integers(len(members)))]
        sp = Species(sid, rep, members)
        if old is not None:
            sp.best_fitness_ever = old.best_fitness_ever
            sp.last_improvement_generation = old.last_improvement_generation
        out.append(sp)
    return out


def adjusted_fitness(sp: Species) -> list[float]:
    n = len(sp.members)
    return [g.fitness / n for g in sp.members]


def offspring_quotas(species: Sequence[Species], population_size: int) -> list[int]:
    """Quota per species proportional to summed adjusted fitness.

    Largest-remainder rounding; the species holding the best genome is topped
    up to at least one slot (taken from the largest quota).
    """
    sums = np.array([sum(adjusted_fitness(sp)) for sp in species], dtype=float)
    if sums.sum() <= 0:
        sums = np.ones(len(species))
    raw = sums / sums.sum() * population_size
    quotas = np.floor(raw).astype(int)
    remainder = population_size - int(quotas.sum())
    order = sorted(range(len(species)), key=lambda k: (-(raw[k] - quotas[k]), k))
    for k in order[:remainder]:
        quotas[k] += 1
    best = min(range(len(species)), key=lambda k: _rank_key(species[k].best_member()))
    if quotas[best] == 0:
        donor = int(np.argmax(quotas))
        quotas[donor] -= 1
        quotas[best] += 1
    return quotas.tolist()


def update_stagnation(species: Sequence[Species], generation: int) -> None:
    for sp in species:
        best = max(g.fitness for g in sp.members)
        if best > sp.best_fitness_ever:
            sp.best_fitness_ever = best
            sp.last_improvement_generation = generation


def remove_stagnant(species: Sequence[Species], generation: int, limit: int,
                    species_elitism: int) -> list[Species]:
    ranked = sorted(species, key=lambda sp: _rank_key(sp.best_member()))
    protected = {sp.species_id for sp in ranked[:species_elitism]}
    alive = [sp for sp in species
             if sp.species_id in protected or generation - sp.last_improvement_generation <= limit]
    if not alive:
        raise ExtinctionError("all species stagnated and species_elitism is 0")
    return alive


def _make_offspring(sp: Species, quota: int, cfg: EvolutionConfig, reg: InnovationRegistry,
                    rng: np.random.Generator, pop: Population) -> list[Genome]:
    ranked = sorted(sp.members, key=_rank_key)
    n_elite = min(cfg.elitism, quota, len(ranked))
    children = ranked[:n_elite]
    cutoff = max(1, math.ceil(cfg.survival_fraction * len(ranked)))
    parents = ranked[:cutoff]
    rates = cfg.mutation
    for _ in range(quota - n_elite):
        p1 = parents[int(rng.integers(len(parents)))]
        p2 = parents[int(rng.integers(len(parents)))]
        child = crossover(p1, p2, rng, key=pop.next_genome_key)
        pop.next_genome_key += 1
        if rng.random() < rates.add_node_prob:
            child = mutate_add_node(child, reg, child.activation_pool, rng)
        if rng.random() < rates.add_connection_prob:
            child = mutate_add_connection(child, reg, rng, rates)
        child = mutate_weights(child, rates, rng)
        children.append(child)
    return children


def reproduce(pop: Population, cfg: EvolutionConfig, reg: InnovationRegistry,
              rng: np.random.Generator) -> Population:
    """Next generation: drop stagnant species, copy elites, breed the rest, respeciate."""
    alive = remove_stagnant(pop.species, pop.generation, cfg.stagnation_limit, cfg.species_elitism)
    quotas = offspring_quotas(alive, cfg.population_size)
    nxt = Population(pop.generation + 1, [], pop.best_genome_so_far,
                     pop.next_genome_key, pop.next_species_id)
    children = []
    for sp, quota in zip(alive, quotas):
        if quota > 0:
            children.extend(_make_offspring(sp, quota, cfg, reg, rng, nxt))
    nxt.species = speciate(children, alive, cfg.compatibility_threshold, rng,
                           cfg.compatibility_coefficients, nxt.next_species_id)
    nxt.next_species_id = max(sp.species_id for sp in nxt.species) + 1
    return nxt


# -- main loop ------------------------------------------------------------------

def initial_population(cfg: EvolutionConfig, input_count: int, rng: np.random.Generator):
    reg = InnovationRegistry.initial(input_count, cfg.hidden_count, 1)
    genomes = [
        initial_genome(input_count, cfg.hidden_count, 1, cfg.activation_pool, rng,
                       init_range=cfg.mutation.init_range, key=k)
        for k in range(cfg.population_size)
    ]
    pop = Population(0, [], next_genome_key=cfg.population_size)
    pop.species = speciate(genomes, [], cfg.compatibility_threshold, rng,
                           cfg.compatibility_coefficients)
    pop.next_species_id = max(sp.species_id for sp in pop.species) + 1
    return pop, reg


def evolve(cfg: EvolutionConfig, train: SampleTable) -> tuple[Genome, EvolutionReport]:
    """Run NEAT until the fitness target or the generation cap; return the best-ever genome."""
    _check_two_classes(train)
    start = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    pop, reg = initial_population(cfg, train.feature_dimension, rng)
    report = EvolutionReport()
    best: Optional[Genome] = None
    while True:
        genomes = pop.genomes
        for g in genomes:
            if g.fitness is None:
                evaluate_fitness(g, train)
        gen_best = min(genomes, key=_rank_key)
        if best is None or gen_best.fitness > best.fitness:
            best = gen_best
        pop.best_genome_so_far = best
        fits = [g.fitness for g in genomes]
        report.generations.append(GenerationStats(
            pop.generation, float(gen_best.fitness), math.fsum(fits) / len(fits), len(pop.species)))
        log.debug("generation %d: best %.4f mean %.4f species %d", pop.generation,
                  gen_best.fitness, report.generations[-1].mean_fitness, len(pop.species))
        if best.fitness >= cfg.fitness_target:
            report.stop_reason = "target_reached"
            break
        if pop.generation + 1 >= cfg.max_generations:
            report.stop_reason = "generation_limit"
            break
        update_stagnation(pop.species, pop.generation)
        pop = reproduce(pop, cfg, reg, rng)
    report.elapsed_seconds = time.perf_counter() - start
    return best, report
