"""Flat ``section.key=value`` run configuration with a published schema."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from .ensemble import EnsembleConfig
from .evolution import EvolutionConfig
from .genome import MutationRates
from .haralick import DEFAULT_BANDS, DEFAULT_LEVELS
from .nn import ALL_ACTIVATIONS, ActivationKind
from .protocol import DEFAULT_ROUND_SEEDS, RoundProtocol


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _names(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _activations(text: str) -> tuple[ActivationKind, ...]:
    return tuple(ActivationKind.parse(v) for v in _names(text))


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], Any]
    default: Any
    help: str


_RATES = MutationRates()
_EVO = EvolutionConfig()
_ENS = EnsembleConfig()

SCHEMA: dict[str, Key] = {
    "neat.population_size": Key(int, _EVO.population_size, "genomes per generation (>= 2)"),
    "neat.max_generations": Key(int, _EVO.max_generations, "generation cap"),
    "neat.fitness_target": Key(float, _EVO.fitness_target, "stop once training balanced accuracy reaches this"),
    "neat.activation_pool": Key(_activations, ALL_ACTIVATIONS, "comma-separated activation names"),
    "neat.hidden_count": Key(int, _EVO.hidden_count, "hidden neurons in the fully connected start topology"),
    "neat.compatibility_threshold": Key(float, _EVO.compatibility_threshold, "speciation distance threshold"),
    "neat.compatibility_excess": Key(float, 1.0, "excess-gene coefficient"),
    "neat.compatibility_disjoint": Key(float, 1.0, "disjoint-gene coefficient"),
    "neat.compatibility_weight": Key(float, 0.4, "mean weight difference coefficient"),
    "neat.species_elitism": Key(int, _EVO.species_elitism, "best species protected from stagnation"),
    "neat.elitism": Key(int, _EVO.elitism, "members copied unchanged per species"),
    "neat.survival_fraction": Key(float, _EVO.survival_fraction, "top fraction of a species allowed to breed"),
    "neat.stagnation_limit": Key(int, _EVO.stagnation_limit, "generations without improvement before removal"),
    "mutation.weight_perturb_prob": Key(float, _RATES.weight_perturb_prob, "per-weight Gaussian perturbation"),
    "mutation.weight_replace_prob": Key(float, _RATES.weight_replace_prob, "per-weight resampling"),
    "mutation.bias_perturb_prob": Key(float, _RATES.bias_perturb_prob, "per-bias Gaussian perturbation"),
    "mutation.add_connection_prob": Key(float, _RATES.add_connection_prob, "per-offspring add-connection"),
    "mutation.add_node_prob": Key(float, _RATES.add_node_prob, "per-offspring add-node"),
    "mutation.activation_mutate_prob": Key(float, _RATES.activation_mutate_prob, "per-node activation resampling"),
    "mutation.toggle_enable_prob": Key(float, _RATES.toggle_enable_prob, "per-connection enable toggle"),
    "mutation.perturb_sigma": Key(float, _RATES.perturb_sigma, "perturbation standard deviation"),
    "mutation.weight_min": Key(float, _RATES.weight_range[0], "lower clamp for weights and biases"),
    "mutation.weight_max": Key(float, _RATES.weight_range[1], "upper clamp for weights and biases"),
    "mutation.init_min": Key(float, _RATES.init_range[0], "lower bound for fresh weights and biases"),
    "mutation.init_max": Key(float, _RATES.init_range[1], "upper bound for fresh weights and biases"),
    "ensemble.n_members": Key(int, _ENS.n_members, "networks in the ensemble"),
    "ensemble.master_seed": Key(int, _ENS.master_seed, "seed all member seeds derive from"),
    "ensemble.diversify": Key(_bool, _ENS.diversify, "vary population size and activation pool per member"),
    "ensemble.population_choices": Key(_ints, _ENS.population_choices, "population sizes members draw from"),
    "ensemble.min_pool_size": Key(int, _ENS.min_pool_size, "smallest activation subset a member draws"),
    "features.bands": Key(_names, DEFAULT_BANDS, "bands to describe, in order"),
    "features.levels": Key(int, DEFAULT_LEVELS, "gray levels for co-occurrence matrices"),
    "protocol.n_rounds": Key(int, 5, "evaluation rounds"),
    "protocol.seeds": Key(_ints, DEFAULT_ROUND_SEEDS, "master seed per round"),
    "protocol.prediction_seed": Key(int, 0, "seed for vote tie-breaking"),
}


@dataclass(frozen=True)
class RunConfig:
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    bands: tuple[str, ...] = DEFAULT_BANDS
    levels: int = DEFAULT_LEVELS
    protocol: RoundProtocol = field(default_factory=RoundProtocol)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse ``key=value`` lines; ``#`` comments and blank lines are skipped."""
    values = {k: spec.default for k, spec in SCHEMA.items()}
    errors = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep:
            errors.append(f"{source}:{lineno}: expected key=value")
            continue
        if key not in SCHEMA:
            errors.append(f"{source}:{lineno}: unknown key {key!r}")
            continue
        if key in seen:
            errors.append(f"{source}:{lineno}: duplicate key {key!r}")
            continue
        seen.add(key)
        try:
            values[key] = SCHEMA[key].parse(value)
        except ValueError as exc:
            errors.append(f"{source}:{lineno}: {key}: {exc}")
    if errors:
        raise ConfigError("\n".join(errors))
    try:
        return build_config(values)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def build_config(v: dict[str, Any]) -> RunConfig:
    rates = MutationRates(
        weight_perturb_prob=v["mutation.weight_perturb_prob"],
        weight_replace_prob=v["mutation.weight_replace_prob"],
        bias_perturb_prob=v["mutation.bias_perturb_prob"],
        add_connection_prob=v["mutation.add_connection_prob"],
        add_node_prob=v["mutation.add_node_prob"],
        activation_mutate_prob=v["mutation.activation_mutate_prob"],
        toggle_enable_prob=v["mutation.toggle_enable_prob"],
        perturb_sigma=v["mutation.perturb_sigma"],
        weight_range=(v["mutation.weight_min"], v["mutation.weight_max"]),
        init_range=(v["mutation.init_min"], v["mutation.init_max"]),
    )
    evo = EvolutionConfig(
        population_size=v["neat.population_size"],
        max_generations=v["neat.max_generations"],
        fitness_target=v["neat.fitness_target"],
        activation_pool=v["neat.activation_pool"],
        hidden_count=v["neat.hidden_count"],
        compatibility_threshold=v["neat.compatibility_threshold"],
        species_elitism=v["neat.species_elitism"],
        elitism=v["neat.elitism"],
        survival_fraction=v["neat.survival_fraction"],
        stagnation_limit=v["neat.stagnation_limit"],
        compatibility_coefficients=(v["neat.compatibility_excess"], v["neat.compatibility_disjoint"],
                                    v["neat.compatibility_weight"]),
        mutation=rates,
    )
    ens = EnsembleConfig(
        n_members=v["ensemble.n_members"],
        base=evo,
        master_seed=v["ensemble.master_seed"],
        diversify=v["ensemble.diversify"],
        population_choices=v["ensemble.population_choices"],
        min_pool_size=v["ensemble.min_pool_size"],
    )
    if v["features.levels"] < 2:
        raise ValueError("features.levels must be >= 2")
    if not v["features.bands"]:
        raise ValueError("features.bands must name at least one band")
    protocol = RoundProtocol(v["protocol.n_rounds"], v["protocol.seeds"], v["protocol.prediction_seed"])
    return RunConfig(evo, ens, tuple(v["features.bands"]), v["features.levels"], protocol)


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read(), str(path))


def _render(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, tuple):
        return ",".join(v.value if isinstance(v, ActivationKind) else str(v) for v in value)
    return str(value)


def default_config_text() -> str:
    """The schema rendered as a config file with every default spelled out."""
    lines = []
    section = None
    for key, spec in SCHEMA.items():
        head = key.split(".", 1)[0]
        if head != section:
            if section is not None:
                lines.append("")
            section = head
        lines.append(f"# {spec.help}")
        lines.append(f"{key}={_render(spec.default)}")
    return "\n".join(lines) + "\n"
