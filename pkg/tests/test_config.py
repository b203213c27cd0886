from pathlib import Path

import pytest

from eneat.config import SCHEMA, ConfigError, RunConfig, default_config_text, load_config, parse_config
from eneat.nn import ALL_ACTIVATIONS

CONFIGS = Path(__file__).parent.parent / "configs"


def test_shipped_default_matches_reference_values():
    cfg = load_config(CONFIGS / "default.conf")
    assert cfg == RunConfig()
    assert cfg.evolution.population_size == 200
    assert cfg.evolution.max_generations == 75
    assert cfg.ensemble.n_members == 15
    assert cfg.evolution.hidden_count == 8
    assert cfg.evolution.activation_pool == ALL_ACTIVATIONS
    assert cfg.bands == ("b4", "b6")


def test_default_text_parses_to_defaults():
    assert parse_config(default_config_text()) == RunConfig()
    keys = [line.split("=")[0] for line in default_config_text().splitlines()
            if line and not line.startswith("#")]
    assert keys == list(SCHEMA)


def test_overrides():
    cfg = parse_config("neat.population_size = 50  # small\n\nneat.compatibility_weight=0.5\n"
                       "neat.activation_pool=tanh,sigmoid\nensemble.diversify=false\n")
    assert cfg.evolution.population_size == 50
    assert cfg.ensemble.base.population_size == 50
    assert cfg.evolution.compatibility_coefficients == (1.0, 1.0, 0.5)
    assert [a.value for a in cfg.evolution.activation_pool] == ["tanh", "sigmoid"]
    assert cfg.ensemble.diversify is False


@pytest.mark.parametrize("text, match", [
    ("neat.population_size=1\n", "population_size"),
    ("neat.bogus=3\n", "unknown key"),
    ("population_size=3\n", "unknown key"),
    ("neat.population_size\n", "key=value"),
    ("neat.population_size=abc\n", "population_size"),
    ("neat.population_size=10\nneat.population_size=12\n", "duplicate"),
    ("neat.activation_pool=sigmoid,swish\n", "swish"),
    ("protocol.n_rounds=3\n", "seeds"),
    ("features.levels=1\n", "levels"),
    ("ensemble.diversify=maybe\n", "boolean"),
])
def test_schema_rejections(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_errors_name_the_line():
    with pytest.raises(ConfigError, match=r"cfg:3: unknown key"):
        parse_config("# c\nneat.elitism=1\nnope=2\n", "cfg")


def test_synthetic_config_loads():
    cfg = load_config(CONFIGS / "synthetic.conf")
    assert cfg.protocol.n_rounds == 5
