"""Regenerate the frozen files under tests/data.

Only rerun this after an intentional change to the model format or the
evolution algorithm; the tests compare against the committed copies.
"""

from pathlib import Path

import numpy as np

from eneat.cli import main
from eneat.dataset import dumps_csv
from eneat.ensemble import EnsembleMember, EnsembleModel, dumps_model
from eneat.genome import ConnectionGene, Genome, NodeGene
from eneat.haralick import FeatureScaler
from eneat.nn import ActivationKind
from eneat.synthetic import imbalanced_task

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"

GOLDEN_CONFIG = """\
neat.population_size=30
neat.max_generations=6
ensemble.n_members=3
ensemble.population_choices=20,30
ensemble.master_seed=7
"""


def tiny_model() -> EnsembleModel:
    """One member: two inputs feeding a sigmoid output."""
    nodes = [
        NodeGene(0, "input", 0.0, ActivationKind.IDENTITY),
        NodeGene(1, "input", 0.0, ActivationKind.IDENTITY),
        NodeGene(2, "output", -0.25, ActivationKind.SIGMOID),
    ]
    conns = [ConnectionGene(0, 0, 2, 1.5, True), ConnectionGene(1, 1, 2, -0.75, False)]
    genome = Genome.from_genes(nodes, conns, [ActivationKind.SIGMOID, ActivationKind.TANH], fitness=0.875)
    scaler = FeatureScaler(np.array([0.0, -1.0]), np.array([2.0, 1.0]))
    return EnsembleModel((EnsembleMember(genome, 42, "0123456789abcdef", 0.875),), scaler)


def main_() -> None:
    DATA.mkdir(exist_ok=True)
    (DATA / "tiny_model.txt").write_text(dumps_model(tiny_model()))
    train, test = imbalanced_task(seed=7, n_test=300)
    (DATA / "golden_train.csv").write_text(dumps_csv(train))
    (DATA / "golden_test.csv").write_text(dumps_csv(test))
    (DATA / "golden.conf").write_text(GOLDEN_CONFIG)
    main(["train", "--config", str(DATA / "golden.conf"), str(DATA / "golden_train.csv"),
          str(DATA / "golden_model.txt")])
    main(["evaluate", str(DATA / "golden_model.txt"), "--test", str(DATA / "golden_test.csv"),
          "--out", str(DATA / "golden_report.txt")])


if __name__ == "__main__":
    main_()
