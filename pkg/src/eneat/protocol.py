"""Multi-round evaluation: retrain with a fresh master seed per round, score on a fixed test set."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .dataset import SampleTable
from .ensemble import EnsembleConfig, EnsembleModel, evaluate_ensemble, train_ensemble
from .metrics import RoundSummary, single_round_summary, summarize_rounds, summary_table

log = logging.getLogger(__name__)

DEFAULT_ROUND_SEEDS = (11, 22, 33, 44, 55)


@dataclass(frozen=True)
class RoundProtocol:
    n_rounds: int = 5
    seeds: tuple[int, ...] = DEFAULT_ROUND_SEEDS
    prediction_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.n_rounds < 1:
            raise ValueError("n_rounds must be >= 1")
        if len(self.seeds) != self.n_rounds:
            raise ValueError(f"need exactly {self.n_rounds} round seeds, got {len(self.seeds)}")


@dataclass(frozen=True)
class RoundResult:
    round_index: int
    seed: int
    ensemble_score: float
    member_scores: tuple[float, ...]
    member_mean: float
    member_std: float


@dataclass
class ProtocolResult:
    rounds: list[RoundResult]
    ensemble_summary: RoundSummary
    member_mean_summary: RoundSummary
    models: list[EnsembleModel] = field(default_factory=list, repr=False)

    @property
    def std_defined(self) -> bool:
        return self.ensemble_summary.std_defined

    def detail_table(self, fmt: str = "text") -> str:
        header = ("round", "seed", "ensemble_bacc", "member_mean", "member_std")
        rows = [(str(r.round_index), str(r.seed), f"{r.ensemble_score:.6f}",
                 f"{r.member_mean:.6f}", f"{r.member_std:.6f}") for r in self.rounds]
        sep = "," if fmt == "csv" else "  "
        return "\n".join(sep.join(r) for r in [header, *rows]) + "\n"

    def summary_table(self, fmt: str = "text", label: str = "e-NEAT") -> str:
        return summary_table([(label, self.ensemble_summary),
                              ("members (mean)", self.member_mean_summary)], fmt)


def summarize(scores: Sequence[float]) -> RoundSummary:
    return summarize_rounds(scores) if len(scores) >= 2 else single_round_summary(scores[0])


def run_protocol(protocol: RoundProtocol, cfg: EnsembleConfig, train: SampleTable,
                 test: SampleTable, jobs: int = 1, keep_models: bool = False) -> ProtocolResult:
    rounds = []
    models = []
    for i, seed in enumerate(protocol.seeds):
        model = train_ensemble(replace(cfg, master_seed=seed), train, jobs=jobs)
        ev = evaluate_ensemble(model, test, np.random.default_rng(protocol.prediction_seed))
        log.info("round %d (seed %d): ensemble %.4f, member mean %.4f",
                 i, seed, ev.balanced_accuracy, ev.member_mean)
        rounds.append(RoundResult(i, seed, ev.balanced_accuracy, ev.member_balanced_accuracies,
                                  ev.member_mean, ev.member_std))
        if keep_models:
            models.append(model)
    return ProtocolResult(
        rounds,
        summarize([r.ensemble_score for r in rounds]),
        summarize([r.member_mean for r in rounds]),
        models,
    )
