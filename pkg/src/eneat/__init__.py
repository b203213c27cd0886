"""Ensembles of NEAT-evolved networks for two-class segment classification."""

from .config import RunConfig, load_config, parse_config
from .dataset import SampleTable, SplitSpec, load_csv, read_csv, save_csv, stratified_split
from .ensemble import (
    EnsembleConfig,
    EnsembleModel,
    aggregate,
    evaluate_ensemble,
    load_model,
    predict,
    predict_batch,
    save_model,
    train_ensemble,
)
from .evolution import EvolutionConfig, evolve
from .genome import Genome, InnovationRegistry, MutationRates
from .haralick import FeatureScaler, fit_scaler, glcm, haralick13, segment_features
from .metrics import ConfusionMatrix, balanced_accuracy, confusion, relative_gain, summarize_rounds
from .nn import ActivationKind, ClassLabel, FeedForwardNetwork, classify, forward
from .protocol import RoundProtocol, run_protocol

__all__ = [
    "ActivationKind", "ClassLabel", "ConfusionMatrix", "EnsembleConfig", "EnsembleModel",
    "EvolutionConfig", "FeatureScaler", "FeedForwardNetwork", "Genome", "InnovationRegistry",
    "MutationRates", "RoundProtocol", "RunConfig", "SampleTable", "SplitSpec", "aggregate",
    "balanced_accuracy", "classify", "confusion", "evaluate_ensemble", "evolve", "fit_scaler",
    "forward", "glcm", "haralick13", "load_config", "load_csv", "load_model", "parse_config",
    "predict", "predict_batch", "read_csv", "relative_gain", "run_protocol", "save_csv",
    "save_model", "segment_features", "stratified_split", "summarize_rounds", "train_ensemble",
]
