"""Training and scoring steps shared by every command."""

from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from evaluation.edge_metrics import EdgeClassReport, aggregate_edge_reports, edge_class_metrics
from evaluation.mmd import MmdReport, mmd_report
from experiments.settings import ExperimentConfig
from gln.block import binarize, predict
from gln.model import GlnModel, init_model, model_dims
from training.losses import LossWeights
from training.trainer import TrainConfig, TrainResult, train


@dataclass
class Evaluation:
    reports: List[EdgeClassReport]
    aggregate: EdgeClassReport
    mmd: MmdReport
    predictions: List[np.ndarray] = field(default_factory=list)

    def summary_row(self) -> dict:
        row = self.aggregate.as_row()
        row.update(self.mmd.as_row())
        return row

    def per_sample_frame(self) -> pd.DataFrame:
        rows = [dict(sample=index, **report.as_row()) for index, report in enumerate(self.reports)]
        return pd.DataFrame(rows)


def loss_weights(cfg: ExperimentConfig) -> LossWeights:
    return LossWeights(
        psi1=cfg.loss.psi1,
        psi2=cfg.loss.psi2,
        weight_decay=cfg.loss.weight_decay,
        balance_mode=cfg.loss.balance_mode,
    )


def train_config(cfg: ExperimentConfig) -> TrainConfig:
    return TrainConfig(
        epochs=cfg.optim.epochs,
        learning_rate=cfg.optim.learning_rate,
        weights=loss_weights(cfg),
        shuffle_seed=cfg.seeds.shuffle_seed,
        beta1=cfg.optim.beta1,
        beta2=cfg.optim.beta2,
        adam_eps=cfg.optim.adam_eps,
    )


def fresh_model(cfg: ExperimentConfig, n: int, d0: int, layers: Optional[int] = None) -> GlnModel:
    depth = cfg.model.layers if layers is None else layers
    return init_model(
        model_dims(d0, cfg.model.hidden_dim, depth),
        n=n,
        k=cfg.model.kernels,
        epsilon=cfg.model.epsilon,
        seed=cfg.seeds.init_seed,
    )


def untrained_like(model: GlnModel, seed: int) -> GlnModel:
    """Freshly initialised model with the exact structure of ``model``."""
    return init_model(model.dims, model.n, model.k, model.epsilon, seed, dict(model.activations))


def gaussian_features(shape, seed: int, index: int) -> np.ndarray:
    """Standard normal features for sample ``index``, reproducible from ``seed``."""
    return np.random.default_rng([seed, index]).standard_normal(shape)


def fit(cfg: ExperimentConfig, samples: Sequence, layers: Optional[int] = None,
        progress: bool = True) -> TrainResult:
    """Initialise a model sized for ``samples`` and train it with ``cfg``."""
    first = samples[0]
    model = fresh_model(cfg, first.n, first.d, layers)
    return train(model, samples, train_config(cfg), progress=progress)


def score_graphs(predicted: Sequence, truth: Sequence, sigma: float = 1.0,
                 workers: int = 1, progress: bool = False) -> Evaluation:
    """Edge metrics per pair plus the MMD between the predicted and true sets."""
    reports = [edge_class_metrics(p, t) for p, t in zip(predicted, truth)]
    return Evaluation(
        reports=reports,
        aggregate=aggregate_edge_reports(reports),
        mmd=mmd_report(list(predicted), list(truth), sigma=sigma, workers=workers, progress=progress),
        predictions=list(predicted),
    )


def evaluate(model: GlnModel, samples: Sequence, sigma: float = 1.0, workers: int = 1,
             initial: Optional[Callable[[int], np.ndarray]] = None,
             noise_seed: Optional[int] = None, progress: bool = True) -> Evaluation:
    """
    Predict every sample and score the binarized graphs against the truth.

    Parameters:
        model: trained model
        samples: held-out samples
        sigma: MMD kernel bandwidth
        workers: threads for the graph statistics
        initial: sample index -> initial adjacency; identity when omitted
        noise_seed: when set, features are replaced by seeded Gaussian noise
        progress: show tqdm bars

    Returns:
        Evaluation
    """
    predicted = []
    for index, sample in enumerate(tqdm(samples, desc="  Predicting", disable=not progress)):
        A0 = None if initial is None else initial(index)
        features = sample.features if noise_seed is None else gaussian_features(sample.features.shape, noise_seed, index)
        predicted.append(binarize(predict(model, features, A0), model.epsilon))
    truth = [s.adjacency for s in samples]
    return score_graphs(predicted, truth, sigma, workers, progress)


def with_loss(cfg: ExperimentConfig, psi1: float, psi2: float, weight_decay: float) -> ExperimentConfig:
    return replace(cfg, loss=replace(cfg.loss, psi1=psi1, psi2=psi2, weight_decay=weight_decay))
