"""
Per-sample ADAM training of a GLN model.

Every epoch visits the training samples in an order drawn from a seeded
generator; each visit runs one forward pass from (features, I), builds the
total loss on a fresh tape, backpropagates and applies one ADAM step.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from autodiff.tape import Tape
from gln.block import forward
from gln.model import GlnModel
from training.adam import AdamState, adam_step, init_adam
from training.losses import LossWeights, total_loss
from utility.errors import ConfigError, TrainingDivergedError
from utility.tables import write_csv


@dataclass
class TrainConfig:
    epochs: int
    learning_rate: float
    weights: LossWeights = field(default_factory=LossWeights)
    shuffle_seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8


@dataclass
class EpochLoss:
    epoch: int
    mean_total: float
    mean_Lc: float
    mean_Ls: float


@dataclass
class TrainResult:
    model: GlnModel
    trace: List[EpochLoss]
    state: Optional[AdamState] = None


def check_samples(samples: Sequence, model: GlnModel):
    """All samples must match the model's node count and feature width."""
    for index, sample in enumerate(samples):
        shape = np.shape(sample.features)
        if shape != (model.n, model.dims[0]):
            raise ConfigError(
                f"sample {index} has features of shape {shape}, model expects {(model.n, model.dims[0])}"
            )


def train(model: GlnModel, samples: Sequence, config: TrainConfig, progress: bool = True) -> TrainResult:
    """
    Train ``model`` on ``samples``.

    Parameters:
        model: initial model (not modified)
        samples: objects with ``features`` (n x d_0) and ``adjacency`` (n x n)
        config: epochs, learning rate, loss weights and shuffle seed
        progress: show a tqdm bar over epochs

    Returns:
        TrainResult with the trained model and the per-epoch mean losses
    """
    check_samples(samples, model)
    if config.epochs <= 0 or not samples:
        return TrainResult(model=model, trace=[])

    rng = np.random.default_rng(config.shuffle_seed)
    params = model.parameters()
    state = init_adam(params, config.learning_rate, config.beta1, config.beta2, config.adam_eps)
    identity = np.eye(model.n)
    trace = []

    bar = tqdm(range(1, config.epochs + 1), desc="  Training", disable=not progress)
    for epoch in bar:
        totals, edges, structurals = [], [], []
        for index in rng.permutation(len(samples)):
            sample = samples[index]
            tape = Tape()
            result = forward(model, sample.features, identity, tape=tape)
            terms = total_loss(result.adjacency, sample.adjacency, config.weights, result.leaves)
            value = terms.total.item()
            if not np.isfinite(value):
                raise TrainingDivergedError(
                    epoch, int(index),
                    f"loss is {value} at epoch {epoch}, sample {int(index)}",
                )

            grads_by_leaf = tape.backward(terms.total)
            grads = {name: grads_by_leaf[leaf] for name, leaf in result.leaves.items()}
            params, state = adam_step(params, grads, state)
            model = model.with_parameters(params)

            totals.append(value)
            edges.append(terms.edge.item())
            structurals.append(terms.structural.item())

        record = EpochLoss(epoch, float(np.mean(totals)), float(np.mean(edges)), float(np.mean(structurals)))
        trace.append(record)
        bar.set_postfix(loss=f"{record.mean_total:.4f}")

    return TrainResult(model=model, trace=trace, state=state)


def trace_frame(trace: Sequence[EpochLoss]) -> pd.DataFrame:
    return pd.DataFrame(
        [(r.epoch, r.mean_total, r.mean_Lc, r.mean_Ls) for r in trace],
        columns=["epoch", "mean_total", "mean_Lc", "mean_Ls"],
    )


def save_loss_trace(trace: Sequence[EpochLoss], path: str) -> str:
    return write_csv(trace_frame(trace), path)
