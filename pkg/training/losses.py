"""
Training objectives on the final predicted adjacency.

Edge-class loss: class-balanced cross-entropy over the n(n-1)/2 unordered
node pairs (strict upper triangle). Negative pairs score log(1 - P).

Structural loss: dice, 1 - 2 sum(P*T) / (sum(P^2) + sum(T^2)) over all n^2
entries, 0 when both matrices are empty.
"""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from autodiff.tape import ADValue, as_ad, constant, elementwise, reduce_sum
from utility.errors import ConfigError, DimensionError, InvalidLabelError


PROBABILITY_CLAMP = 1e-12
BALANCE_MODES = ("paper_literal", "hed_standard")


@dataclass
class LossWeights:
    psi1: float = 1.0
    psi2: float = 1.0
    weight_decay: float = 0.0
    balance_mode: str = "paper_literal"

    def __post_init__(self):
        if min(self.psi1, self.psi2, self.weight_decay) < 0:
            raise ConfigError("loss weights must be nonnegative")
        if self.psi1 + self.psi2 <= 0:
            raise ConfigError("psi1 + psi2 must be positive")
        if self.balance_mode not in BALANCE_MODES:
            raise ConfigError(f"balance_mode must be one of {BALANCE_MODES}, got {self.balance_mode!r}")


@dataclass
class LossTerms:
    total: ADValue
    edge: ADValue
    structural: ADValue
    regularization: Optional[ADValue] = None


def as_labels(A_true, shape) -> np.ndarray:
    labels = np.asarray(A_true, dtype=np.float64)
    if labels.shape != tuple(shape):
        raise DimensionError(f"label shape {labels.shape} does not match prediction {tuple(shape)}")
    if not np.all((labels == 0) | (labels == 1)):
        raise InvalidLabelError("ground-truth adjacency must be binary")
    return labels


def class_weights(n_pos: int, n_pairs: int, mode: str = "paper_literal"):
    """(w_pos, w_neg) with beta = |Y+| / |Y|."""
    beta = n_pos / n_pairs if n_pairs else 0.0
    if mode == "paper_literal":
        return beta, 1.0 - beta
    if mode == "hed_standard":
        return 1.0 - beta, beta
    raise ConfigError(f"unknown balance mode {mode!r}")


def edge_class_loss(A_pred, A_true, mode: str = "paper_literal") -> ADValue:
    A_pred = as_ad(A_pred)
    labels = as_labels(A_true, A_pred.shape)
    n = labels.shape[0]
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    positive = upper & (labels == 1)
    negative = upper & (labels == 0)
    n_pairs = int(upper.sum())
    if n_pairs == 0:
        return constant(0.0)
    w_pos, w_neg = class_weights(int(positive.sum()), n_pairs, mode)

    P = elementwise(A_pred, "clamp", lo=PROBABILITY_CLAMP, hi=1.0 - PROBABILITY_CLAMP)
    log_p = elementwise(P, "log")
    log_not_p = elementwise(elementwise(np.ones((n, n)), "sub", P), "log")
    return (reduce_sum(log_p, -w_pos * positive.astype(np.float64))
            + reduce_sum(log_not_p, -w_neg * negative.astype(np.float64)))


def dice_structural_loss(A_pred, A_true) -> ADValue:
    A_pred = as_ad(A_pred)
    labels = as_labels(A_true, A_pred.shape)
    true_sq = float(np.sum(labels * labels))

    intersection = reduce_sum(A_pred, labels)
    pred_sq = reduce_sum(A_pred * A_pred)
    if pred_sq.item() + true_sq == 0.0:
        return constant(0.0)
    ratio = intersection / (pred_sq + constant(true_sq))
    return constant(1.0) - elementwise(ratio, "scale", factor=2.0)


def l2_penalty(params: Dict[str, ADValue]) -> ADValue:
    total = constant(0.0)
    for leaf in params.values():
        total = total + reduce_sum(leaf * leaf)
    return total


def total_loss(A_pred, A_true, weights: LossWeights,
               params: Optional[Dict[str, ADValue]] = None) -> LossTerms:
    """
    psi1 * L_c + psi2 * L_s (+ weight_decay * sum ||theta||^2 when positive).

    Parameters:
        A_pred: final-layer soft adjacency
        A_true: binary ground truth
        weights: psi1, psi2, weight decay and balance mode
        params: parameter leaves, needed only for weight decay
    """
    edge = edge_class_loss(A_pred, A_true, weights.balance_mode)
    structural = dice_structural_loss(A_pred, A_true)
    total = (elementwise(edge, "scale", factor=weights.psi1)
             + elementwise(structural, "scale", factor=weights.psi2))

    regularization = None
    if weights.weight_decay > 0 and params:
        regularization = l2_penalty(params)
        total = total + elementwise(regularization, "scale", factor=weights.weight_decay)

    return LossTerms(total=total, edge=edge, structural=structural, regularization=regularization)
