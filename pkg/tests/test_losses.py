import math

import numpy as np
import pytest

from autodiff import check_gradients, constant
from training.losses import (
    LossWeights,
    class_weights,
    dice_structural_loss,
    edge_class_loss,
    total_loss,
)
from utility.errors import ConfigError, InvalidLabelError


def random_graph(rng, n, density=0.3):
    T = np.triu((rng.random((n, n)) < density).astype(float), k=1)
    return T + T.T


def loop_edge_loss(P, T, mode):
    n = P.shape[0]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if not pairs:
        return 0.0
    beta = sum(T[i, j] for i, j in pairs) / len(pairs)
    w_pos, w_neg = (beta, 1 - beta) if mode == "paper_literal" else (1 - beta, beta)
    total = 0.0
    for i, j in pairs:
        if T[i, j] == 1:
            total -= w_pos * math.log(P[i, j])
        else:
            total -= w_neg * math.log(1 - P[i, j])
    return total


def loop_dice_loss(P, T):
    inter = pred_sq = true_sq = 0.0
    for index, p in np.ndenumerate(P):
        inter += p * T[index]
        pred_sq += p * p
        true_sq += T[index] * T[index]
    if pred_sq + true_sq == 0:
        return 0.0
    return 1 - 2 * inter / (pred_sq + true_sq)


@pytest.mark.parametrize("mode", ["paper_literal", "hed_standard"])
def test_edge_class_loss_matches_loop_oracle(mode):
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(1, 9))
        P = rng.uniform(0.01, 0.99, size=(n, n))
        P = (P + P.T) / 2
        T = random_graph(rng, n)
        assert abs(edge_class_loss(P, T, mode).item() - loop_edge_loss(P, T, mode)) <= 1e-10


def test_dice_loss_matches_loop_oracle():
    rng = np.random.default_rng(1)
    for _ in range(100):
        n = int(rng.integers(1, 9))
        P = rng.uniform(0.0, 1.0, size=(n, n))
        T = random_graph(rng, n)
        assert abs(dice_structural_loss(P, T).item() - loop_dice_loss(P, T)) <= 1e-10


def test_dice_loss_edge_cases():
    T = random_graph(np.random.default_rng(2), 6, 0.5)
    assert dice_structural_loss(T, T).item() == pytest.approx(0.0, abs=1e-15)
    assert dice_structural_loss(np.zeros((4, 4)), np.zeros((4, 4))).item() == 0.0


def test_class_weights():
    assert class_weights(1, 4, "paper_literal") == (0.25, 0.75)
    assert class_weights(1, 4, "hed_standard") == (0.75, 0.25)


def test_edge_loss_is_finite_at_saturated_predictions():
    T = np.array([[0.0, 1.0], [1.0, 0.0]])
    P = np.array([[0.0, 0.0], [0.0, 0.0]])
    assert math.isfinite(edge_class_loss(P, T).item())


def test_labels_must_be_binary():
    with pytest.raises(InvalidLabelError):
        edge_class_loss(np.full((2, 2), 0.5), np.full((2, 2), 0.5))


def test_loss_weights_validation():
    with pytest.raises(ConfigError):
        LossWeights(psi1=-1.0)
    with pytest.raises(ConfigError):
        LossWeights(psi1=0.0, psi2=0.0)
    with pytest.raises(ConfigError):
        LossWeights(balance_mode="focal")


def test_total_loss_combines_terms():
    rng = np.random.default_rng(3)
    P = rng.uniform(0.1, 0.9, size=(5, 5))
    T = random_graph(rng, 5)
    theta = {"w": constant(np.array([[1.0, 2.0]]))}
    terms = total_loss(P, T, LossWeights(psi1=2.0, psi2=0.5, weight_decay=0.1), theta)
    expected = 2.0 * terms.edge.item() + 0.5 * terms.structural.item() + 0.1 * 5.0
    assert terms.total.item() == pytest.approx(expected, abs=1e-12)
    assert terms.regularization.item() == pytest.approx(5.0)


def test_loss_gradients_with_respect_to_prediction():
    rng = np.random.default_rng(4)
    T = random_graph(rng, 5, 0.5)
    values = {"P": rng.uniform(0.1, 0.9, size=(5, 5))}

    def fn(v):
        return total_loss(v["P"], T, LossWeights()).total

    assert check_gradients(fn, values)["P"] <= 1e-6
