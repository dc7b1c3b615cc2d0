import json

import numpy as np
import pytest

from autodiff import Tape, check_gradients, constant
from gln import (
    GlnLayerParams,
    binarize,
    forward,
    gln_block,
    init_model,
    intermediary_embedding,
    load_checkpoint,
    local_context,
    predict,
    save_checkpoint,
    sym_normalize,
)
from training.losses import LossWeights, total_loss
from utility.errors import ConfigError, DimensionError, InvalidAdjacencyError


def loop_matmul(a, b):
    rows, inner = a.shape
    cols = b.shape[1]
    out = np.zeros((rows, cols))
    for i in range(rows):
        for j in range(cols):
            total = 0.0
            for t in range(inner):
                total += a[i, t] * b[t, j]
            out[i, j] = total
    return out


def loop_sigmoid(x):
    out = np.zeros_like(x)
    for index, value in np.ndenumerate(x):
        out[index] = 1.0 / (1.0 + np.exp(-value))
    return out


def loop_tau(A):
    n = A.shape[0]
    B = A + np.eye(n)
    degree = [sum(B[i, j] for j in range(n)) for i in range(n)]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = B[i, j] / np.sqrt(degree[i] * degree[j])
    return out


def oracle_forward(model, H, A):
    for layer in model.layers:
        tau = loop_tau(A)
        propagated = loop_matmul(tau, H)
        H_int = sum(loop_sigmoid(loop_matmul(propagated, W)) for W in layer.W)
        H_local = loop_sigmoid(loop_matmul(loop_matmul(tau, H_int), layer.U))
        H_global = np.tanh(loop_matmul(H_local, layer.Z))
        alpha = loop_matmul(loop_matmul(H_local, layer.Q), H_global.T)
        S = loop_matmul(loop_matmul(layer.M, alpha), layer.M.T)
        A = loop_sigmoid((S + S.T) / 2.0)
        H = H_local
    return H, A


def random_symmetric(rng, n, density=0.4):
    A = np.triu((rng.random((n, n)) < density).astype(float) * rng.uniform(0.1, 2.0, (n, n)), k=1)
    return A + A.T


def test_sym_normalize_matches_loop_oracle():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(1, 9))
        A = random_symmetric(rng, n)
        np.testing.assert_allclose(sym_normalize(A).value, loop_tau(A), atol=1e-10, rtol=0)


def test_sym_normalize_of_empty_graph_is_identity():
    np.testing.assert_allclose(sym_normalize(np.zeros((4, 4))).value, np.eye(4))


def test_sym_normalize_rejects_bad_adjacency():
    with pytest.raises(InvalidAdjacencyError):
        sym_normalize(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(InvalidAdjacencyError):
        sym_normalize(np.array([[0.0, -1.0], [-1.0, 0.0]]))


def test_sym_normalize_averages_tiny_asymmetry():
    A = np.array([[0.0, 1.0], [1.0 + 1e-12, 0.0]])
    out = sym_normalize(A).value
    np.testing.assert_allclose(out, out.T, atol=1e-15)


def test_forward_matches_loop_oracle():
    rng = np.random.default_rng(1)
    for trial in range(100):
        n = int(rng.integers(2, 9))
        d0 = int(rng.integers(1, 4))
        L = int(rng.integers(1, 3))
        model = init_model([d0] + [3] * L, n=n, k=2, seed=trial)
        H0 = rng.normal(size=(n, d0))
        A0 = np.eye(n) if trial % 2 else random_symmetric(rng, n)
        result = forward(model, H0, A0)
        H_expected, A_expected = oracle_forward(model, H0, A0)
        np.testing.assert_allclose(result.adjacency.value, A_expected, atol=1e-10, rtol=0)
        np.testing.assert_allclose(result.embedding.value, H_expected, atol=1e-10, rtol=0)


def test_forward_with_no_layers_returns_inputs():
    model = init_model([3], n=5)
    H0 = np.arange(15.0).reshape(5, 3)
    result = forward(model, H0)
    np.testing.assert_array_equal(result.adjacency.value, np.eye(5))
    np.testing.assert_array_equal(result.embedding.value, H0)
    assert result.blocks == []


def test_predicted_adjacency_is_symmetric_probability():
    rng = np.random.default_rng(2)
    model = init_model([2, 8, 8], n=10, k=3, seed=4)
    A = predict(model, rng.normal(size=(10, 2)))
    np.testing.assert_allclose(A, A.T, atol=1e-12)
    assert np.all((A > 0) & (A < 1))


def test_forward_checks_shapes():
    model = init_model([2, 4], n=6)
    with pytest.raises(DimensionError):
        forward(model, np.zeros((5, 2)))
    with pytest.raises(DimensionError):
        forward(model, np.zeros((6, 2)), np.eye(5))


def test_block_outputs_have_expected_shapes():
    model = init_model([3, 5], n=7, k=2)
    out = gln_block(constant(np.ones((7, 3))), constant(np.eye(7)), model.layers[0])
    assert out.H_int.shape == (7, 5)
    assert out.H_local.shape == (7, 5)
    assert out.H_global.shape == (7, 5)
    assert out.A_next.shape == (7, 7)


def test_convolution_and_local_context_are_permutation_equivariant():
    rng = np.random.default_rng(3)
    for trial in range(20):
        n = int(rng.integers(2, 9))
        layer = init_model([3, 4], n=n, k=2, seed=trial).layers[0]
        H = rng.normal(size=(n, 3))
        A = random_symmetric(rng, n)
        P = np.eye(n)[rng.permutation(n)]
        PAP = P @ A @ P.T
        H_int = intermediary_embedding(H, A, layer).value
        np.testing.assert_allclose(intermediary_embedding(P @ H, PAP, layer).value, P @ H_int, atol=1e-12)
        np.testing.assert_allclose(local_context(P @ H_int, PAP, layer).value,
                                   P @ local_context(H_int, A, layer).value, atol=1e-12)


def test_zero_weights_predict_one_half_everywhere():
    n = 6
    model = init_model([3, 4, 4], n=n, k=2, seed=0)
    zeroed = model.with_parameters({name: np.zeros_like(value) for name, value in model.parameters().items()})
    result = forward(zeroed, np.random.default_rng(5).normal(size=(n, 3)))
    assert len(result.blocks) == 2
    np.testing.assert_array_equal(result.adjacency.value, np.full((n, n), 0.5))


def test_total_loss_gradients_match_finite_differences():
    rng = np.random.default_rng(3)
    n, k = 6, 2
    model = init_model([3, 4, 4], n=n, k=k, seed=11)
    H0 = rng.normal(size=(n, 3))
    A_true = np.triu((rng.random((n, n)) < 0.4).astype(float), k=1)
    A_true = A_true + A_true.T
    weights = LossWeights(weight_decay=0.01)

    def loss(values):
        H, A = constant(H0), constant(np.eye(n))
        for l in range(model.L):
            prefix = f"layers.{l}."
            entries = {name[len(prefix):]: v for name, v in values.items() if name.startswith(prefix)}
            out = gln_block(H, A, GlnLayerParams.from_named(entries, k))
            H, A = out.H_local, out.A_next
        return total_loss(A, A_true, weights, values).total

    errors = check_gradients(loss, model.parameters(), h=1e-6)
    assert max(errors.values()) <= 1e-4


def test_tape_forward_exposes_every_parameter_as_leaf():
    model = init_model([2, 3, 3], n=4, k=2)
    result = forward(model, np.ones((4, 2)), tape=Tape())
    assert set(result.leaves) == set(model.parameters())


def test_binarize_is_strict_and_zeroes_diagonal():
    A = np.array([[0.9, 0.5, 0.51], [0.5, 0.9, 0.2], [0.51, 0.2, 0.9]])
    expected = np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0]], dtype=np.int8)
    np.testing.assert_array_equal(binarize(A, 0.5), expected)


def test_init_is_seeded_and_m_is_near_identity():
    a = init_model([2, 4, 4], n=5, k=3, seed=9)
    b = init_model([2, 4, 4], n=5, k=3, seed=9)
    for name, value in a.parameters().items():
        np.testing.assert_array_equal(value, b.parameters()[name])
    for layer in a.layers:
        assert np.max(np.abs(layer.M - np.eye(5))) <= 0.01
        assert len(layer.W) == 3


def test_model_rejects_bad_epsilon():
    with pytest.raises(ConfigError):
        init_model([2, 4], n=3, epsilon=1.0)


def test_checkpoint_round_trip_is_bit_exact(tmp_path):
    model = init_model([3, 4, 4], n=6, k=2, epsilon=0.4, seed=5)
    path = save_checkpoint(model, str(tmp_path / "model.json"))
    loaded = load_checkpoint(path)
    assert loaded.dims == model.dims and loaded.k == model.k and loaded.epsilon == 0.4
    for name, value in model.parameters().items():
        np.testing.assert_array_equal(loaded.parameters()[name], value)


def test_checkpoint_version_mismatch_is_rejected(tmp_path):
    path = save_checkpoint(init_model([2, 3], n=3), str(tmp_path / "model.json"))
    with open(path) as f:
        doc = json.load(f)
    doc["format_version"] = 99
    with open(path, "w") as f:
        json.dump(doc, f)
    with pytest.raises(ConfigError):
        load_checkpoint(path)
