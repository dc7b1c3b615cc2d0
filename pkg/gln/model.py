"""
Parameter containers for the recurrent graph learning block.

Parameters live as plain float64 arrays; ``GlnModel.parameters()`` exposes
them under stable dotted names (``layers.0.W.1``, ``layers.0.M``, ...) so
the optimizer and the checkpoint writer never need to know the layout.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from utility.errors import ConfigError, DimensionError


DEFAULT_ACTIVATIONS = {
    "conv": "sigmoid",
    "local": "sigmoid",
    "global": "tanh",
    "adjacency": "sigmoid",
}
ALLOWED_ACTIVATIONS = ("sigmoid", "tanh", "identity")


@dataclass
class GlnLayerParams:
    """Weights of one recurrent step. Entries are arrays, or tape values while bound."""

    W: List[Any]
    U: Any
    Z: Any
    Q: Any
    M: Any

    @property
    def k(self) -> int:
        return len(self.W)

    def named(self) -> Dict[str, Any]:
        entries = {f"W.{i}": w for i, w in enumerate(self.W)}
        entries.update({"U": self.U, "Z": self.Z, "Q": self.Q, "M": self.M})
        return entries

    @classmethod
    def from_named(cls, entries: Dict[str, Any], k: int) -> "GlnLayerParams":
        return cls(
            W=[entries[f"W.{i}"] for i in range(k)],
            U=entries["U"],
            Z=entries["Z"],
            Q=entries["Q"],
            M=entries["M"],
        )

    def check_shapes(self, d_in: int, d_out: int, n: int):
        if self.k < 1:
            raise ConfigError("a layer needs at least one convolution kernel")
        expected = {f"W.{i}": (d_in, d_out) for i in range(self.k)}
        expected.update({"U": (d_out, d_out), "Z": (d_out, d_out), "Q": (d_out, d_out), "M": (n, n)})
        for key, matrix in self.named().items():
            shape = np.shape(getattr(matrix, "value", matrix))
            if tuple(shape) != expected[key]:
                raise DimensionError(f"parameter {key} has shape {tuple(shape)}, expected {expected[key]}")


@dataclass
class GlnModel:
    layers: List[GlnLayerParams]
    dims: List[int]
    n: int
    k: int
    epsilon: float = 0.5
    activations: Dict[str, str] = field(default_factory=lambda: dict(DEFAULT_ACTIVATIONS))

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"binarization threshold must lie in (0, 1), got {self.epsilon}")
        if len(self.dims) != len(self.layers) + 1:
            raise ConfigError(f"{len(self.layers)} layers need {len(self.layers) + 1} dims, got {self.dims}")
        for role, name in self.activations.items():
            if role not in DEFAULT_ACTIVATIONS or name not in ALLOWED_ACTIVATIONS:
                raise ConfigError(f"unsupported activation {role}={name}")
        for l, layer in enumerate(self.layers):
            if layer.k != self.k:
                raise ConfigError(f"layer {l} has {layer.k} kernels, model declares k={self.k}")
            layer.check_shapes(self.dims[l], self.dims[l + 1], self.n)

    @property
    def L(self) -> int:
        return len(self.layers)

    def parameters(self) -> Dict[str, np.ndarray]:
        params = {}
        for l, layer in enumerate(self.layers):
            for key, matrix in layer.named().items():
                params[f"layers.{l}.{key}"] = matrix
        return params

    def with_parameters(self, params: Dict[str, np.ndarray]) -> "GlnModel":
        """New model with the same structure and the given parameter values."""
        layers = []
        for l in range(self.L):
            prefix = f"layers.{l}."
            entries = {name[len(prefix):]: value for name, value in params.items() if name.startswith(prefix)}
            layers.append(GlnLayerParams.from_named(entries, self.k))
        return GlnModel(layers, list(self.dims), self.n, self.k, self.epsilon, dict(self.activations))


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_model(dims: Sequence[int], n: int, k: int = 3, epsilon: float = 0.5,
               seed: int = 0, activations: Optional[Dict[str, str]] = None) -> GlnModel:
    """
    Fresh model with Glorot-uniform W, U, Z, Q and near-identity M.

    Parameters:
        dims: [d_0, d_1, ..., d_L]
        n: node count the model is tied to
        k: convolution kernels per layer
        epsilon: binarization threshold
        seed: init seed; draws happen layer by layer in W, U, Z, Q, M order
    """
    rng = np.random.default_rng(seed)
    layers = []
    for l in range(len(dims) - 1):
        d_in, d_out = dims[l], dims[l + 1]
        W = [glorot_uniform(rng, d_in, d_out) for _ in range(k)]
        U = glorot_uniform(rng, d_out, d_out)
        Z = glorot_uniform(rng, d_out, d_out)
        Q = glorot_uniform(rng, d_out, d_out)
        M = np.eye(n) + rng.uniform(-0.01, 0.01, size=(n, n))
        layers.append(GlnLayerParams(W=W, U=U, Z=Z, Q=Q, M=M))
    return GlnModel(
        layers=layers,
        dims=list(dims),
        n=n,
        k=k,
        epsilon=epsilon,
        activations=dict(activations or DEFAULT_ACTIVATIONS),
    )


def model_dims(d0: int, hidden: int, L: int) -> List[int]:
    return [d0] + [hidden] * L
