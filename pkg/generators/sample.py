from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from utility.errors import ContractError, DatasetError


@dataclass
class GraphSample:
    """Node features plus the binary ground-truth adjacency they should predict."""

    features: np.ndarray
    adjacency: np.ndarray
    family: str
    variant: str = ""
    seed: Optional[int] = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.adjacency = np.asarray(self.adjacency, dtype=np.int8)
        check_adjacency(self.adjacency)
        if self.features.ndim != 2 or self.features.shape[0] != self.adjacency.shape[0]:
            raise DatasetError(
                f"features of shape {self.features.shape} do not match {self.adjacency.shape[0]} nodes"
            )
        if not np.all(np.isfinite(self.features)):
            raise DatasetError("features contain NaN or Inf")

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def edge_count(self) -> int:
        return int(np.triu(self.adjacency, k=1).sum())


def check_adjacency(adjacency: np.ndarray):
    """Symmetric, binary, zero diagonal."""
    if adjacency.ndim != 2 or adjacency.shape[0] != adjacency.shape[1]:
        raise DatasetError(f"adjacency must be square, got shape {adjacency.shape}")
    if not np.all((adjacency == 0) | (adjacency == 1)):
        raise DatasetError("adjacency must be binary")
    if not np.array_equal(adjacency, adjacency.T):
        raise DatasetError("adjacency must be symmetric")
    if np.any(np.diag(adjacency)):
        raise DatasetError("adjacency must have a zero diagonal")


def adjacency_from_edges(n: int, edges) -> np.ndarray:
    adjacency = np.zeros((n, n), dtype=np.int8)
    for i, j in edges:
        if i == j:
            continue
        adjacency[i, j] = 1
        adjacency[j, i] = 1
    return adjacency


def edge_list(adjacency: np.ndarray) -> List[Tuple[int, int]]:
    rows, cols = np.nonzero(np.triu(adjacency, k=1))
    return [(int(i), int(j)) for i, j in zip(rows, cols)]


def split_dataset(samples: Sequence, train_fraction: float = 0.8, seed: int = 0):
    """
    Seeded shuffle, then split into disjoint train/test lists.

    Both parts get at least one sample.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ContractError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    if len(samples) < 2:
        raise DatasetError(f"need at least 2 samples to split, got {len(samples)}")
    order = np.random.default_rng(seed).permutation(len(samples))
    n_train = int(np.floor(train_fraction * len(samples) + 1e-9))
    n_train = min(max(n_train, 1), len(samples) - 1)
    train = [samples[i] for i in order[:n_train]]
    test = [samples[i] for i in order[n_train:]]
    return train, test


def make_initial_adjacency(n: int, mode: str = "identity", p: float = 0.0,
                           seed: Optional[int] = None) -> np.ndarray:
    """
    Starting adjacency for the recurrent chain.

    Parameters:
        n: node count
        mode: "identity", or "random_proportion" to switch on
            floor(p * n(n-1)/2) distinct random pairs on top of the identity
        p: proportion of all possible pairs, in [0, 1]
        seed: pair-selection seed

    Returns:
        n x n float matrix
    """
    A = np.eye(n)
    if mode == "identity":
        return A
    if mode != "random_proportion":
        raise ContractError(f"unknown initial adjacency mode {mode!r}")
    if not 0.0 <= p <= 1.0:
        raise ContractError(f"proportion must lie in [0, 1], got {p}")

    rows, cols = np.triu_indices(n, k=1)
    count = int(np.floor(p * len(rows) + 1e-9))
    chosen = np.random.default_rng(seed).choice(len(rows), size=count, replace=False)
    A[rows[chosen], cols[chosen]] = 1.0
    A[cols[chosen], rows[chosen]] = 1.0
    return A
