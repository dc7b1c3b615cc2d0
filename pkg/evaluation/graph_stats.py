"""
Per-graph statistics compared by the MMD evaluation: degree histogram,
clustering-coefficient histogram and graphlet orbit counts.

Orbits follow the usual numbering for connected graphlets on 2-4 nodes:

    0        edge
    1, 2     3-path: end, middle
    3        triangle
    4, 5     4-path: end, middle
    6, 7     3-star: leaf, centre
    8        4-cycle
    9-11     tailed triangle: tail, degree-2, degree-3
    12, 13   diamond: degree-2, degree-3
    14       4-clique
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence

import networkx as nx
import numpy as np
from tqdm import tqdm


ORBIT_COUNT = 15
CLUSTERING_BINS = 100


@dataclass
class GraphStats:
    degree_hist: np.ndarray
    clustering_hist: np.ndarray
    orbit_counts: np.ndarray

    @property
    def orbit_mean(self) -> np.ndarray:
        if self.orbit_counts.shape[0] == 0:
            return np.zeros(ORBIT_COUNT)
        return self.orbit_counts.mean(axis=0)


def to_graph(A) -> nx.Graph:
    A = np.asarray(A)
    G = nx.Graph()
    G.add_nodes_from(range(A.shape[0]))
    rows, cols = np.nonzero(np.triu(A, k=1))
    G.add_edges_from(zip(rows.tolist(), cols.tolist()))
    return G


def degree_histogram(A) -> np.ndarray:
    """Fraction of nodes with degree 0 .. n-1."""
    n = np.shape(A)[0]
    hist = np.zeros(max(n, 1))
    if n == 0:
        return hist
    counts = nx.degree_histogram(to_graph(A))
    hist[:len(counts)] = counts
    return hist / n


def clustering_histogram(A, bins: int = CLUSTERING_BINS) -> np.ndarray:
    """Fraction of nodes per clustering-coefficient bin on [0, 1]."""
    n = np.shape(A)[0]
    if n == 0:
        return np.zeros(bins)
    coefficients = list(nx.clustering(to_graph(A)).values())
    counts, _ = np.histogram(coefficients, bins=bins, range=(0.0, 1.0))
    return counts / n


def _clique4_counts(A: np.ndarray) -> np.ndarray:
    """4-cliques through each node: triangles inside its neighbourhood."""
    counts = np.zeros(A.shape[0])
    for x in range(A.shape[0]):
        nb = np.flatnonzero(A[x])
        if len(nb) >= 3:
            sub = A[np.ix_(nb, nb)]
            counts[x] = np.sum((sub @ sub) * sub) / 6.0
    return counts


def orbit_counts(A) -> np.ndarray:
    """
    n x 15 matrix: how often each node occupies each graphlet orbit.

    Orbits 0-3 follow from degrees and common-neighbour counts. The 4-node
    orbits solve the per-node linear system that ties them to the 4-clique
    count and to sums over neighbour pairs (the ORCA equations); each sum is
    a dense matrix expression, so the cost is a few n x n products plus one
    small product per node for the cliques.
    """
    A = (np.asarray(A) != 0).astype(np.float64)
    n = A.shape[0]
    counts = np.zeros((n, ORBIT_COUNT), dtype=np.int64)
    if n == 0:
        return counts
    np.fill_diagonal(A, 0.0)

    deg = A.sum(axis=1)
    d_x = deg[:, None]
    d_y = deg[None, :]
    common = A @ A
    tri = common * A
    apart = 1.0 - A - np.eye(n)
    open_x = A * (d_x - 1.0 - tri)
    open_y = A * (d_y - 1.0 - tri)

    f_14 = _clique4_counts(A)
    f_12_14 = 0.5 * ((A @ (A * (common - 1.0))) * A).sum(axis=1)
    f_10_13 = 0.5 * ((A @ (A * (d_x + d_y - 2.0 - 2.0 * common))) * A).sum(axis=1)
    f_13_14 = (tri * (tri - 1.0)).sum(axis=1)
    f_11_13 = (tri * open_x).sum(axis=1)
    f_7_11 = (open_x * (d_x - 2.0 - tri)).sum(axis=1)
    f_5_8 = (open_x * (d_y - 1.0 - tri)).sum(axis=1)
    f_6_9 = (open_y * (d_y - 2.0 - tri)).sum(axis=1)
    f_9_12 = ((A @ tri) * apart).sum(axis=1)
    f_4_8 = ((A @ open_y) * apart).sum(axis=1)
    f_8_12 = (apart * common * (common - 1.0)).sum(axis=1)

    orbits = np.stack([
        deg,
        (apart * common).sum(axis=1),
        open_x.sum(axis=1) / 2.0,
        tri.sum(axis=1) / 2.0,
        2.0 * f_12_14 + f_4_8 - f_8_12 - 6.0 * f_14,
        2.0 * f_12_14 + f_5_8 - f_8_12 - 6.0 * f_14,
        (2.0 * f_12_14 + f_6_9 - f_9_12 - 6.0 * f_14) / 2.0,
        (f_13_14 + f_7_11 - f_11_13 - 6.0 * f_14) / 6.0,
        (f_8_12 - 2.0 * f_12_14 + 6.0 * f_14) / 2.0,
        (f_9_12 - 2.0 * f_12_14 + 6.0 * f_14) / 2.0,
        f_10_13 - f_13_14 + 6.0 * f_14,
        (f_11_13 - f_13_14 + 6.0 * f_14) / 2.0,
        f_12_14 - 3.0 * f_14,
        (f_13_14 - 6.0 * f_14) / 2.0,
        f_14,
    ], axis=1)
    counts[:] = np.rint(orbits).astype(np.int64)
    return counts


def graph_stats(A) -> GraphStats:
    return GraphStats(
        degree_hist=degree_histogram(A),
        clustering_hist=clustering_histogram(A),
        orbit_counts=orbit_counts(A),
    )


def compute_graph_stats(adjacencies: Sequence, workers: int = 1, progress: bool = False,
                        desc: str = "  Graph statistics") -> List[GraphStats]:
    """Statistics for many graphs, in input order."""
    if workers <= 1:
        return [graph_stats(A) for A in tqdm(adjacencies, desc=desc, disable=not progress)]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(tqdm(executor.map(graph_stats, adjacencies), total=len(adjacencies),
                         desc=desc, disable=not progress))
