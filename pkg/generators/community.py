"""
Community graphs from the relaxed caveman construction.

C cliques of 20 nodes each. Every intra-clique edge is rewired with
probability p_rewire: one endpoint is kept, the other is replaced by a
uniformly chosen node outside the clique that is not already a neighbour.
When p_rewire > 0 each clique gets at least one rewire so the communities
are connected. Rewiring moves edges, it never adds any.
"""

from dataclasses import dataclass
from typing import Optional

import networkx as nx
import numpy as np

from generators.sample import GraphSample
from utility.errors import ConfigError


COMMUNITY_SIZE = 20
SAMPLE_COUNTS = {2: 300, 4: 500}
FEATURE_MODES = ("blobs", "noise")


@dataclass
class CommunitySpec:
    C: int = 2
    num_samples: Optional[int] = None
    p_rewire: float = 0.05
    feature_mode: str = "blobs"
    blob_radius: float = 5.0
    blob_std: float = 0.5

    def __post_init__(self):
        if self.C not in SAMPLE_COUNTS:
            raise ConfigError(f"community count must be one of {sorted(SAMPLE_COUNTS)}, got {self.C}")
        if not 0.0 <= self.p_rewire <= 1.0:
            raise ConfigError(f"p_rewire must lie in [0, 1], got {self.p_rewire}")
        if self.feature_mode not in FEATURE_MODES:
            raise ConfigError(f"feature_mode must be one of {FEATURE_MODES}, got {self.feature_mode!r}")

    @property
    def n(self) -> int:
        return COMMUNITY_SIZE * self.C

    @property
    def sample_count(self) -> int:
        return self.num_samples if self.num_samples is not None else SAMPLE_COUNTS[self.C]


def _rewire(G: nx.Graph, u: int, v: int, rng: np.random.Generator) -> bool:
    clique = u // COMMUNITY_SIZE
    candidates = [
        w for w in range(G.number_of_nodes())
        if w // COMMUNITY_SIZE != clique and not G.has_edge(u, w)
    ]
    if not candidates:
        return False
    w = candidates[rng.integers(len(candidates))]
    G.remove_edge(u, v)
    G.add_edge(u, w)
    return True


def relaxed_caveman(C: int, p_rewire: float, rng: np.random.Generator) -> nx.Graph:
    G = nx.caveman_graph(C, COMMUNITY_SIZE)
    if p_rewire <= 0:
        return G

    rewired = [0] * C
    for u, v in sorted(G.edges()):
        if rng.random() < p_rewire and _rewire(G, u, v, rng):
            rewired[u // COMMUNITY_SIZE] += 1

    for clique in range(C):
        if rewired[clique]:
            continue
        intra = [
            (u, v) for u, v in sorted(G.edges())
            if u // COMMUNITY_SIZE == clique and v // COMMUNITY_SIZE == clique
        ]
        if intra:
            u, v = intra[rng.integers(len(intra))]
            _rewire(G, u, v, rng)
    return G


def community_features(spec: CommunitySpec, rng: np.random.Generator) -> np.ndarray:
    if spec.feature_mode == "noise":
        return rng.standard_normal((spec.n, 2))
    angles = 2.0 * np.pi * np.arange(spec.C) / spec.C
    centers = spec.blob_radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    membership = np.arange(spec.n) // COMMUNITY_SIZE
    return centers[membership] + rng.normal(0.0, spec.blob_std, size=(spec.n, 2))


def gen_community(spec: CommunitySpec, seed: int = 0) -> GraphSample:
    rng = np.random.default_rng(seed)
    G = relaxed_caveman(spec.C, spec.p_rewire, rng)
    adjacency = nx.to_numpy_array(G, nodelist=range(spec.n), dtype=np.int8)
    return GraphSample(
        features=community_features(spec, rng),
        adjacency=adjacency,
        family="community",
        variant=f"C{spec.C}",
        seed=seed,
    )
