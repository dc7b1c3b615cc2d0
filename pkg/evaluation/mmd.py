import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from evaluation.graph_stats import GraphStats, compute_graph_stats
from utility.errors import ContractError


DEFAULT_SIGMA = 1.0


@dataclass
class MmdReport:
    degree_mmd: float
    clustering_mmd: float
    orbit_mmd: float
    size_a: int
    size_b: int
    sigma: Dict[str, float] = field(default_factory=dict)

    def as_row(self) -> dict:
        return {
            "degree_mmd": self.degree_mmd,
            "clustering_mmd": self.clustering_mmd,
            "orbit_mmd": self.orbit_mmd,
        }


def pad_histograms(histograms: Sequence[np.ndarray]) -> list:
    width = max(len(h) for h in histograms)
    return [np.pad(np.asarray(h, dtype=np.float64), (0, width - len(h))) for h in histograms]


def emd_1d(p, q) -> float:
    """First Wasserstein distance between histograms on 0, 1, 2, ... (unit bins)."""
    p, q = pad_histograms([p, q])
    return float(np.sum(np.abs(np.cumsum(p) - np.cumsum(q))))


def euclidean(x, y) -> float:
    return float(np.linalg.norm(np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)))


def gaussian_kernel(distance: Callable, sigma: float) -> Callable:
    def kernel(x, y):
        d = distance(x, y)
        return math.exp(-d * d / (2.0 * sigma * sigma))
    return kernel


def _mean_kernel(kernel, xs, ys) -> float:
    values = [kernel(x, y) for x in xs for y in ys]
    return math.fsum(values) / len(values)


def mmd(set_a: Sequence, set_b: Sequence, sigma: float = DEFAULT_SIGMA,
        distance: Callable = emd_1d) -> float:
    """
    Biased squared MMD with a Gaussian kernel over ``distance``.

    Kernel means use exactly rounded sums, so the result does not depend on
    argument order.
    """
    if not set_a or not set_b:
        raise ContractError("mmd needs two nonempty descriptor sets")
    if sigma <= 0:
        raise ContractError(f"kernel bandwidth must be positive, got {sigma}")
    kernel = gaussian_kernel(distance, sigma)
    value = _mean_kernel(kernel, set_a, set_a) + _mean_kernel(kernel, set_b, set_b) \
        - 2.0 * _mean_kernel(kernel, set_a, set_b)
    return max(value, 0.0)


def mmd_from_stats(stats_a: Sequence[GraphStats], stats_b: Sequence[GraphStats],
                   sigma: float = DEFAULT_SIGMA, sigmas: Optional[Dict[str, float]] = None) -> MmdReport:
    bandwidth = {"degree": sigma, "clustering": sigma, "orbit": sigma}
    bandwidth.update(sigmas or {})

    degrees = pad_histograms([s.degree_hist for s in stats_a] + [s.degree_hist for s in stats_b])
    degrees_a, degrees_b = degrees[:len(stats_a)], degrees[len(stats_a):]

    return MmdReport(
        degree_mmd=mmd(degrees_a, degrees_b, bandwidth["degree"], emd_1d),
        clustering_mmd=mmd([s.clustering_hist for s in stats_a], [s.clustering_hist for s in stats_b],
                           bandwidth["clustering"], emd_1d),
        orbit_mmd=mmd([s.orbit_mean for s in stats_a], [s.orbit_mean for s in stats_b],
                      bandwidth["orbit"], euclidean),
        size_a=len(stats_a),
        size_b=len(stats_b),
        sigma=bandwidth,
    )


def mmd_report(graphs_a: Sequence, graphs_b: Sequence, sigma: float = DEFAULT_SIGMA,
               sigmas: Optional[Dict[str, float]] = None, workers: int = 1,
               progress: bool = False) -> MmdReport:
    """Degree, clustering and orbit MMD^2 between two sets of adjacency matrices."""
    stats_a = compute_graph_stats(graphs_a, workers, progress, desc="  Statistics (predicted)")
    stats_b = compute_graph_stats(graphs_b, workers, progress, desc="  Statistics (reference)")
    return mmd_from_stats(stats_a, stats_b, sigma, sigmas)
