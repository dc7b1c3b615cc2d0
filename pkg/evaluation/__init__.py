from evaluation.graph_stats import (
    ORBIT_COUNT,
    GraphStats,
    clustering_histogram,
    compute_graph_stats,
    degree_histogram,
    graph_stats,
    orbit_counts,
)
from evaluation.mmd import MmdReport, emd_1d, euclidean, mmd, mmd_from_stats, mmd_report
from evaluation.edge_metrics import EdgeClassReport, aggregate_edge_reports, edge_class_metrics
