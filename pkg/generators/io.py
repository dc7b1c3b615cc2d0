"""
Dataset files: one JSON object per line, one line per sample.

    {"family": ..., "variant": ..., "n": ..., "d": ..., "seed": ...,
     "features": [row-major floats], "edges": [[i, j], ...]}   (i < j)
"""

import hashlib
import json
import os
from typing import Iterable, List

import numpy as np

from generators.sample import GraphSample, adjacency_from_edges, edge_list
from utility.errors import DatasetError


def sample_to_record(sample: GraphSample) -> dict:
    return {
        "family": sample.family,
        "variant": sample.variant,
        "n": sample.n,
        "d": sample.d,
        "features": sample.features.ravel().tolist(),
        "edges": [list(pair) for pair in edge_list(sample.adjacency)],
        "seed": sample.seed,
    }


def sample_from_record(record: dict) -> GraphSample:
    try:
        n, d = int(record["n"]), int(record["d"])
        features = np.array(record["features"], dtype=np.float64)
        if features.size != n * d:
            raise DatasetError(f"record holds {features.size} feature values, expected {n} x {d}")
        return GraphSample(
            features=features.reshape(n, d),
            adjacency=adjacency_from_edges(n, record["edges"]),
            family=record["family"],
            variant=record.get("variant", ""),
            seed=record.get("seed"),
        )
    except KeyError as e:
        raise DatasetError(f"dataset record is missing field {e}") from e


def write_dataset(samples: Iterable[GraphSample], path: str) -> str:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w") as f:
        for sample in samples:
            f.write(json.dumps(sample_to_record(sample)))
            f.write("\n")
    return path


def read_dataset(path: str) -> List[GraphSample]:
    samples = []
    with open(path) as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetError(f"{path}:{line_number}: {e}") from e
            samples.append(sample_from_record(record))
    return samples


def dataset_summary(samples: List[GraphSample]) -> dict:
    """Sample count, node count, feature width and mean edge density."""
    if not samples:
        return {"samples": 0, "n": None, "d": None, "mean_edge_density": None}
    densities = [
        s.edge_count / (s.n * (s.n - 1) / 2) if s.n > 1 else 0.0
        for s in samples
    ]
    node_counts = sorted({s.n for s in samples})
    widths = sorted({s.d for s in samples})
    return {
        "samples": len(samples),
        "n": node_counts[0] if len(node_counts) == 1 else node_counts,
        "d": widths[0] if len(widths) == 1 else widths,
        "mean_edge_density": float(np.mean(densities)),
    }


def content_hash(path: str) -> str:
    """Git blob hash of a file's bytes."""
    with open(path, "rb") as f:
        data = f.read()
    header = f"blob {len(data)}\0".encode()
    return hashlib.sha1(header + data).hexdigest()
