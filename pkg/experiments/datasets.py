"""
Builds the sample list for a dataset config.

Every sample gets its own seed spawned from the data seed, so a dataset is
the same regardless of how many worker threads generate it.
"""

from concurrent.futures import ThreadPoolExecutor, as_completed
from functools import partial
from typing import Callable, List, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from experiments.settings import DatasetConfig
from generators.community import CommunitySpec, gen_community
from generators.figures import FigureImageSpec, gen_figure_image
from generators.sample import GraphSample, split_dataset
from generators.surfaces import SURFACE_KINDS, gen_surface, surface_spec_for
from utility.errors import ConfigError


def sample_seeds(base, count: int) -> List[int]:
    """``count`` independent 32-bit seeds derived from ``base``."""
    return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(base).spawn(count)]


def generation_jobs(dataset: DatasetConfig, seed: int) -> List[Tuple[Callable, int]]:
    """(generator, seed) pairs in dataset order."""
    count = dataset.num_samples
    if dataset.family == "community":
        spec = CommunitySpec(
            C=dataset.communities,
            num_samples=count,
            p_rewire=dataset.p_rewire,
            feature_mode=dataset.feature_mode,
        )
        return [(partial(gen_community, spec), s) for s in sample_seeds(seed, spec.sample_count)]

    if dataset.family == "surface":
        kinds = SURFACE_KINDS if dataset.surface_kind == "mixed" else (dataset.surface_kind,)
        jobs = []
        for position, kind in enumerate(SURFACE_KINDS):
            if kind not in kinds:
                continue
            spec = surface_spec_for(kind, dataset.surface_nodes)
            jobs += [(partial(gen_surface, spec), s) for s in sample_seeds([seed, position], count)]
        return jobs

    if dataset.family == "figures":
        spec = FigureImageSpec(side=dataset.image_side, noise_std=dataset.noise_std, num_samples=count)
        return [(partial(gen_figure_image, spec), s) for s in sample_seeds(seed, count)]

    raise ConfigError(f"unknown dataset family {dataset.family!r}")


def build_samples(dataset: DatasetConfig, seed: int, workers: int = 1,
                  progress: bool = True) -> List[GraphSample]:
    """
    Generate every sample of a resolved dataset config.

    Parameters:
        dataset: resolved dataset section
        seed: data seed
        workers: generator threads
        progress: show a tqdm bar

    Returns:
        samples in generation order
    """
    jobs = generation_jobs(dataset, seed)
    samples = [None] * len(jobs)
    desc = f"  Generating {dataset.family}"

    if workers <= 1:
        for index, (make, s) in enumerate(tqdm(jobs, desc=desc, disable=not progress)):
            samples[index] = make(s)
        return samples

    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(make, s): index for index, (make, s) in enumerate(jobs)}
        for future in tqdm(as_completed(futures), total=len(futures), desc=desc, disable=not progress):
            samples[futures[future]] = future.result()
    return samples


def train_test_split(samples: Sequence[GraphSample], dataset: DatasetConfig, seed: int):
    """
    Seeded split; the training part is capped at ``max_train_samples`` when
    that is positive.
    """
    node_counts = {s.n for s in samples}
    if len(node_counts) > 1:
        raise ConfigError(f"a model is tied to one node count; dataset mixes {sorted(node_counts)}")
    train, test = split_dataset(samples, dataset.train_fraction, seed)
    if dataset.max_train_samples and len(train) > dataset.max_train_samples:
        train = train[:dataset.max_train_samples]
    return train, test
