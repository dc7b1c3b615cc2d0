"""
Command bodies behind ``main.py``.

Each command takes a resolved ExperimentConfig plus its own inputs, writes
CSV / NDJSON / JSON under ``<output_dir>/runs/<dataset>/<command>`` (datasets
under ``<output_dir>/data``) and returns the RunManifest it saved.
"""

import json
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import replace
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from config import DATA_SUBDIR, RUNS_SUBDIR
from experiments.datasets import build_samples, sample_seeds, train_test_split
from experiments.manifest import RunManifest, load_manifest, save_manifest
from experiments.pipeline import Evaluation, evaluate, fit, gaussian_features, untrained_like, with_loss
from experiments.settings import ExperimentConfig, config_from_dict, config_to_dict, dataset_name, save_config
from generators.io import content_hash, dataset_summary, read_dataset, write_dataset
from generators.sample import make_initial_adjacency
from gln.block import binarize, predict
from gln.checkpoint import load_checkpoint, save_checkpoint
from gln.model import GlnModel
from training.trainer import save_loss_trace
from utility.errors import ConfigError, DatasetError
from utility.tables import flatten_to_row_level, variant_slug, write_csv


REPORT_COLUMNS = ["degree_mmd", "clustering_mmd", "orbit_mmd", "acc", "iou", "dice", "precision", "recall"]

# (name, psi1 for the edge-class term, psi2 for the dice term, weight decay on)
ABLATION_VARIANTS = [
    ("HED", 1.0, 0.0, False),
    ("HED+Reg", 1.0, 0.0, True),
    ("IoU", 0.0, 1.0, False),
    ("IoU+Reg", 0.0, 1.0, True),
    ("IoU+HED", 1.0, 1.0, False),
    ("IoU+HED+Reg", 1.0, 1.0, True),
]


def dataset_path(cfg: ExperimentConfig) -> str:
    return os.path.join(cfg.output_dir, DATA_SUBDIR, f"{dataset_name(cfg.dataset)}.ndjson")


def run_dir(cfg: ExperimentConfig, command: str, *parts: str) -> str:
    return os.path.join(cfg.output_dir, RUNS_SUBDIR, dataset_name(cfg.dataset), command, *parts)


def report_row(evaluation: Evaluation) -> dict:
    agg = evaluation.aggregate
    row = evaluation.mmd.as_row()
    row.update(acc=agg.accuracy, iou=agg.iou, dice=agg.dice, precision=agg.precision, recall=agg.recall)
    return row


def load_inputs(dataset: Optional[str], cfg: ExperimentConfig, manifest: RunManifest):
    path = dataset or dataset_path(cfg)
    if not os.path.exists(path):
        raise DatasetError(f"dataset {path} not found; run the gen command first")
    manifest.record_dataset(path)
    samples = read_dataset(path)
    if not samples:
        raise DatasetError(f"dataset {path} holds no samples")
    return path, samples


def check_model_fits(model: GlnModel, samples: Sequence):
    sample = samples[0]
    if (sample.n, sample.d) != (model.n, model.dims[0]):
        raise ConfigError(
            f"checkpoint expects n={model.n}, d={model.dims[0]}; dataset has n={sample.n}, d={sample.d}"
        )


def run_cells(keys: Sequence, cell: Callable, workers: int, desc: str, progress: bool) -> list:
    """Run independent sweep cells, results in the order of ``keys``."""
    results = {}
    if workers <= 1:
        for key in tqdm(keys, desc=desc, disable=not progress):
            results[key] = cell(key)
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(cell, key): key for key in keys}
            for future in tqdm(as_completed(futures), total=len(futures), desc=desc, disable=not progress):
                results[futures[future]] = future.result()
    return [results[key] for key in keys]


def finish(manifest: RunManifest, cfg: ExperimentConfig, out_dir: str) -> RunManifest:
    save_config(cfg, os.path.join(out_dir, "config.toml"))
    save_manifest(manifest, out_dir)
    print(f"  Manifest: {manifest.manifest_path}")
    return manifest


def cmd_gen(cfg: ExperimentConfig, progress: bool = True) -> RunManifest:
    """Generate the configured dataset and write it with a summary."""
    manifest = RunManifest("gen", config_to_dict(cfg))
    samples = build_samples(cfg.dataset, cfg.seeds.data_seed, cfg.workers, progress)

    path = write_dataset(samples, dataset_path(cfg))
    summary = dataset_summary(samples)
    summary_path = path.replace(".ndjson", "_summary.json")
    with open(summary_path, "w") as f:
        json.dump(summary, f, indent=2)

    manifest.record_dataset(path)
    manifest.metric_paths.append(summary_path)
    print(f"  Samples written: {summary['samples']} (n={summary['n']}, d={summary['d']})")
    print(f"  Mean edge density: {summary['mean_edge_density']:.4f}")
    print(f"  Dataset: {path}")
    return finish(manifest, cfg, run_dir(cfg, "gen"))


def cmd_train(cfg: ExperimentConfig, dataset: Optional[str] = None, progress: bool = True) -> RunManifest:
    """Train on the training split; writes the checkpoint and loss trace."""
    manifest = RunManifest("train", config_to_dict(cfg))
    path, samples = load_inputs(dataset, cfg, manifest)
    manifest.inputs = {"dataset": path}
    train, test = train_test_split(samples, cfg.dataset, cfg.seeds.data_seed)
    print(f"  Train / test samples: {len(train)} / {len(test)}")

    result = fit(cfg, train, progress=progress)
    out_dir = run_dir(cfg, "train")
    manifest.checkpoint_paths.append(save_checkpoint(result.model, os.path.join(out_dir, "checkpoint.json")))
    manifest.metric_paths.append(save_loss_trace(result.trace, os.path.join(out_dir, "loss_trace.csv")))
    if result.trace:
        print(f"  Final epoch loss: {result.trace[-1].mean_total:.6f}")
    print(f"  Checkpoint: {manifest.checkpoint_paths[0]}")
    return finish(manifest, cfg, out_dir)


def cmd_eval(cfg: ExperimentConfig, checkpoint: str, dataset: Optional[str] = None,
             split: str = "test", baseline: bool = False, noise_features: bool = False,
             progress: bool = True) -> RunManifest:
    """
    Score a checkpoint on the test split (or every sample).

    Parameters:
        checkpoint: path to a checkpoint JSON
        dataset: dataset path (defaults to the configured dataset)
        split: "test" or "all"
        baseline: add a row for a freshly initialised model of the checkpoint's shape
        noise_features: add a row scoring the trained model on seeded Gaussian
            noise features instead of the samples' own
    """
    if split not in ("test", "all"):
        raise ConfigError(f"split must be 'test' or 'all', got {split!r}")
    manifest = RunManifest("eval", config_to_dict(cfg))
    path, samples = load_inputs(dataset, cfg, manifest)
    manifest.inputs = {"checkpoint": checkpoint, "dataset": path, "split": split,
                       "baseline": baseline, "noise_features": noise_features}

    model = load_checkpoint(checkpoint)
    check_model_fits(model, samples)
    chosen = samples if split == "all" else train_test_split(samples, cfg.dataset, cfg.seeds.data_seed)[1]

    sigma, workers = cfg.evaluation.sigma, cfg.workers
    evaluation = evaluate(model, chosen, sigma, workers, progress=progress)
    rows = [dict(model="trained", **report_row(evaluation))]
    if baseline:
        untrained = untrained_like(model, cfg.seeds.init_seed)
        rows.append(dict(model="untrained", **report_row(evaluate(untrained, chosen, sigma, workers, progress=progress))))
    if noise_features:
        noisy = evaluate(model, chosen, sigma, workers, noise_seed=cfg.seeds.data_seed, progress=progress)
        rows.append(dict(model="trained_noise", **report_row(noisy)))

    out_dir = run_dir(cfg, "eval")
    manifest.metric_paths += [
        write_csv(pd.DataFrame(rows, columns=["model"] + REPORT_COLUMNS), os.path.join(out_dir, "report.csv")),
        write_csv(evaluation.per_sample_frame(), os.path.join(out_dir, "per_sample.csv")),
    ]
    for row in rows:
        print(f"  [{row['model']}] acc={row['acc']:.4f} iou={row['iou']:.4f} "
              f"deg={row['degree_mmd']:.6f} clus={row['clustering_mmd']:.6f} orb={row['orbit_mmd']:.6f}")
    return finish(manifest, cfg, out_dir)


def cmd_depth_sweep(cfg: ExperimentConfig, dataset: Optional[str] = None,
                    L_values: Optional[List[int]] = None, progress: bool = True) -> RunManifest:
    """One model per recurrent depth, same seeds; one CSV row per depth."""
    L_values = sorted(set(L_values or cfg.evaluation.depth_values))
    if not L_values or min(L_values) < 1:
        raise ConfigError(f"depth values must be a nonempty list of integers >= 1, got {L_values}")
    manifest = RunManifest("depth_sweep", config_to_dict(cfg))
    path, samples = load_inputs(dataset, cfg, manifest)
    manifest.inputs = {"dataset": path, "L_values": L_values}
    train, test = train_test_split(samples, cfg.dataset, cfg.seeds.data_seed)
    out_dir = run_dir(cfg, "depth_sweep")

    def cell(L):
        result = fit(cfg, train, layers=L, progress=False)
        checkpoint = save_checkpoint(result.model, os.path.join(out_dir, "checkpoints", f"L{L}.json"))
        evaluation = evaluate(result.model, test, cfg.evaluation.sigma, progress=False)
        final_loss = result.trace[-1].mean_total if result.trace else float("nan")
        return checkpoint, dict(L=L, **report_row(evaluation), final_loss=final_loss)

    cells = run_cells(L_values, cell, cfg.workers, "  Depth sweep", progress)
    manifest.checkpoint_paths += [checkpoint for checkpoint, _ in cells]
    table = pd.DataFrame([row for _, row in cells], columns=["L"] + REPORT_COLUMNS + ["final_loss"])
    manifest.metric_paths.append(write_csv(table, os.path.join(out_dir, "depth_sweep.csv")))
    print(f"  Depths evaluated: {len(table)}")
    return finish(manifest, cfg, out_dir)


def cmd_robustness(cfg: ExperimentConfig, checkpoint: str, dataset: Optional[str] = None,
                   proportions: Optional[List[float]] = None, progress: bool = True) -> RunManifest:
    """
    Evaluate a trained model from randomly connected initial adjacencies.

    For each proportion p the test split is evaluated ``robustness_runs``
    times, each run drawing a fresh A0 per sample with floor(p * n(n-1)/2)
    random pairs switched on; the row holds the mean over runs. p = 0 is the
    identity baseline and runs once.
    """
    proportions = sorted(set(proportions or cfg.evaluation.proportions))
    if any(not 0.0 <= p <= 1.0 for p in proportions):
        raise ConfigError(f"proportions must lie in [0, 1], got {proportions}")
    if cfg.evaluation.robustness_runs < 1:
        raise ConfigError("robustness_runs must be at least 1")
    manifest = RunManifest("robustness", config_to_dict(cfg))
    path, samples = load_inputs(dataset, cfg, manifest)
    manifest.inputs = {"checkpoint": checkpoint, "dataset": path, "proportions": proportions}

    model = load_checkpoint(checkpoint)
    check_model_fits(model, samples)
    test = train_test_split(samples, cfg.dataset, cfg.seeds.data_seed)[1]

    def cell(p):
        runs = 1 if p == 0 else cfg.evaluation.robustness_runs
        seeds = sample_seeds([cfg.seeds.data_seed, int(round(p * 1_000_000))], runs * len(test))
        rows = []
        for run in range(runs):
            def initial(index, run=run):
                if p == 0:
                    return None
                return make_initial_adjacency(model.n, "random_proportion", p, seeds[run * len(test) + index])
            rows.append(report_row(evaluate(model, test, cfg.evaluation.sigma, initial=initial, progress=False)))
        means = pd.DataFrame(rows).mean().to_dict()
        return dict(p=p, runs=runs, **{column: means[column] for column in REPORT_COLUMNS})

    table = pd.DataFrame(run_cells(proportions, cell, cfg.workers, "  Robustness", progress),
                         columns=["p", "runs"] + REPORT_COLUMNS)
    out_dir = run_dir(cfg, "robustness")
    manifest.metric_paths.append(write_csv(table, os.path.join(out_dir, "robustness.csv")))
    print(f"  Proportions evaluated: {len(table)}")
    print(f"  Max mean degree MMD: {table['degree_mmd'].max():.6f}")
    return finish(manifest, cfg, out_dir)


def cmd_ablation(cfg: ExperimentConfig, dataset: Optional[str] = None, progress: bool = True) -> RunManifest:
    """Train the six loss variants on a figures dataset; one row per variant."""
    if cfg.dataset.family != "figures":
        raise ConfigError(f"the loss ablation runs on the figures dataset, not {cfg.dataset.family!r}")
    manifest = RunManifest("ablation", config_to_dict(cfg))
    path, samples = load_inputs(dataset, cfg, manifest)
    manifest.inputs = {"dataset": path}
    train, test = train_test_split(samples, cfg.dataset, cfg.seeds.data_seed)
    out_dir = run_dir(cfg, "ablation")
    variants = {name: (psi1, psi2, reg) for name, psi1, psi2, reg in ABLATION_VARIANTS}

    def cell(name):
        psi1, psi2, reg = variants[name]
        variant_cfg = with_loss(cfg, psi1, psi2, cfg.loss.ablation_weight_decay if reg else 0.0)
        result = fit(variant_cfg, train, progress=False)
        checkpoint = save_checkpoint(
            result.model, os.path.join(out_dir, "checkpoints", f"{variant_slug(name)}.json")
        )
        evaluation = evaluate(result.model, test, cfg.evaluation.sigma, progress=False)
        return checkpoint, {"variant": name, "metrics": report_row(evaluation)}

    cells = run_cells(list(variants), cell, cfg.workers, "  Ablation", progress)
    manifest.checkpoint_paths += [checkpoint for checkpoint, _ in cells]
    table = flatten_to_row_level([record for _, record in cells], nested_key="metrics")
    table = table[["variant", "acc", "iou", "dice", "degree_mmd", "clustering_mmd", "orbit_mmd"]]
    manifest.metric_paths.append(write_csv(table, os.path.join(out_dir, "ablation.csv")))
    for row in table.itertuples(index=False):
        print(f"  {row.variant:<12} acc={row.acc:.4f} dice={row.dice:.4f}")
    return finish(manifest, cfg, out_dir)


def cmd_predict(cfg: ExperimentConfig, checkpoint: str, sample_index: int, dataset: Optional[str] = None,
                noise_features: bool = False, progress: bool = True) -> RunManifest:
    """
    Dump one sample's prediction: nodes.csv, edges.csv and adjacency.csv.

    With ``noise_features`` the sample's features are replaced by Gaussian
    noise seeded from the data seed, using the model as a graph generator.
    """
    manifest = RunManifest("predict", config_to_dict(cfg))
    path, samples = load_inputs(dataset, cfg, manifest)
    manifest.inputs = {
        "checkpoint": checkpoint, "dataset": path,
        "sample_index": sample_index, "noise_features": noise_features,
    }
    if not 0 <= sample_index < len(samples):
        raise DatasetError(f"sample index {sample_index} out of range for {len(samples)} samples")

    model = load_checkpoint(checkpoint)
    check_model_fits(model, samples)
    sample = samples[sample_index]
    features = sample.features
    if noise_features:
        features = gaussian_features(features.shape, cfg.seeds.data_seed, sample_index)

    soft = predict(model, features)
    edges = binarize(soft, model.epsilon)
    rows, cols = np.triu_indices(model.n, k=1)
    keep = (edges[rows, cols] != 0) | (sample.adjacency[rows, cols] != 0)

    nodes = pd.DataFrame(features, columns=[f"f{i}" for i in range(features.shape[1])])
    nodes.insert(0, "node", np.arange(model.n))
    pairs = pd.DataFrame({
        "i": rows[keep],
        "j": cols[keep],
        "probability": soft[rows[keep], cols[keep]],
        "predicted": edges[rows[keep], cols[keep]],
        "truth": sample.adjacency[rows[keep], cols[keep]],
    })

    suffix = "_noise" if noise_features else ""
    out_dir = run_dir(cfg, "predict", f"sample_{sample_index}{suffix}")
    manifest.metric_paths += [
        write_csv(nodes, os.path.join(out_dir, "nodes.csv")),
        write_csv(pairs, os.path.join(out_dir, "edges.csv")),
        write_csv(pd.DataFrame(soft), os.path.join(out_dir, "adjacency.csv")),
    ]
    print(f"  Predicted edges: {int(pairs['predicted'].sum())} (truth: {int(pairs['truth'].sum())})")
    return finish(manifest, cfg, out_dir)


COMMANDS: Dict[str, Callable] = {
    "gen": cmd_gen,
    "train": cmd_train,
    "eval": cmd_eval,
    "depth_sweep": cmd_depth_sweep,
    "robustness": cmd_robustness,
    "ablation": cmd_ablation,
    "predict": cmd_predict,
}


def replay(manifest_path: str, output_dir: Optional[str] = None, progress: bool = True) -> RunManifest:
    """
    Run a recorded command again from its manifest.

    Input datasets must still hash to the recorded values; the gen command
    rewrites its dataset, so its hash is not checked up front.
    """
    recorded = load_manifest(manifest_path)
    if recorded.command not in COMMANDS:
        raise ConfigError(f"manifest names unknown command {recorded.command!r}")
    cfg = config_from_dict(recorded.config)
    if output_dir:
        cfg = replace(cfg, output_dir=output_dir)

    if recorded.command != "gen":
        for path, expected in recorded.dataset_hashes.items():
            if not os.path.exists(path) or content_hash(path) != expected:
                raise DatasetError(f"dataset {path} is missing or changed since the recorded run")

    print(f"  Replaying {recorded.command} from {manifest_path}")
    return COMMANDS[recorded.command](cfg, progress=progress, **recorded.inputs)
