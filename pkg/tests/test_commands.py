import os
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from config import DATA_SUBDIR
from experiments.commands import (
    ABLATION_VARIANTS,
    cmd_ablation,
    cmd_depth_sweep,
    cmd_eval,
    cmd_gen,
    cmd_predict,
    cmd_robustness,
    cmd_train,
    dataset_path,
    replay,
)
from experiments.datasets import build_samples, train_test_split
from experiments.manifest import load_manifest
from experiments.pipeline import evaluate, score_graphs
from experiments.settings import (
    DatasetConfig,
    EvalConfig,
    ExperimentConfig,
    ModelConfig,
    OptimConfig,
    resolve,
)
from generators import CommunitySpec, FigureImageSpec, gen_community, gen_figure_image, read_dataset, write_dataset
from gln import init_model, load_checkpoint
from utility.errors import ConfigError, DatasetError


def small_config(out, **dataset):
    fields = dict(family="figures", image_side=4, num_samples=6)
    fields.update(dataset)
    return resolve(ExperimentConfig(
        dataset=DatasetConfig(**fields),
        model=ModelConfig(hidden_dim=4, layers=2, kernels=2),
        optim=OptimConfig(learning_rate=1e-3, epochs=2),
        evaluation=EvalConfig(proportions=[0.0, 0.5], robustness_runs=2, depth_values=[1, 2]),
        output_dir=str(out),
    ))


def read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


@pytest.fixture
def trained(tmp_path):
    cfg = small_config(tmp_path / "out")
    cmd_gen(cfg, progress=False)
    manifest = cmd_train(cfg, progress=False)
    return cfg, manifest


def test_gen_writes_dataset_summary_and_manifest(tmp_path):
    cfg = small_config(tmp_path)
    manifest = cmd_gen(cfg, progress=False)
    path = dataset_path(cfg)
    assert os.path.dirname(path) == os.path.join(str(tmp_path), DATA_SUBDIR)
    with open(path) as f:
        assert len(f.readlines()) == 6
    assert os.path.exists(path.replace(".ndjson", "_summary.json"))
    assert load_manifest(manifest.manifest_path).dataset_hashes == manifest.dataset_hashes


def test_generation_does_not_depend_on_worker_count(tmp_path):
    cfg = small_config(tmp_path)
    serial = build_samples(cfg.dataset, 3, workers=1, progress=False)
    threaded = build_samples(cfg.dataset, 3, workers=3, progress=False)
    for a, b in zip(serial, threaded):
        np.testing.assert_array_equal(a.features, b.features)


def test_mixed_surfaces_cover_every_kind(tmp_path):
    cfg = small_config(tmp_path, family="surface", surface_kind="mixed", num_samples=1)
    samples = build_samples(cfg.dataset, 0, progress=False)
    assert len(samples) == 6
    assert len({s.variant for s in samples}) == 6


def test_train_writes_checkpoint_and_trace(trained):
    cfg, manifest = trained
    trace = pd.read_csv(manifest.metric_paths[0])
    assert list(trace["epoch"]) == [1, 2]
    assert os.path.exists(manifest.checkpoint_paths[0])


def test_replayed_training_is_byte_identical(trained, tmp_path):
    cfg, manifest = trained
    again = replay(manifest.manifest_path, output_dir=str(tmp_path / "replay"), progress=False)
    assert read_bytes(again.checkpoint_paths[0]) == read_bytes(manifest.checkpoint_paths[0])
    assert read_bytes(again.metric_paths[0]) == read_bytes(manifest.metric_paths[0])


def test_replay_refuses_changed_dataset(trained):
    cfg, manifest = trained
    with open(dataset_path(cfg), "a") as f:
        f.write("\n")
    with pytest.raises(DatasetError):
        replay(manifest.manifest_path, progress=False)


def test_eval_reports_trained_and_untrained_rows(trained):
    cfg, manifest = trained
    result = cmd_eval(cfg, manifest.checkpoint_paths[0], baseline=True, progress=False)
    report = pd.read_csv(result.metric_paths[0])
    assert list(report["model"]) == ["trained", "untrained"]
    assert {"degree_mmd", "clustering_mmd", "orbit_mmd", "acc", "iou", "dice"} <= set(report.columns)
    per_sample = pd.read_csv(result.metric_paths[1])
    assert len(per_sample) == 2


def test_untrained_baseline_follows_the_checkpoint_shape(trained):
    cfg, manifest = trained
    reshaped = replace(cfg, model=replace(cfg.model, hidden_dim=7, layers=3, kernels=1))
    result = cmd_eval(reshaped, manifest.checkpoint_paths[0], baseline=True, progress=False)
    report = pd.read_csv(result.metric_paths[0]).set_index("model")
    model = load_checkpoint(manifest.checkpoint_paths[0])
    test = train_test_split(read_dataset(dataset_path(cfg)), cfg.dataset, cfg.seeds.data_seed)[1]
    fresh = init_model(model.dims, model.n, model.k, model.epsilon, cfg.seeds.init_seed)
    expected = evaluate(fresh, test, cfg.evaluation.sigma, progress=False)
    assert report.loc["untrained", "acc"] == pytest.approx(expected.aggregate.accuracy)
    assert report.loc["untrained", "degree_mmd"] == pytest.approx(expected.mmd.degree_mmd, abs=1e-12)


def test_eval_scores_noise_features_against_the_test_graphs(trained):
    cfg, manifest = trained
    result = cmd_eval(cfg, manifest.checkpoint_paths[0], noise_features=True, progress=False)
    assert result.inputs["noise_features"] is True
    report = pd.read_csv(result.metric_paths[0]).set_index("model")
    assert list(report.index) == ["trained", "trained_noise"]
    model = load_checkpoint(manifest.checkpoint_paths[0])
    test = train_test_split(read_dataset(dataset_path(cfg)), cfg.dataset, cfg.seeds.data_seed)[1]
    noisy = evaluate(model, test, cfg.evaluation.sigma, noise_seed=cfg.seeds.data_seed, progress=False)
    assert report.loc["trained_noise", "iou"] == pytest.approx(noisy.aggregate.iou)
    assert report.loc["trained_noise", "orbit_mmd"] == pytest.approx(noisy.mmd.orbit_mmd, abs=1e-12)
    again = evaluate(model, test, cfg.evaluation.sigma, noise_seed=cfg.seeds.data_seed, progress=False)
    for first, second in zip(noisy.predictions, again.predictions):
        np.testing.assert_array_equal(first, second)


def test_ground_truth_scored_against_itself_is_perfect(tmp_path):
    cfg = small_config(tmp_path)
    truth = [s.adjacency for s in build_samples(cfg.dataset, 0, progress=False)]
    evaluation = score_graphs(truth, truth)
    assert evaluation.aggregate.accuracy == 1.0
    assert max(evaluation.mmd.as_row().values()) <= 1e-12


def test_eval_rejects_mismatched_checkpoint(trained, tmp_path):
    cfg, manifest = trained
    other = small_config(tmp_path / "other", image_side=5)
    cmd_gen(other, progress=False)
    with pytest.raises(ConfigError):
        cmd_eval(other, manifest.checkpoint_paths[0], progress=False)


def test_depth_sweep_is_deterministic(trained):
    cfg, _ = trained
    first = cmd_depth_sweep(cfg, progress=False)
    table = pd.read_csv(first.metric_paths[0])
    assert list(table["L"]) == [1, 2]
    csv = read_bytes(first.metric_paths[0])
    threaded = cmd_depth_sweep(replace(cfg, workers=2), progress=False)
    assert read_bytes(threaded.metric_paths[0]) == csv


def test_depth_sweep_rejects_bad_depths(trained):
    cfg, _ = trained
    with pytest.raises(ConfigError):
        cmd_depth_sweep(cfg, L_values=[0, 2], progress=False)


def test_robustness_has_one_row_per_proportion(trained):
    cfg, manifest = trained
    result = cmd_robustness(cfg, manifest.checkpoint_paths[0], progress=False)
    table = pd.read_csv(result.metric_paths[0])
    assert list(table["p"]) == [0.0, 0.5]
    assert list(table["runs"]) == [1, 2]


def test_ablation_emits_six_variants(trained):
    cfg, _ = trained
    result = cmd_ablation(replace(cfg, optim=replace(cfg.optim, epochs=1)), progress=False)
    table = pd.read_csv(result.metric_paths[0])
    assert list(table["variant"]) == [name for name, *_ in ABLATION_VARIANTS]
    assert len(result.checkpoint_paths) == 6
    names = {os.path.basename(path) for path in result.checkpoint_paths}
    assert names == {"hed.json", "hed_reg.json", "iou.json", "iou_reg.json", "iou_hed.json", "iou_hed_reg.json"}


def test_ablation_needs_figures(tmp_path):
    cfg = small_config(tmp_path, family="community", num_samples=4)
    cmd_gen(cfg, progress=False)
    with pytest.raises(ConfigError):
        cmd_ablation(cfg, progress=False)


def test_predict_dumps_nodes_edges_and_adjacency(trained):
    cfg, manifest = trained
    result = cmd_predict(cfg, manifest.checkpoint_paths[0], 0, noise_features=True, progress=False)
    nodes, edges, adjacency = (pd.read_csv(path) for path in result.metric_paths)
    assert len(nodes) == 16
    assert list(edges.columns) == ["i", "j", "probability", "predicted", "truth"]
    assert adjacency.shape == (16, 16)
    assert np.all(edges["i"] < edges["j"])


def test_predict_rejects_out_of_range_sample(trained):
    cfg, manifest = trained
    with pytest.raises(DatasetError):
        cmd_predict(cfg, manifest.checkpoint_paths[0], 99, progress=False)


def test_train_rejects_mixed_node_counts(tmp_path):
    cfg = small_config(tmp_path)
    mixed = [gen_community(CommunitySpec(C=2), seed=0), gen_figure_image(FigureImageSpec(side=4), seed=0)]
    path = write_dataset(mixed, str(tmp_path / "mixed.ndjson"))
    with pytest.raises(ConfigError):
        cmd_train(cfg, path, progress=False)


def test_missing_dataset_points_at_gen(tmp_path):
    with pytest.raises(DatasetError, match="gen"):
        cmd_train(small_config(tmp_path), progress=False)
