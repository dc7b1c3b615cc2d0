from dataclasses import replace

import pandas as pd
import pytest

from experiments.commands import cmd_ablation, cmd_eval, cmd_gen, cmd_robustness, cmd_train
from experiments.settings import DatasetConfig, ExperimentConfig, apply_preset, resolve


pytestmark = pytest.mark.slow

ROBUSTNESS_PROPORTIONS = [round(0.1 * i, 1) for i in range(1, 11)]


def desk_config(out, epochs=None, **dataset):
    cfg = apply_preset(ExperimentConfig(dataset=DatasetConfig(**dataset), output_dir=str(out)), "desk")
    if epochs is not None:
        cfg = replace(cfg, optim=replace(cfg.optim, epochs=epochs))
    return resolve(cfg)


@pytest.fixture(scope="module")
def community_run(tmp_path_factory):
    cfg = desk_config(tmp_path_factory.mktemp("community"), epochs=150, family="community", communities=2)
    cmd_gen(cfg, progress=False)
    manifest = cmd_train(cfg, progress=False)
    return cfg, manifest.checkpoint_paths[0]


def test_desk_community_learning_beats_untrained(community_run):
    cfg, checkpoint = community_run
    assert (cfg.dataset.num_samples, cfg.optim.epochs, cfg.optim.learning_rate) == (50, 150, 1e-5)
    report = pd.read_csv(cmd_eval(cfg, checkpoint, baseline=True, progress=False).metric_paths[0])
    trained, untrained = report.set_index("model").loc[["trained", "untrained"]].to_dict("records")
    assert trained["acc"] >= 0.95
    assert trained["iou"] >= 0.85
    assert trained["degree_mmd"] < untrained["degree_mmd"]
    assert trained["clustering_mmd"] < untrained["clustering_mmd"]


def test_robustness_keeps_degree_mmd_low(community_run):
    cfg, checkpoint = community_run
    cfg = replace(cfg, evaluation=replace(cfg.evaluation, robustness_runs=5))
    result = cmd_robustness(cfg, checkpoint, proportions=ROBUSTNESS_PROPORTIONS, progress=False)
    table = pd.read_csv(result.metric_paths[0])
    assert list(table["p"]) == ROBUSTNESS_PROPORTIONS
    assert (table["runs"] == 5).all()
    assert (table["degree_mmd"] < 0.05).all()


def test_desk_torus_degree_mmd(tmp_path):
    cfg = desk_config(tmp_path, family="surface", surface_kind="torus", surface_nodes=100)
    assert (cfg.dataset.num_samples, cfg.optim.epochs) == (20, 30)
    cmd_gen(cfg, progress=False)
    checkpoint = cmd_train(cfg, progress=False).checkpoint_paths[0]
    report = pd.read_csv(cmd_eval(cfg, checkpoint, progress=False).metric_paths[0])
    assert report.loc[0, "degree_mmd"] <= 0.05


def test_combined_loss_dominates_dice_only_on_figures(tmp_path):
    cfg = desk_config(tmp_path, family="figures")
    assert cfg.dataset.num_samples == 200
    cmd_gen(cfg, progress=False)
    table = pd.read_csv(cmd_ablation(cfg, progress=False).metric_paths[0]).set_index("variant")
    combined, dice_only = table.loc["IoU+HED"], table.loc["IoU"]
    assert combined["acc"] >= dice_only["acc"] + 0.05
    assert combined["dice"] >= dice_only["dice"] + 0.05
