import argparse

import pytest

from experiments.settings import (
    DatasetConfig,
    ExperimentConfig,
    ModelConfig,
    add_config_arguments,
    config_from_args,
    dataset_name,
    load_config,
    resolve,
    save_config,
)
from utility.errors import ConfigError


def parse(argv):
    parser = argparse.ArgumentParser()
    add_config_arguments(parser)
    return config_from_args(parser.parse_args(argv))


def test_defaults_reproduce_published_settings():
    cfg = resolve(ExperimentConfig())
    assert (cfg.model.layers, cfg.model.hidden_dim, cfg.model.kernels, cfg.model.epsilon) == (5, 32, 3, 0.5)
    assert (cfg.loss.psi1, cfg.loss.psi2) == (1.0, 1.0)
    assert cfg.optim.learning_rate == 1e-5
    assert cfg.optim.epochs == 150
    assert cfg.dataset.num_samples == 300


@pytest.mark.parametrize("family, lr, epochs, samples", [
    ("surface", 5e-6, 200, 200),
    ("figures", 5e-6, 150, 3000),
])
def test_family_defaults(family, lr, epochs, samples):
    cfg = resolve(ExperimentConfig(dataset=DatasetConfig(family=family)))
    assert cfg.optim.learning_rate == lr
    assert cfg.optim.epochs == epochs
    assert cfg.dataset.num_samples == samples


def test_four_communities_default_to_500_samples():
    cfg = resolve(ExperimentConfig(dataset=DatasetConfig(communities=4)))
    assert cfg.dataset.num_samples == 500


def test_figures_subsample_training_by_default():
    assert resolve(ExperimentConfig(dataset=DatasetConfig(family="figures"))).dataset.max_train_samples == 500
    assert resolve(ExperimentConfig()).dataset.max_train_samples == 0


def test_config_file_round_trip(tmp_path):
    cfg = resolve(ExperimentConfig(model=ModelConfig(layers=3), output_dir=str(tmp_path)))
    path = save_config(cfg, str(tmp_path / "config.toml"))
    assert load_config(path) == cfg


def test_unknown_keys_are_rejected(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[model]\ndepth = 3\n")
    with pytest.raises(ConfigError):
        load_config(str(path))
    path.write_text("colour = 'red'\n")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_flags_override_file(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text("[model]\nlayers = 2\nhidden_dim = 8\n")
    cfg = parse(["--config", str(path), "--layers", "4", "--learning-rate", "0.001"])
    assert cfg.model.layers == 4
    assert cfg.model.hidden_dim == 8
    assert cfg.optim.learning_rate == 0.001


def test_list_flags_and_seed_shortcut():
    cfg = parse(["--proportions", "0.1", "0.2", "--depth-values", "1", "3", "--seed", "10"])
    assert cfg.evaluation.proportions == [0.1, 0.2]
    assert cfg.evaluation.depth_values == [1, 3]
    assert (cfg.seeds.data_seed, cfg.seeds.init_seed, cfg.seeds.shuffle_seed) == (10, 11, 12)


def test_desk_preset():
    cfg = parse(["--preset", "desk"])
    assert cfg.dataset.num_samples == 50
    assert cfg.optim.epochs == 30
    cfg = parse(["--preset", "desk", "--family", "figures", "--epochs", "5"])
    assert cfg.dataset.num_samples == 200
    assert cfg.optim.epochs == 5


def test_validation():
    with pytest.raises(ConfigError):
        resolve(ExperimentConfig(dataset=DatasetConfig(family="molecules")))
    with pytest.raises(ConfigError):
        resolve(ExperimentConfig(dataset=DatasetConfig(family="surface", surface_nodes=50)))
    with pytest.raises(ConfigError):
        resolve(ExperimentConfig(model=ModelConfig(epsilon=0.0)))
    with pytest.raises(ConfigError):
        resolve(ExperimentConfig(dataset=DatasetConfig(family="figures", image_side=2)))


def test_dataset_names():
    assert dataset_name(DatasetConfig()) == "community_c2"
    assert dataset_name(DatasetConfig(family="surface", surface_kind="mixed", surface_nodes=400)) == "surf400_mixed"
    assert dataset_name(DatasetConfig(family="figures")) == "figures_20"
