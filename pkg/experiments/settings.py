"""
Experiment configuration.

A config is a handful of dataclass sections. Family-dependent fields
(learning rate, epochs, sample counts) stay ``None`` until ``resolve``
fills them, so an empty config file reproduces the published settings:

    L = 5, d_l = 32, k = 3, epsilon = 0.5, psi1 = psi2 = 1,
    lr 1e-5 (community) / 5e-6 (surface, figures),
    epochs 150 (community) / 200 (surface) / 150 (figures)

TOML is the file format; every field also has a CLI flag of the same name
(underscores become dashes) and flags win over the file.
"""

import argparse
import os
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from typing import List, Optional, Union, get_args, get_origin, get_type_hints

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import config as paths
from generators.surfaces import SURFACE_KINDS
from training.losses import BALANCE_MODES
from utility.errors import ConfigError


FAMILIES = ("community", "surface", "figures")
FAMILY_DEFAULTS = {
    "community": {"learning_rate": 1e-5, "epochs": 150},
    "surface": {"learning_rate": 5e-6, "epochs": 200},
    "figures": {"learning_rate": 5e-6, "epochs": 150},
}
SURFACE_VERSIONS = 200
FIGURE_IMAGES = 3000
FIGURE_TRAIN_SUBSAMPLE = 500
PRESETS = ("full", "desk")


@dataclass
class DatasetConfig:
    family: str = "community"
    num_samples: Optional[int] = None
    communities: int = 2
    p_rewire: float = 0.05
    feature_mode: str = "blobs"
    surface_kind: str = "torus"
    surface_nodes: int = 100
    image_side: int = 20
    noise_std: float = 0.02
    train_fraction: float = 0.8
    max_train_samples: Optional[int] = None


@dataclass
class ModelConfig:
    hidden_dim: int = 32
    layers: int = 5
    kernels: int = 3
    epsilon: float = 0.5


@dataclass
class LossConfig:
    psi1: float = 1.0
    psi2: float = 1.0
    weight_decay: float = 0.0
    balance_mode: str = "paper_literal"
    ablation_weight_decay: float = 1e-4


@dataclass
class OptimConfig:
    learning_rate: Optional[float] = None
    epochs: Optional[int] = None
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8


@dataclass
class SeedConfig:
    data_seed: int = 0
    init_seed: int = 1
    shuffle_seed: int = 2


@dataclass
class EvalConfig:
    sigma: float = 1.0
    robustness_runs: int = 5
    proportions: List[float] = field(default_factory=lambda: [round(0.1 * i, 1) for i in range(1, 11)])
    depth_values: List[int] = field(default_factory=lambda: list(range(1, 9)))


@dataclass
class ExperimentConfig:
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    optim: OptimConfig = field(default_factory=OptimConfig)
    seeds: SeedConfig = field(default_factory=SeedConfig)
    evaluation: EvalConfig = field(default_factory=EvalConfig)
    output_dir: str = ""
    workers: int = 1


SECTIONS = {
    "dataset": DatasetConfig,
    "model": ModelConfig,
    "loss": LossConfig,
    "optim": OptimConfig,
    "seeds": SeedConfig,
    "evaluation": EvalConfig,
}
TOP_LEVEL = ("output_dir", "workers")


def default_sample_count(dataset: DatasetConfig) -> int:
    if dataset.family == "community":
        return 300 if dataset.communities == 2 else 500
    if dataset.family == "surface":
        return SURFACE_VERSIONS
    return FIGURE_IMAGES


def validate(cfg: ExperimentConfig):
    ds = cfg.dataset
    if ds.family not in FAMILIES:
        raise ConfigError(f"dataset family must be one of {FAMILIES}, got {ds.family!r}")
    if ds.family == "surface" and ds.surface_kind not in SURFACE_KINDS + ("mixed",):
        raise ConfigError(f"unknown surface kind {ds.surface_kind!r}")
    if ds.family == "surface" and ds.surface_nodes not in (100, 400):
        raise ConfigError(f"surface_nodes must be 100 or 400, got {ds.surface_nodes}")
    if ds.family == "figures" and ds.image_side < 3:
        raise ConfigError(f"image_side must be at least 3, got {ds.image_side}")
    if not 0.0 < ds.train_fraction < 1.0:
        raise ConfigError(f"train_fraction must lie in (0, 1), got {ds.train_fraction}")
    if cfg.model.layers < 0 or cfg.model.kernels < 1 or cfg.model.hidden_dim < 1:
        raise ConfigError("model needs layers >= 0, kernels >= 1 and hidden_dim >= 1")
    if not 0.0 < cfg.model.epsilon < 1.0:
        raise ConfigError(f"epsilon must lie in (0, 1), got {cfg.model.epsilon}")
    if cfg.loss.balance_mode not in BALANCE_MODES:
        raise ConfigError(f"balance_mode must be one of {BALANCE_MODES}")
    if cfg.loss.psi1 < 0 or cfg.loss.psi2 < 0 or cfg.loss.psi1 + cfg.loss.psi2 <= 0:
        raise ConfigError("psi1 and psi2 must be nonnegative with a positive sum")
    if cfg.workers < 1:
        raise ConfigError("workers must be at least 1")


def resolve(cfg: ExperimentConfig) -> ExperimentConfig:
    """Fill every family-dependent default; the result has no ``None`` left."""
    validate(cfg)
    ds = cfg.dataset
    family = FAMILY_DEFAULTS[ds.family]
    dataset = replace(
        ds,
        num_samples=ds.num_samples if ds.num_samples is not None else default_sample_count(ds),
        max_train_samples=(
            ds.max_train_samples if ds.max_train_samples is not None
            else (FIGURE_TRAIN_SUBSAMPLE if ds.family == "figures" else 0)
        ),
    )
    optim = replace(
        cfg.optim,
        learning_rate=cfg.optim.learning_rate if cfg.optim.learning_rate is not None else family["learning_rate"],
        epochs=cfg.optim.epochs if cfg.optim.epochs is not None else family["epochs"],
    )
    return replace(
        cfg,
        dataset=dataset,
        optim=optim,
        output_dir=cfg.output_dir or paths.OUTPUT_ROOT,
    )


def apply_preset(cfg: ExperimentConfig, preset: Optional[str]) -> ExperimentConfig:
    """
    ``full``: published scale, no training subsample.
    ``desk``: small sample counts and 30 epochs so a run takes minutes.
    """
    if preset is None:
        return cfg
    if preset == "full":
        return replace(cfg, dataset=replace(cfg.dataset, max_train_samples=0))
    if preset == "desk":
        counts = {"community": 50, "surface": 20, "figures": 200}
        return replace(
            cfg,
            dataset=replace(cfg.dataset, num_samples=counts[cfg.dataset.family], max_train_samples=0),
            optim=replace(cfg.optim, epochs=30),
        )
    raise ConfigError(f"unknown preset {preset!r}; choose from {PRESETS}")


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return asdict(cfg)


def config_from_dict(doc: dict) -> ExperimentConfig:
    sections = {}
    for key, value in doc.items():
        if key in SECTIONS:
            cls = SECTIONS[key]
            known = {f.name for f in fields(cls)}
            unknown = set(value) - known
            if unknown:
                raise ConfigError(f"unknown keys in [{key}]: {sorted(unknown)}")
            sections[key] = cls(**value)
        elif key in TOP_LEVEL:
            sections[key] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return ExperimentConfig(**sections)


def load_config(path: str) -> ExperimentConfig:
    with open(path, "rb") as f:
        try:
            doc = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{path}: {e}") from e
    return config_from_dict(doc)


def save_config(cfg: ExperimentConfig, path: str) -> str:
    """Write a resolved config as TOML (TOML has no null, so resolve first)."""
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "wb") as f:
        tomli_w.dump(config_to_dict(resolve(cfg)), f)
    return path


def _flag_type(hint):
    if get_origin(hint) is Union:
        hint = next(arg for arg in get_args(hint) if arg is not type(None))
    if get_origin(hint) in (list, List):
        return get_args(hint)[0], "+"
    return hint, None


def add_config_arguments(parser: argparse.ArgumentParser):
    """One flag per config field; unset flags stay out of the namespace."""
    group = parser.add_argument_group("experiment config")
    group.add_argument("--config", help="TOML config file")
    group.add_argument("--preset", choices=PRESETS, help="apply a scale preset before flags")
    group.add_argument("--seed", type=int, help="shortcut: data/init/shuffle seeds = S, S+1, S+2")
    for section, cls in SECTIONS.items():
        for f in fields(cls):
            kind, nargs = _flag_type(get_type_hints(cls)[f.name])
            group.add_argument(
                f"--{f.name.replace('_', '-')}",
                dest=f"{section}.{f.name}",
                type=kind,
                nargs=nargs,
                default=argparse.SUPPRESS,
                help=f"[{section}] {f.name}",
            )
    group.add_argument("--output-dir", dest="output_dir", default=argparse.SUPPRESS,
                       help="output root (default: $GLN_OUTPUT_ROOT or ./output)")
    group.add_argument("--workers", type=int, default=argparse.SUPPRESS,
                       help="worker threads for generation, evaluation and sweeps")


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """File, then preset, then --seed, then individual flags."""
    cfg = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    values = vars(args)
    # presets size the dataset by family
    if "dataset.family" in values:
        cfg = replace(cfg, dataset=replace(cfg.dataset, family=values["dataset.family"]))
    cfg = apply_preset(cfg, getattr(args, "preset", None))

    seed = getattr(args, "seed", None)
    if seed is not None:
        cfg = replace(cfg, seeds=SeedConfig(seed, seed + 1, seed + 2))

    for section in SECTIONS:
        updates = {
            key.split(".", 1)[1]: value
            for key, value in values.items()
            if key.startswith(f"{section}.")
        }
        if updates:
            cfg = replace(cfg, **{section: replace(getattr(cfg, section), **updates)})
    for key in TOP_LEVEL:
        if key in values:
            cfg = replace(cfg, **{key: values[key]})
    return resolve(cfg)


def dataset_name(dataset: DatasetConfig) -> str:
    if dataset.family == "community":
        return f"community_c{dataset.communities}"
    if dataset.family == "surface":
        return f"surf{dataset.surface_nodes}_{dataset.surface_kind}"
    return f"figures_{dataset.image_side}"
