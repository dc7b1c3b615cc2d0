"""
Run manifests: what a command was asked to do and what it wrote.

A manifest carries the fully resolved config and the command inputs, so
it is enough on its own to run the command again. Timestamps live only
here, never in the CSV or checkpoint files.
"""

import json
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Dict, List

from generators.io import content_hash
from utility.errors import ConfigError


MANIFEST_NAME = "manifest.json"


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    command: str
    config: dict
    inputs: dict = field(default_factory=dict)
    started_at: str = field(default_factory=utc_now)
    finished_at: str = ""
    dataset_hashes: Dict[str, str] = field(default_factory=dict)
    checkpoint_paths: List[str] = field(default_factory=list)
    metric_paths: List[str] = field(default_factory=list)
    manifest_path: str = ""

    def record_dataset(self, path: str):
        self.dataset_hashes[path] = content_hash(path)


def save_manifest(manifest: RunManifest, run_dir: str) -> str:
    os.makedirs(run_dir, exist_ok=True)
    manifest.finished_at = utc_now()
    manifest.manifest_path = os.path.join(run_dir, MANIFEST_NAME)
    with open(manifest.manifest_path, "w") as f:
        json.dump(asdict(manifest), f, indent=2)
    return manifest.manifest_path


def load_manifest(path: str) -> RunManifest:
    with open(path) as f:
        doc = json.load(f)
    try:
        return RunManifest(**doc)
    except TypeError as e:
        raise ConfigError(f"{path} is not a run manifest: {e}") from e
