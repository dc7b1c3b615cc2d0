import json
import os

import numpy as np

from gln.model import DEFAULT_ACTIVATIONS, GlnLayerParams, GlnModel
from utility.errors import ConfigError


FORMAT_VERSION = 1


def model_to_dict(model: GlnModel) -> dict:
    """
    Versioned JSON-ready document for a model.

    Matrices are nested row-major lists of Python floats; ``json`` writes
    the shortest repr that parses back to the same double, so a save/load
    round trip is bit-exact.
    """
    return {
        "format_version": FORMAT_VERSION,
        "dims": list(model.dims),
        "n": model.n,
        "k": model.k,
        "L": model.L,
        "epsilon": model.epsilon,
        "activations": dict(model.activations),
        "layers": [
            {
                "W": [np.asarray(w).tolist() for w in layer.W],
                "U": np.asarray(layer.U).tolist(),
                "Z": np.asarray(layer.Z).tolist(),
                "Q": np.asarray(layer.Q).tolist(),
                "M": np.asarray(layer.M).tolist(),
            }
            for layer in model.layers
        ],
    }


def model_from_dict(doc: dict) -> GlnModel:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ConfigError(f"unsupported checkpoint format_version {version!r}")
    if len(doc["layers"]) != doc["L"]:
        raise ConfigError(f"checkpoint declares L={doc['L']} but holds {len(doc['layers'])} layers")

    def as_array(rows):
        return np.array(rows, dtype=np.float64)

    layers = [
        GlnLayerParams(
            W=[as_array(w) for w in entry["W"]],
            U=as_array(entry["U"]),
            Z=as_array(entry["Z"]),
            Q=as_array(entry["Q"]),
            M=as_array(entry["M"]),
        )
        for entry in doc["layers"]
    ]
    return GlnModel(
        layers=layers,
        dims=list(doc["dims"]),
        n=int(doc["n"]),
        k=int(doc["k"]),
        epsilon=float(doc["epsilon"]),
        activations=dict(doc.get("activations", DEFAULT_ACTIVATIONS)),
    )


def save_checkpoint(model: GlnModel, path: str) -> str:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w") as f:
        json.dump(model_to_dict(model), f)
    return path


def load_checkpoint(path: str) -> GlnModel:
    with open(path) as f:
        return model_from_dict(json.load(f))
